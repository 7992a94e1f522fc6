#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "mbc/adam.hpp"
#include "mbc/curriculum.hpp"
#include "mbc/game.hpp"
#include "mbc/rng.hpp"
#include "mbc/value_net.hpp"

namespace mbc {

/// eps(t) = end + (start - end) * exp(-t / decay)
struct EpsilonSchedule {
  double start = 0.9;
  double end = 0.05;
  double decay = 1000.0;

  double at(std::int64_t t) const;
};

/// Fixed-capacity FIFO ring buffer.
template <typename Record>
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay memory capacity must be >= 1");
    records_.reserve(capacity);
  }

  void push(Record r) {
    if (records_.size() < capacity_) {
      records_.push_back(std::move(r));
    } else {
      records_[head_] = std::move(r);
      head_ = (head_ + 1) % capacity_;
    }
    ++pushed_;
  }

  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t pushed() const { return pushed_; }

  /// i-th oldest record.
  const Record& operator[](std::size_t i) const { return records_[(head_ + i) % records_.size()]; }

  /// m records drawn uniformly with replacement.
  std::vector<Record> sample(Rng& rng, int m) const {
    std::vector<Record> out;
    out.reserve(m);
    for (int i = 0; i < m; ++i) {
      out.push_back(records_[std::uniform_int_distribution<std::size_t>(0, records_.size() - 1)(rng)]);
    }
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::uint64_t pushed_ = 0;
  std::vector<Record> records_;
};

/// Uniform over `legal` with probability eps, otherwise `greedy()` (only
/// evaluated when needed).
NodeId epsilon_greedy(const NodeSet& legal, double eps, Rng& rng,
                      const std::function<NodeId()>& greedy);

struct DqnTransition {
  GameState state;
  NodeId action = 0;
  double reward = 0.0;
  GameState next;
};

using QFunction = std::function<std::map<NodeId, double>(const GameState&)>;

/// r for terminal s'; otherwise r + max (defender) or min (attacker) of the
/// target Q over the legal actions at s'. Phases with no legal action are
/// forfeited (reward 0) before reading Q.
double dqn_target(const DqnTransition& t, const QFunction& target_q);
double dqn_target(const DqnTransition& t, const ValueNetwork& target_net);

/// Monte-Carlo targets for s_0..s_{T-1}: y_t = r_t + y_{t+1}, y_T = terminal.
/// With no rewards the episode started terminal and {terminal} is returned.
std::vector<double> mc_backup(const std::vector<double>& rewards, double terminal);

struct RlConfig {
  int episodes = 1000;
  std::int64_t max_updates = -1;  // stop early once reached (-1: no cap)
  int batch = 32;
  int target_sync = 100;        // DQN: T_target
  int capacity = 10240;         // DQN replay capacity
  int memory_multiplier = 27;   // MC: capacity = k * batch
  int episodes_per_step = 1;    // DQN: episodes advanced in lock-step
  AdamConfig adam{};
  EpsilonSchedule epsilon{};
  std::uint64_t seed = 0;
  int threads = 1;
  /// Fixed instance for every episode (overfit checks); overrides the distribution.
  const GameState* fixed_instance = nullptr;
};

struct RlCurvePoint {
  std::int64_t update = 0;
  double loss = 0.0;
  double epsilon = 0.0;
  std::int64_t episodes_seen = 0;
};

struct RlResult {
  ValueNetwork net;
  std::vector<RlCurvePoint> curve;
  std::int64_t updates = 0;
  std::int64_t episodes = 0;
};

RlResult multil_dqn_train(const RlConfig& cfg, const DistributionConfig& dist,
                          const ModelConfig& model);

RlResult multil_mc_train(const RlConfig& cfg, const DistributionConfig& dist,
                         const ModelConfig& model);

/// Greedy play with a Q network: argmax for the defender, argmin for the attacker.
PolicyOutcome q_policy_value(const GameState& s, const ValueNetwork& q_net);

/// Tracks when an MC epoch is due: after every `batch`-th pushed sample.
class EpochTrigger {
 public:
  explicit EpochTrigger(int batch) : batch_(batch) {}
  bool on_push() { return ++count_ % batch_ == 0; }

 private:
  int batch_;
  std::int64_t count_ = 0;
};

}  // namespace mbc
