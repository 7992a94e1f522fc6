#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mbc/curriculum.hpp"
#include "mbc/game.hpp"
#include "mbc/value_net.hpp"

namespace mbc {

struct MetricsReport {
  double eta = 0.0;        // mean |v* - v| / v*
  double zeta = 1.0;       // mean max(v*/v, v/v*)
  double mean_time_s = 0.0;
  int n_instances = 0;
  int n_excluded = 0;      // pairs left out of eta (v* = 0)
  int n_excluded_zeta = 0; // pairs left out of zeta (exactly one side 0)
};

/// Optimality gap and approximation ratio over (exact, heuristic) pairs.
/// v* = 0 pairs are excluded from eta; (0, 0) counts as ratio 1 and pairs with
/// exactly one zero side are excluded from zeta. Throws when eta has no pairs.
MetricsReport compute_metrics(std::span<const std::pair<double, double>> pairs);

struct SolvedInstance {
  std::string id;
  GameState state;
  Weight exact_value = 0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual double play(const GameState& s, std::uint64_t seed) const = 0;
};

/// Greedy rollout with the curriculum experts (or any StateValuer).
class GreedyPolicy : public Policy {
 public:
  GreedyPolicy(const StateValuer& valuer, std::string name) : valuer_(&valuer), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  double play(const GameState& s, std::uint64_t) const override;

 private:
  const StateValuer* valuer_;
  std::string name_;
};

class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(int episodes = 10) : episodes_(episodes) {}
  std::string name() const override { return "random"; }
  double play(const GameState& s, std::uint64_t seed) const override;

 private:
  int episodes_;
};

class OraclePolicy : public Policy {
 public:
  std::string name() const override { return "oracle"; }
  double play(const GameState& s, std::uint64_t) const override;
};

class QNetworkPolicy : public Policy {
 public:
  explicit QNetworkPolicy(const ValueNetwork& net) : net_(&net) {}
  std::string name() const override { return "dqn"; }
  double play(const GameState& s, std::uint64_t) const override;

 private:
  const ValueNetwork* net_;
};

/// Instance i is played with seed derive_seed(seed, "eval", i). A failure is
/// rethrown as std::runtime_error naming the instance id.
MetricsReport evaluate_policy(std::span<const SolvedInstance> dataset, const Policy& policy,
                              std::uint64_t seed, int threads = 1);

struct ActionValueRow {
  NodeId node = 0;
  double value = 0.0;
  bool optimal = false;
};

/// Reward + afterstate value for every legal action; rows within `tolerance`
/// of the best (max for the defender, min for the attacker) are flagged.
std::vector<ActionValueRow> inspect_action_values(const GameState& s, const StateValuer& valuer,
                                                  double tolerance);

}  // namespace mbc
