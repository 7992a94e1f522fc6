#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mbc/adam.hpp"
#include "mbc/game.hpp"
#include "mbc/value_net.hpp"

namespace mbc {

struct IntRange {
  int lo = 0;
  int hi = 0;
  bool operator==(const IntRange&) const = default;
};

/// A distribution of game instances: Erdos-Renyi graphs plus initial budgets.
struct DistributionConfig {
  IntRange nodes{10, 23};
  double density_min = 0.1;
  double density_max = 0.2;
  bool directed = false;
  IntRange weights{1, 1};
  IntRange omega{0, 3};
  IntRange phi{1, 3};
  IntRange lambda{0, 3};

  /// "D1", "D2" (optionally suffixed "_dir" or "_w") or "desk".
  static DistributionConfig preset(const std::string& name);

  Budgets max_budgets() const { return {omega.hi, phi.hi, lambda.hi}; }
  void validate() const;
  bool operator==(const DistributionConfig&) const = default;
};

/// Fresh instance from the distribution. `min_budgets` raises the lower end
/// of each budget range (used to make a target stage reachable).
GameState sample_instance(const DistributionConfig& cfg, std::uint64_t seed,
                          Budgets min_budgets = {});

/// Anything that can score a (non-terminal or terminal) afterstate.
class StateValuer {
 public:
  virtual ~StateValuer() = default;
  virtual double value(const GameState& s) const = 0;
};

/// Frozen per-stage value networks. Terminal states bypass the networks.
class ExpertList : public StateValuer {
 public:
  void add(const StageKey& stage, ValueNetwork net);
  bool contains(const StageKey& stage) const { return experts_.count(stage) > 0; }
  const ValueNetwork& at(const StageKey& stage) const;
  std::size_t size() const { return experts_.size(); }
  const std::map<StageKey, ValueNetwork>& experts() const { return experts_; }

  /// Throws std::out_of_range when the state's stage has no expert.
  double value(const GameState& s) const override;

  bool operator==(const ExpertList& other) const { return experts_ == other.experts_; }

 private:
  std::map<StageKey, ValueNetwork> experts_;
};

/// Exact values via minimax; the stand-in for perfectly trained experts.
class OracleValuer : public StateValuer {
 public:
  double value(const GameState& s) const override;
};

/// A single network used for every stage (the baseline learners' value net).
class NetworkValuer : public StateValuer {
 public:
  explicit NetworkValuer(const ValueNetwork& net) : net_(&net) {}
  double value(const GameState& s) const override;

 private:
  const ValueNetwork* net_;
};

/// Training stages bottom-up: protection, attack, then vaccination, each by
/// increasing remaining budget, without the topmost stage.
std::vector<StageKey> enumerate_stages(const DistributionConfig& cfg);

/// Samples an instance conditioned so `stage` is reachable, then plays
/// uniformly random legal moves until the state sits at `stage`.
GameState random_rollback(const DistributionConfig& cfg, const StageKey& stage,
                          std::uint64_t seed);

struct PolicyOutcome {
  double value = 0.0;
  std::vector<Action> actions;
};

/// Greedy play over afterstates: the defender maximizes and the attacker
/// minimizes reward + afterstate value; ties go to the lowest node id.
PolicyOutcome greedy_policy_value(const GameState& s, const StateValuer& valuer);
double greedy_rollout(const GameState& s, const StateValuer& valuer);

struct StageRecord {
  GameState state;
  double target = 0.0;
};

struct StageDataset {
  std::vector<ValueSample> train;
  std::vector<ValueSample> val;
};

/// Record i of the training split uses seed derive_seed(seed, "train", i)
/// (validation: "val"), so the result is independent of `threads`.
StageDataset build_stage_dataset(const DistributionConfig& cfg, const StageKey& stage,
                                 const StateValuer& experts, int train_size, int val_size,
                                 std::uint64_t seed, int threads = 1);

struct TrainConfig {
  int epochs = 20;
  int batch = 32;
  int validate_every = 50;  // T_val
  AdamConfig adam{};
  int train_size = 5000;
  int val_size = 500;
  int threads = 1;
};

struct CurvePoint {
  std::string stage;
  std::int64_t update = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
  double wall_ms = 0.0;
};

struct StageResult {
  ValueNetwork expert;   // best-on-validation snapshot
  ValueNetwork running;  // parameters after the last update
  double best_val_mse = 0.0;
  std::int64_t updates = 0;
  std::vector<CurvePoint> curve;
};

/// Mini-batch MSE training with Adam. The initial parameters are evaluated on
/// the validation set first; afterwards every `validate_every` updates (and
/// after the final update) a snapshot is kept iff validation MSE improved.
StageResult train_stage(const StageKey& stage, const StageDataset& data, const ValueNetwork& init,
                        const TrainConfig& cfg, std::uint64_t seed);

struct StageLog {
  StageKey stage;
  double final_train_mse = 0.0;
  double best_val_mse = 0.0;
  std::int64_t updates = 0;
  double dataset_ms = 0.0;
  double train_ms = 0.0;
};

struct CurriculumResult {
  ExpertList experts;
  ValueNetwork running;
  std::vector<StageLog> logs;
  std::vector<CurvePoint> curve;
};

using StageCallback = std::function<void(const StageLog&, const ExpertList&)>;

/// Bottom-up curriculum. Stage j warm-starts from the running parameters left
/// by stage j-1 and uses seed derive_seed(seed, "stage", j). Stages already in
/// `resume` are kept as-is; the running parameters restart from the last of them.
CurriculumResult run_curriculum(const DistributionConfig& dist, const ModelConfig& model,
                                const TrainConfig& train, std::uint64_t seed,
                                const ExpertList* resume = nullptr,
                                const StageCallback& on_stage = {});

}  // namespace mbc
