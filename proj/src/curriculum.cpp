#include "mbc/curriculum.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

#include "mbc/oracle.hpp"
#include "mbc/parallel.hpp"
#include "mbc/rng.hpp"

namespace mbc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

DistributionConfig DistributionConfig::preset(const std::string& name) {
  DistributionConfig cfg;
  std::string base = name;
  bool weighted = false;
  if (base.ends_with("_w")) {
    weighted = true;
    base.resize(base.size() - 2);
  } else if (base.ends_with("_dir")) {
    cfg.directed = true;
    base.resize(base.size() - 4);
  }
  if (base == "D1") {
    cfg.nodes = {10, 23};
    cfg.density_min = 0.1;
    cfg.density_max = 0.2;
  } else if (base == "D2") {
    cfg.nodes = {20, 60};
    cfg.density_min = 0.05;
    cfg.density_max = 0.15;
  } else if (base == "desk") {
    cfg.nodes = {8, 12};
    cfg.density_min = 0.15;
    cfg.density_max = 0.3;
    cfg.omega = {0, 1};
    cfg.phi = {1, 1};
    cfg.lambda = {0, 1};
  } else {
    throw std::invalid_argument("unknown distribution preset '" + name + "'");
  }
  if (weighted) cfg.weights = {1, 5};
  return cfg;
}

void DistributionConfig::validate() const {
  auto check = [](IntRange r, int min_lo, const char* what) {
    if (r.lo < min_lo || r.lo > r.hi) {
      throw std::invalid_argument(std::string("distribution: invalid ") + what + " range");
    }
  };
  check(nodes, 1, "node");
  check(weights, 1, "weight");
  check(omega, 0, "omega");
  check(phi, 0, "phi");
  check(lambda, 0, "lambda");
  if (!(0.0 <= density_min && density_min <= density_max && density_max <= 1.0)) {
    throw std::invalid_argument("distribution: invalid density range");
  }
}

GameState sample_instance(const DistributionConfig& cfg, std::uint64_t seed, Budgets min_budgets) {
  cfg.validate();
  Rng rng(seed);
  auto draw = [&](IntRange r, int floor) {
    const int lo = std::max(r.lo, floor);
    if (lo > r.hi) throw std::invalid_argument("sample_instance: budget floor above range");
    return uniform_int(rng, lo, r.hi);
  };
  GraphGenParams gp;
  gp.n = uniform_int(rng, cfg.nodes.lo, cfg.nodes.hi);
  gp.density_min = cfg.density_min;
  gp.density_max = cfg.density_max;
  gp.directed = cfg.directed;
  gp.weight_min = cfg.weights.lo;
  gp.weight_max = cfg.weights.hi;
  Budgets b;
  b.omega = draw(cfg.omega, min_budgets.omega);
  b.phi = draw(cfg.phi, min_budgets.phi);
  b.lambda = draw(cfg.lambda, min_budgets.lambda);
  const std::uint64_t graph_seed = rng();
  return make_state(generate_graph(gp, graph_seed), b);
}

void ExpertList::add(const StageKey& stage, ValueNetwork net) {
  experts_.insert_or_assign(stage, std::move(net));
}

const ValueNetwork& ExpertList::at(const StageKey& stage) const {
  auto it = experts_.find(stage);
  if (it == experts_.end()) throw std::out_of_range("no expert for stage " + stage.label());
  return it->second;
}

double ExpertList::value(const GameState& s) const {
  const auto stage = stage_of(s);
  if (!stage) return static_cast<double>(terminal_score(s));
  return value_forward(s, at(*stage)).value;
}

double OracleValuer::value(const GameState& s) const {
  return static_cast<double>(exact_value(s));
}

double NetworkValuer::value(const GameState& s) const {
  if (is_terminal(s)) return static_cast<double>(terminal_score(s));
  return value_forward(s, *net_).value;
}

std::vector<StageKey> enumerate_stages(const DistributionConfig& cfg) {
  cfg.validate();
  std::vector<StageKey> stages;
  for (int k = 1; k <= cfg.lambda.hi; ++k) stages.push_back({Phase::Protection, k});
  for (int k = 1; k <= cfg.phi.hi; ++k) stages.push_back({Phase::Attack, k});
  for (int k = 1; k <= cfg.omega.hi; ++k) stages.push_back({Phase::Vaccination, k});
  // Decisions are taken over afterstates, so the topmost stage is never valued.
  if (!stages.empty()) stages.pop_back();
  return stages;
}

GameState random_rollback(const DistributionConfig& cfg, const StageKey& target,
                          std::uint64_t seed) {
  Budgets floor;
  switch (target.phase) {
    case Phase::Protection: floor.lambda = target.remaining; break;
    case Phase::Attack: floor.phi = target.remaining; break;
    case Phase::Vaccination: floor.omega = target.remaining; break;
  }
  // A forfeited phase (empty action set) can jump past the target; redraw then.
  constexpr int kAttempts = 1000;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    GameState s = sample_instance(cfg, derive_seed(seed, "instance", attempt), floor);
    Rng rng(derive_seed(seed, "moves", attempt));
    auto stage = stage_of(s);
    while (stage && *stage > target) {
      const NodeSet legal = legal_actions(s);
      const Action a = legal.empty()
                           ? Action::skip()
                           : Action{legal[uniform_int(rng, 0, static_cast<int>(legal.size()) - 1)]};
      s = next_state(s, a).state;
      stage = stage_of(s);
    }
    if (stage && *stage == target) return s;
  }
  throw std::runtime_error("random_rollback: stage " + target.label() + " unreachable");
}

PolicyOutcome greedy_policy_value(const GameState& s, const StateValuer& valuer) {
  PolicyOutcome out;
  GameState cur = s;
  Weight rewards = 0;
  while (!is_terminal(cur)) {
    const bool maximize = current_player(cur) == Player::Defender;
    auto succ = successors(cur);
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t i = 0; i < succ.size(); ++i) {
      const GameState& after = succ[i].second.state;
      const double future = is_terminal(after) ? static_cast<double>(terminal_score(after))
                                               : valuer.value(after);
      const double score = static_cast<double>(succ[i].second.reward) + future;
      if (i == 0 || (maximize ? score > best_score : score < best_score)) {
        best = i;
        best_score = score;
      }
    }
    out.actions.push_back(succ[best].first);
    rewards += succ[best].second.reward;
    cur = std::move(succ[best].second.state);
  }
  out.value = static_cast<double>(rewards + terminal_score(cur));
  return out;
}

double greedy_rollout(const GameState& s, const StateValuer& valuer) {
  return greedy_policy_value(s, valuer).value;
}

StageDataset build_stage_dataset(const DistributionConfig& cfg, const StageKey& stage,
                                 const StateValuer& experts, int train_size, int val_size,
                                 std::uint64_t seed, int threads) {
  if (train_size < 0 || val_size < 0) throw std::invalid_argument("dataset sizes must be >= 0");
  StageDataset out;
  out.train.resize(train_size);
  out.val.resize(val_size);
  auto fill = [&](std::vector<ValueSample>& split, const char* name) {
    parallel_for(static_cast<int>(split.size()), threads, [&](int i) {
      GameState s = random_rollback(cfg, stage, derive_seed(seed, name, i));
      const double target = greedy_rollout(s, experts);
      split[i] = ValueSample{std::move(s), target};
    });
  };
  fill(out.train, "train");
  fill(out.val, "val");
  return out;
}

StageResult train_stage(const StageKey& stage, const StageDataset& data, const ValueNetwork& init,
                        const TrainConfig& cfg, std::uint64_t seed) {
  if (cfg.batch < 1 || cfg.validate_every < 1 || cfg.epochs < 0) {
    throw std::invalid_argument("train_stage: batch and validate_every must be >= 1");
  }
  const auto start = Clock::now();
  StageResult result;
  result.running = init;
  result.expert = init;
  result.best_val_mse = mean_squared_error(init, data.val, cfg.threads);
  result.curve.push_back({stage.label(), 0, 0.0, result.best_val_mse, elapsed_ms(start)});

  AdamState adam(init.params.size());
  Rng shuffle_rng(derive_seed(seed, "shuffle"));
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<ValueSample> batch;
  double train_sum = 0.0;
  int train_batches = 0;

  auto validate = [&] {
    const double val = mean_squared_error(result.running, data.val, cfg.threads);
    const double train_mse = train_batches > 0 ? train_sum / train_batches : 0.0;
    result.curve.push_back({stage.label(), result.updates, train_mse, val, elapsed_ms(start)});
    if (val < result.best_val_mse) {
      result.best_val_mse = val;
      result.expert = result.running;
    }
    train_sum = 0.0;
    train_batches = 0;
  };

  for (int epoch = 0; epoch < cfg.epochs && !order.empty(); ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t b = 0; b < order.size(); b += cfg.batch) {
      batch.clear();
      for (std::size_t i = b; i < std::min(order.size(), b + cfg.batch); ++i) {
        batch.push_back(data.train[order[i]]);
      }
      const auto lg = loss_and_gradient(result.running, batch, Mode::Train,
                                        derive_seed(seed, "update", result.updates), cfg.threads);
      adam_step(result.running.params, lg.gradient, adam, cfg.adam);
      ++result.updates;
      train_sum += lg.loss;
      ++train_batches;
      if (result.updates % cfg.validate_every == 0) validate();
    }
  }
  if (result.updates % cfg.validate_every != 0) validate();
  return result;
}

CurriculumResult run_curriculum(const DistributionConfig& dist, const ModelConfig& model,
                                const TrainConfig& train, std::uint64_t seed,
                                const ExpertList* resume, const StageCallback& on_stage) {
  CurriculumResult out;
  out.running = init_network(model, derive_seed(seed, "init"));
  const auto stages = enumerate_stages(dist);
  for (std::size_t j = 0; j < stages.size(); ++j) {
    const StageKey& stage = stages[j];
    if (resume && resume->contains(stage)) {
      if (!(resume->at(stage).config == model)) {
        throw std::invalid_argument("resume: expert " + stage.label() + " has a different model config");
      }
      out.experts.add(stage, resume->at(stage));
      out.running = resume->at(stage);
      continue;
    }
    const std::uint64_t stage_seed = derive_seed(seed, "stage", j);
    StageLog log;
    log.stage = stage;
    auto t0 = Clock::now();
    const StageDataset data = build_stage_dataset(dist, stage, out.experts, train.train_size,
                                                  train.val_size, stage_seed, train.threads);
    log.dataset_ms = elapsed_ms(t0);
    t0 = Clock::now();
    StageResult r = train_stage(stage, data, out.running, train, stage_seed);
    log.train_ms = elapsed_ms(t0);
    log.best_val_mse = r.best_val_mse;
    log.updates = r.updates;
    log.final_train_mse = r.curve.back().train_mse;
    out.curve.insert(out.curve.end(), r.curve.begin(), r.curve.end());
    out.experts.add(stage, std::move(r.expert));
    out.running = std::move(r.running);
    out.logs.push_back(log);
    if (on_stage) on_stage(log, out.experts);
  }
  return out;
}

}  // namespace mbc
