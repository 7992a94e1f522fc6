#include "mbc/rl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mbc {

double EpsilonSchedule::at(std::int64_t t) const {
  if (t < 0) throw std::invalid_argument("epsilon schedule: t must be >= 0");
  return end + (start - end) * std::exp(-static_cast<double>(t) / decay);
}

NodeId epsilon_greedy(const NodeSet& legal, double eps, Rng& rng,
                      const std::function<NodeId()>& greedy) {
  if (legal.empty()) throw std::invalid_argument("epsilon_greedy: no legal action");
  if (uniform_real(rng) < eps) {
    return legal[uniform_int(rng, 0, static_cast<int>(legal.size()) - 1)];
  }
  return greedy();
}

namespace {

/// Applies forfeits until a move is available or the game ends.
GameState skip_forfeits(GameState s) {
  while (!is_terminal(s) && legal_actions(s).empty()) s = next_state(s, Action::skip()).state;
  return s;
}

NodeId best_q_action(const std::map<NodeId, double>& q, bool maximize) {
  NodeId best = q.begin()->first;
  double best_v = q.begin()->second;
  for (const auto& [v, val] : q) {
    if (maximize ? val > best_v : val < best_v) {
      best = v;
      best_v = val;
    }
  }
  return best;
}

ModelConfig with_head(ModelConfig cfg, HeadKind head) {
  cfg.head = head;
  return cfg;
}

GameState episode_start(const RlConfig& cfg, const DistributionConfig& dist, std::int64_t e) {
  if (cfg.fixed_instance) return *cfg.fixed_instance;
  return sample_instance(dist, derive_seed(cfg.seed, "episode", static_cast<std::uint64_t>(e)));
}

bool update_cap_reached(const RlConfig& cfg, std::int64_t updates) {
  return cfg.max_updates >= 0 && updates >= cfg.max_updates;
}

}  // namespace

double dqn_target(const DqnTransition& t, const QFunction& target_q) {
  const GameState next = skip_forfeits(t.next);
  if (is_terminal(next)) return t.reward + static_cast<double>(terminal_score(next));
  const auto q = target_q(next);
  const bool maximize = current_player(next) == Player::Defender;
  double best = maximize ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  for (const auto& [v, val] : q) best = maximize ? std::max(best, val) : std::min(best, val);
  return t.reward + best;
}

double dqn_target(const DqnTransition& t, const ValueNetwork& target_net) {
  return dqn_target(t, [&](const GameState& s) { return q_forward(s, target_net); });
}

std::vector<double> mc_backup(const std::vector<double>& rewards, double terminal) {
  if (rewards.empty()) return {terminal};
  std::vector<double> targets(rewards.size());
  double acc = terminal;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc += rewards[i];
    targets[i] = acc;
  }
  return targets;
}

PolicyOutcome q_policy_value(const GameState& s, const ValueNetwork& q_net) {
  PolicyOutcome out;
  GameState cur = s;
  Weight rewards = 0;
  while (!is_terminal(cur)) {
    if (legal_actions(cur).empty()) {
      out.actions.push_back(Action::skip());
      cur = next_state(cur, Action::skip()).state;
      continue;
    }
    const Action a{best_q_action(q_forward(cur, q_net), current_player(cur) == Player::Defender)};
    Transition t = next_state(cur, a);
    out.actions.push_back(a);
    rewards += t.reward;
    cur = std::move(t.state);
  }
  out.value = static_cast<double>(rewards + terminal_score(cur));
  return out;
}

RlResult multil_dqn_train(const RlConfig& cfg, const DistributionConfig& dist,
                          const ModelConfig& model) {
  if (cfg.batch < 1 || cfg.target_sync < 1 || cfg.episodes_per_step < 1) {
    throw std::invalid_argument("dqn: batch, target_sync and episodes_per_step must be >= 1");
  }
  RlResult result;
  result.net = init_network(with_head(model, HeadKind::Q), derive_seed(cfg.seed, "init"));
  ValueNetwork target = result.net;
  AdamState adam(result.net.params.size());
  ReplayMemory<DqnTransition> memory(static_cast<std::size_t>(cfg.capacity));
  Rng rng(derive_seed(cfg.seed, "dqn"));

  std::vector<std::optional<GameState>> envs(cfg.episodes_per_step);
  std::int64_t started = 0;
  std::int64_t step = 0;
  while (!update_cap_reached(cfg, result.updates)) {
    bool any_active = false;
    int pushed = 0;
    for (auto& env : envs) {
      if (env) *env = skip_forfeits(*env);
      if (env && is_terminal(*env)) {
        env.reset();
        ++result.episodes;
      }
      if (!env && started < cfg.episodes) env = skip_forfeits(episode_start(cfg, dist, started++));
      if (!env || is_terminal(*env)) continue;
      any_active = true;

      const GameState& s = *env;
      const bool maximize = current_player(s) == Player::Defender;
      const NodeId a = epsilon_greedy(legal_actions(s), cfg.epsilon.at(step), rng, [&] {
        return best_q_action(q_forward(s, result.net), maximize);
      });
      ++step;
      Transition t = next_state(s, Action{a});
      memory.push(DqnTransition{s, a, static_cast<double>(t.reward), t.state});
      env = std::move(t.state);
      ++pushed;
    }
    if (!any_active) break;
    if (pushed == 0) continue;

    const auto drawn = memory.sample(rng, cfg.batch);
    std::vector<QSample> batch;
    batch.reserve(drawn.size());
    for (const auto& tr : drawn) batch.push_back({tr.state, tr.action, dqn_target(tr, target)});
    const auto lg = q_loss_and_gradient(result.net, batch, Mode::Train,
                                        derive_seed(cfg.seed, "update", result.updates), cfg.threads);
    adam_step(result.net.params, lg.gradient, adam, cfg.adam);
    ++result.updates;
    if (result.updates % cfg.target_sync == 0) target = result.net;
    result.curve.push_back({result.updates, lg.loss, cfg.epsilon.at(step), result.episodes});
  }
  for (auto& env : envs) {
    if (env && is_terminal(skip_forfeits(*env))) ++result.episodes;
  }
  return result;
}

RlResult multil_mc_train(const RlConfig& cfg, const DistributionConfig& dist,
                         const ModelConfig& model) {
  if (cfg.batch < 1 || cfg.memory_multiplier < 1) {
    throw std::invalid_argument("mc: batch and memory_multiplier must be >= 1");
  }
  RlResult result;
  result.net = init_network(with_head(model, HeadKind::Value), derive_seed(cfg.seed, "init"));
  AdamState adam(result.net.params.size());
  ReplayMemory<ValueSample> memory(static_cast<std::size_t>(cfg.memory_multiplier) * cfg.batch);
  EpochTrigger trigger(cfg.batch);
  Rng rng(derive_seed(cfg.seed, "mc"));
  std::int64_t step = 0;

  auto run_epoch = [&] {
    std::vector<std::size_t> order(memory.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<ValueSample> batch;
    for (std::size_t b = 0; b < order.size() && !update_cap_reached(cfg, result.updates);
         b += cfg.batch) {
      batch.clear();
      for (std::size_t i = b; i < std::min(order.size(), b + cfg.batch); ++i) {
        batch.push_back(memory[order[i]]);
      }
      const auto lg = loss_and_gradient(result.net, batch, Mode::Train,
                                        derive_seed(cfg.seed, "update", result.updates), cfg.threads);
      adam_step(result.net.params, lg.gradient, adam, cfg.adam);
      ++result.updates;
      result.curve.push_back({result.updates, lg.loss, cfg.epsilon.at(step), result.episodes});
    }
  };

  for (std::int64_t e = 0; e < cfg.episodes && !update_cap_reached(cfg, result.updates); ++e) {
    GameState s = episode_start(cfg, dist, e);
    std::vector<GameState> states;
    std::vector<double> rewards;
    const NetworkValuer valuer(result.net);
    while (!is_terminal(s)) {
      const NodeSet legal = legal_actions(s);
      Action a = Action::skip();
      if (!legal.empty()) {
        const bool maximize = current_player(s) == Player::Defender;
        a = Action{epsilon_greedy(legal, cfg.epsilon.at(step), rng, [&] {
          NodeId best = legal.front();
          double best_score = 0.0;
          bool first = true;
          for (NodeId v : legal) {
            const Transition t = next_state(s, Action{v});
            const double score = static_cast<double>(t.reward) + valuer.value(t.state);
            if (first || (maximize ? score > best_score : score < best_score)) {
              best = v;
              best_score = score;
              first = false;
            }
          }
          return best;
        })};
        ++step;
      }
      Transition t = next_state(s, a);
      states.push_back(std::move(s));
      rewards.push_back(static_cast<double>(t.reward));
      s = std::move(t.state);
    }
    ++result.episodes;
    if (states.empty()) continue;
    const auto targets = mc_backup(rewards, static_cast<double>(terminal_score(s)));
    for (std::size_t t = 0; t < states.size(); ++t) {
      memory.push(ValueSample{std::move(states[t]), targets[t]});
      if (trigger.on_push()) run_epoch();
    }
  }
  return result;
}

}  // namespace mbc
