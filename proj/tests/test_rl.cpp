#include <doctest.h>

#include <cmath>

#include "mbc/oracle.hpp"
#include "mbc/rl.hpp"
#include "support.hpp"

using namespace mbc;

namespace {

GameState p3(Budgets b, NodeSet attacked = {}) { return make_state(Graph::path(3), b, std::move(attacked)); }

ModelConfig tiny_model(int max_nodes) {
  ModelConfig m = ModelConfig::desk(max_nodes);
  m.embed_dim = 8;
  m.hidden_dim = 16;
  m.head_dim = 4;
  m.attention_blocks = 1;
  m.heads = 1;
  m.pool_replicas = 1;
  m.dropout = 0.0;
  return m;
}

DistributionConfig small_dist() {
  DistributionConfig d;
  d.nodes = {4, 6};
  d.density_min = 0.2;
  d.density_max = 0.5;
  d.omega = {0, 1};
  d.phi = {1, 1};
  d.lambda = {0, 1};
  return d;
}

/// Exact Q-values: reward plus the optimal value of the afterstate.
std::map<NodeId, double> exact_q(const GameState& s) {
  std::map<NodeId, double> q;
  for (auto [v, val] : minimax_value(s).action_values) q[v] = static_cast<double>(val);
  return q;
}

}  // namespace

TEST_CASE("epsilon schedule") {
  const EpsilonSchedule e;
  CHECK(e.at(0) == doctest::Approx(0.9));
  CHECK(e.at(1000) == doctest::Approx(0.05 + 0.85 / std::exp(1.0)));
  CHECK(e.at(1000) == doctest::Approx(0.3627).epsilon(1e-3));
  double prev = e.at(0);
  for (std::int64_t t = 1; t < 20000; t += 37) {
    const double cur = e.at(t);
    CHECK(cur <= prev);
    CHECK(cur >= 0.05);
    prev = cur;
  }
  CHECK(e.at(100000) == doctest::Approx(0.05));
  CHECK_THROWS_AS(e.at(-1), std::invalid_argument);
}

TEST_CASE("replay memory is a FIFO with fixed capacity") {
  CHECK_THROWS_AS(ReplayMemory<int>(0), std::invalid_argument);
  ReplayMemory<int> m(4);
  for (int i = 0; i < 4; ++i) m.push(i);
  CHECK(m.size() == 4);
  CHECK(m[0] == 0);
  for (int j = 1; j <= 6; ++j) {
    m.push(3 + j);
    CHECK(m.size() == 4);
    // After C + j pushes the oldest j records are gone.
    for (std::size_t i = 0; i < 4; ++i) CHECK(m[i] == static_cast<int>(i) + j);
  }
  CHECK(m.pushed() == 10);

  Rng rng(3);
  for (int x : m.sample(rng, 50)) {
    CHECK(x >= 6);
    CHECK(x <= 9);
  }
}

TEST_CASE("dqn_target") {
  SUBCASE("terminal next state adds the terminal score") {
    const GameState s = make_state(Graph::path(1), {0, 0, 1}, {});
    const DqnTransition t{s, 0, 1.0, next_state(s, Action{0}).state};
    CHECK(dqn_target(t, [](const GameState&) -> std::map<NodeId, double> { throw std::logic_error("unused"); }) == 1.0);
    // Transition into a terminal state with nothing left: target equals r.
    const GameState a = make_state(Graph::path(2), {0, 1, 0});
    const DqnTransition ta{a, 0, 3.0, next_state(a, Action{0}).state};
    CHECK(dqn_target(ta, [](const GameState&) { return std::map<NodeId, double>{}; }) == 3.0);
  }
  SUBCASE("attacker minimizes, defender maximizes") {
    const QFunction q = [](const GameState&) { return std::map<NodeId, double>{{0, 2.0}, {1, 5.0}}; };
    const GameState att = make_state(Graph::path(3), {1, 1, 0});
    const DqnTransition to_attack{att, 2, 1.0, next_state(att, Action{2}).state};
    CHECK(dqn_target(to_attack, q) == 3.0);
    const GameState def = make_state(Graph::path(3), {2, 1, 0});
    const DqnTransition to_defend{def, 2, 0.0, next_state(def, Action{2}).state};
    CHECK(dqn_target(to_defend, q) == 5.0);
  }
  SUBCASE("exact Q makes the target the one-step optimal backup") {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
      const GameState s = testing::random_variant_state(rng, t % 3, 1, 7, 2, 4);
      if (is_terminal(s) || legal_actions(s).empty()) continue;
      const auto values = minimax_value(s).action_values;
      for (auto [v, val] : values) {
        const Transition tr = next_state(s, Action{v});
        CHECK(dqn_target({s, v, static_cast<double>(tr.reward), tr.state}, exact_q) == static_cast<double>(val));
      }
    }
  }
}

TEST_CASE("mc_backup") {
  CHECK(mc_backup({1, 0, 2}, 0) == std::vector<double>{3, 2, 2});
  CHECK(mc_backup({}, 5) == std::vector<double>{5});
  CHECK(mc_backup({0, 0}, 4) == std::vector<double>{4, 4});

  Rng rng(7);
  for (int t = 0; t < 300; ++t) {
    GameState s = testing::random_variant_state(rng, t % 3, 1, 8, 3, 7);
    std::vector<GameState> states;
    std::vector<double> rewards;
    std::vector<Action> actions;
    while (!is_terminal(s)) {
      const NodeSet legal = legal_actions(s);
      const Action a = legal.empty() ? Action::skip() : Action{legal[uniform_int(rng, 0, static_cast<int>(legal.size()) - 1)]};
      const Transition tr = next_state(s, a);
      states.push_back(s);
      actions.push_back(a);
      rewards.push_back(static_cast<double>(tr.reward));
      s = tr.state;
    }
    const auto y = mc_backup(rewards, static_cast<double>(terminal_score(s)));
    for (std::size_t i = 0; i < states.size(); ++i) {
      const std::vector<Action> suffix(actions.begin() + static_cast<std::ptrdiff_t>(i), actions.end());
      CHECK(y[i] == static_cast<double>(replay_value(states[i], suffix)));
    }
  }
}

TEST_CASE("epsilon_greedy") {
  Rng rng(9);
  const NodeSet legal{2, 4, 6, 8};
  std::map<NodeId, int> freq;
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++freq[epsilon_greedy(legal, 1.0, rng, [] { return NodeId{2}; })];
  const double p = 0.25, sd = std::sqrt(n * p * (1 - p));
  for (NodeId v : legal) CHECK(std::abs(freq[v] - n * p) < 4 * sd);

  int greedy_calls = 0;
  for (int i = 0; i < 100; ++i) {
    CHECK(epsilon_greedy(legal, 0.0, rng, [&] {
            ++greedy_calls;
            return NodeId{6};
          }) == 6);
  }
  CHECK(greedy_calls == 100);
  CHECK_THROWS_AS(epsilon_greedy({}, 0.5, rng, [] { return NodeId{0}; }), std::invalid_argument);
}

TEST_CASE("MC epochs see every sample exactly k times") {
  for (int k : {1, 3, 5}) {
    const int batch = 4;
    ReplayMemory<int> memory(static_cast<std::size_t>(k * batch));
    EpochTrigger trigger(batch);
    std::map<int, int> seen;
    const int pushes = 200;
    for (int i = 0; i < pushes; ++i) {
      memory.push(i);
      if (trigger.on_push())
        for (std::size_t j = 0; j < memory.size(); ++j) ++seen[memory[j]];
    }
    // Samples pushed at least k*batch before the end have completed their stay.
    for (int i = 0; i + k * batch <= pushes; ++i) CHECK(seen[i] == k);
  }
}

TEST_CASE("DQN trainer") {
  RlConfig cfg;
  cfg.episodes = 6;
  cfg.batch = 4;
  cfg.target_sync = 5;
  cfg.seed = 13;
  const auto dist = small_dist();
  const RlResult a = multil_dqn_train(cfg, dist, tiny_model(6));
  CHECK(a.episodes == 6);
  CHECK(a.updates == static_cast<std::int64_t>(a.curve.size()));
  CHECK(a.updates > 0);
  CHECK(a.net.config.head == HeadKind::Q);
  for (const auto& p : a.curve) CHECK(std::isfinite(p.loss));
  CHECK(multil_dqn_train(cfg, dist, tiny_model(6)).net == a.net);

  cfg.max_updates = 3;
  CHECK(multil_dqn_train(cfg, dist, tiny_model(6)).updates == 3);

  SUBCASE("one episode of budget (1,1,1) gives one update per transition") {
    const GameState s = make_state(Graph::path(4), {1, 1, 1});
    RlConfig one;
    one.episodes = 1;
    one.batch = 2;
    one.fixed_instance = &s;
    const RlResult r = multil_dqn_train(one, dist, tiny_model(4));
    CHECK(r.updates == 3);
    CHECK(r.episodes == 1);
  }
}

TEST_CASE("MC trainer") {
  RlConfig cfg;
  cfg.episodes = 12;
  cfg.batch = 4;
  cfg.memory_multiplier = 2;
  cfg.seed = 17;
  const auto dist = small_dist();
  const RlResult a = multil_mc_train(cfg, dist, tiny_model(6));
  CHECK(a.episodes == 12);
  CHECK(a.net.config.head == HeadKind::Value);
  CHECK(a.updates > 0);
  CHECK(multil_mc_train(cfg, dist, tiny_model(6)).net == a.net);
  cfg.max_updates = 2;
  CHECK(multil_mc_train(cfg, dist, tiny_model(6)).updates == 2);
}

TEST_CASE("RL overfits a single fixed instance") {
  // n = 4, budgets (0,1,1): every episode is drawn from the same state.
  const GameState s = make_state(Graph({0, 1, 2, 3}, {1, 2, 3, 4}, {{0, 1}, {1, 2}, {2, 3}}, false), {0, 1, 1});
  const double v_star = static_cast<double>(minimax_value(s).value);
  ModelConfig model = ModelConfig::desk(4);
  model.dropout = 0.0;

  SUBCASE("MC recovers the optimal value") {
    RlConfig cfg;
    cfg.episodes = 600;
    cfg.batch = 8;
    cfg.adam.lr = 1e-3;
    cfg.epsilon = {0.9, 0.05, 300};
    cfg.fixed_instance = &s;
    const RlResult r = multil_mc_train(cfg, small_dist(), model);
    CHECK(greedy_policy_value(s, NetworkValuer(r.net)).value == v_star);
  }
  SUBCASE("DQN recovers the optimal value") {
    RlConfig cfg;
    cfg.episodes = 800;
    cfg.batch = 8;
    cfg.target_sync = 20;
    cfg.capacity = 256;
    cfg.adam.lr = 1e-3;
    cfg.epsilon = {0.9, 0.05, 300};
    cfg.fixed_instance = &s;
    const RlResult r = multil_dqn_train(cfg, small_dist(), model);
    CHECK(q_policy_value(s, r.net).value == v_star);
  }
}
