#include <doctest.h>

#include "mbc/game.hpp"
#include "support.hpp"

using namespace mbc;

namespace {

GameState p3(Budgets b, NodeSet attacked = {}) { return make_state(Graph::path(3), b, std::move(attacked)); }

/// Independent S(G, D, I, P): removal, closure-based cascade, sum.
Weight reference_score(const Graph& g, const MoveSets& m) {
  std::uint32_t alive = (1u << g.size()) - 1;
  Weight s = 0;
  for (NodeId v : m.vaccinated) {
    alive &= ~(1u << g.index_of(v));
    s += g.weight(v);
  }
  for (NodeId v : m.protected_) {
    alive &= ~(1u << g.index_of(v));
    s += g.weight(v);
  }
  std::uint32_t infected_src = 0;
  for (NodeId v : m.attacked) infected_src |= 1u << g.index_of(v);
  const auto infected = testing::closure_reach(testing::dense_adjacency(g), alive, infected_src);
  for (int i = 0; i < g.size(); ++i)
    if ((alive >> i & 1) && !(infected >> i & 1)) s += g.weights()[i];
  return s;
}

}  // namespace

TEST_CASE("current_player") {
  CHECK(current_player(p3({1, 1, 1})) == Player::Defender);
  CHECK(current_player(p3({0, 2, 0})) == Player::Attacker);
  CHECK(current_player(p3({0, 0, 0})) == Player::Terminal);
  CHECK(current_player(p3({0, 0, 2})) == Player::Defender);
  CHECK(is_terminal(p3({0, 0, 0})));
}

TEST_CASE("legal_actions") {
  CHECK(legal_actions(p3({1, 1, 0})) == NodeSet{0, 1, 2});
  CHECK(legal_actions(make_state(Graph::path(1), {0, 0, 1}, {0})).empty());
  CHECK(legal_actions(p3({0, 1, 0}, {1})) == NodeSet{0, 2});
  CHECK(legal_actions(p3({0, 0, 1}, {1})) == NodeSet{0, 2});
  CHECK(legal_actions(p3({0, 0, 0})).empty());
}

TEST_CASE("next_state") {
  SUBCASE("vaccination removes the node and pays its weight") {
    const Transition t = next_state(p3({1, 1, 0}), Action{1});
    CHECK(t.state.graph.nodes() == std::vector<NodeId>{0, 2});
    CHECK(t.state.graph.arcs().empty());
    CHECK(t.state.budgets == Budgets{0, 1, 0});
    CHECK(t.reward == 1);
  }
  SUBCASE("attack marks the node at no reward") {
    const Transition t = next_state(p3({0, 1, 0}), Action{0});
    CHECK(t.state.attacked == NodeSet{0});
    CHECK(t.state.budgets == Budgets{0, 0, 0});
    CHECK(t.reward == 0);
  }
  SUBCASE("protection pays the weight") {
    const GameState s = make_state(Graph({0, 1}, {4, 7}, {}, false), {0, 0, 1}, {0});
    const Transition t = next_state(s, Action{1});
    CHECK(t.reward == 7);
    CHECK(t.state.graph.nodes() == std::vector<NodeId>{0});
  }
  SUBCASE("skip forfeits the phase") {
    const Transition t = next_state(make_state(Graph::path(1), {0, 0, 1}, {0}), Action::skip());
    CHECK(t.state.budgets == Budgets{0, 0, 0});
    CHECK(t.reward == 0);
    // Attack phase on a fully attacked graph forfeits Phi and keeps Lambda.
    const Transition u = next_state(make_state(Graph::path(1), {0, 2, 1}, {0}), Action::skip());
    CHECK(u.state.budgets == Budgets{0, 0, 1});
  }
  SUBCASE("contract violations") {
    CHECK_THROWS_AS(next_state(p3({0, 1, 0}, {1}), Action{1}), std::invalid_argument);
    CHECK_THROWS_AS(next_state(p3({1, 0, 0}), Action{7}), std::invalid_argument);
    CHECK_THROWS_AS(next_state(p3({1, 0, 0}), Action::skip()), std::invalid_argument);
    CHECK_THROWS_AS(next_state(p3({0, 0, 0}), Action{0}), std::invalid_argument);
  }
}

TEST_CASE("terminal_score") {
  CHECK(terminal_score(p3({0, 0, 0})) == 3);
  CHECK(terminal_score(p3({0, 0, 0}, {1})) == 0);
  CHECK(terminal_score(make_state(Graph::path(3, true), {0, 0, 0}, {2})) == 2);
}

TEST_CASE("score_full_game") {
  const Graph g = Graph::path(3);
  CHECK(score_full_game(g, {{1}, {0}, {}}) == 2);
  CHECK(score_full_game(g, {{}, {}, {}}) == 3);
  CHECK(score_full_game(g, {{}, {1}, {0}}) == 1);
  CHECK_THROWS_AS(score_full_game(g, {{1}, {1}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(score_full_game(g, {{}, {1}, {1}}), std::invalid_argument);
  CHECK_THROWS_AS(score_full_game(g, {{0}, {}, {0}}), std::invalid_argument);
}

TEST_CASE("score_full_game agrees with an independent evaluator") {
  Rng rng(21);
  for (int t = 0; t < 500; ++t) {
    const Graph g = testing::random_small_graph(rng, uniform_int(rng, 1, 9), 0.3, t % 3 == 0, 4);
    MoveSets m;
    for (NodeId v : g.nodes()) {
      switch (uniform_int(rng, 0, 4)) {
        case 0: m.vaccinated.push_back(v); break;
        case 1: m.attacked.push_back(v); break;
        case 2: m.protected_.push_back(v); break;
        default: break;
      }
    }
    CHECK(score_full_game(g, m) == reference_score(g, m));
  }
}

TEST_CASE("episode properties: budget decrease, termination, bounds, antitone score") {
  Rng rng(4);
  for (int t = 0; t < 500; ++t) {
    GameState s = testing::random_variant_state(rng, t % 3, 1, 8, 3, 9);
    const Weight total = s.graph.total_weight();
    const int start_budget = s.budgets.total();
    int steps = 0;
    while (!is_terminal(s)) {
      const NodeSet legal = legal_actions(s);
      const Action a = legal.empty() ? Action::skip() : Action{legal[uniform_int(rng, 0, static_cast<int>(legal.size()) - 1)]};
      const Transition tr = next_state(s, a);
      if (!a.is_skip()) CHECK(tr.state.budgets.total() == s.budgets.total() - 1);
      s = tr.state;
      ++steps;
      CHECK(terminal_score(s) >= 0);
      CHECK(terminal_score(s) <= total);
    }
    CHECK(steps <= start_budget);

    NodeSet more = s.attacked;
    for (NodeId v : s.graph.nodes())
      if (uniform_int(rng, 0, 2) == 0) more.push_back(v);
    CHECK(terminal_score(make_state(s.graph, s.budgets, more)) <= terminal_score(s));
  }
}

TEST_CASE("telescoping identity on random episodes") {
  Rng rng(8);
  for (int t = 0; t < 2000; ++t) {
    const GameState s0 = testing::random_variant_state(rng, t % 3, 1, 9, 3, 9);
    GameState s = s0;
    MoveSets moves;
    Weight rewards = 0;
    while (!is_terminal(s)) {
      const NodeSet legal = legal_actions(s);
      const Action a = legal.empty() ? Action::skip() : Action{legal[uniform_int(rng, 0, static_cast<int>(legal.size()) - 1)]};
      record_move(moves, s, a);
      const Transition tr = next_state(s, a);
      rewards += tr.reward;
      s = tr.state;
    }
    CHECK(rewards + terminal_score(s) == score_full_game(s0.graph, moves));
  }
}

TEST_CASE("stage keys") {
  CHECK(StageKey{Phase::Attack, 2}.label() == "A2");
  CHECK(StageKey::parse("V3") == StageKey{Phase::Vaccination, 3});
  CHECK_THROWS_AS(StageKey::parse("X1"), std::invalid_argument);
  CHECK_THROWS_AS(StageKey::parse("P0"), std::invalid_argument);
  CHECK(StageKey{Phase::Protection, 3} < StageKey{Phase::Attack, 1});
  CHECK(stage_of(p3({1, 1, 1})) == StageKey{Phase::Vaccination, 1});
  CHECK(stage_of(p3({0, 2, 1})) == StageKey{Phase::Attack, 2});
  CHECK_FALSE(stage_of(p3({0, 0, 0})).has_value());
}
