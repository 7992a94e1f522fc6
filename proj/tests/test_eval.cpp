#include <doctest.h>

#include <set>

#include "mbc/eval.hpp"
#include "mbc/oracle.hpp"
#include "support.hpp"

using namespace mbc;

namespace {

std::vector<SolvedInstance> solved_family(std::uint64_t seed, int count) {
  Rng rng(seed);
  std::vector<SolvedInstance> out;
  for (int i = 0; i < count; ++i) {
    const GameState s = testing::random_variant_state(rng, i % 3, 3, 7, 1, 3);
    out.push_back({"t" + std::to_string(i), s, exact_value(s)});
  }
  return out;
}

/// A policy that always fails, to exercise error reporting.
class FailingPolicy : public Policy {
 public:
  std::string name() const override { return "failing"; }
  double play(const GameState&, std::uint64_t) const override { throw std::runtime_error("boom"); }
};

}  // namespace

TEST_CASE("compute_metrics") {
  const std::vector<std::pair<double, double>> a{{2, 2}, {4, 3}};
  const MetricsReport r = compute_metrics(a);
  CHECK(r.eta == doctest::Approx(0.125));
  CHECK(r.zeta == doctest::Approx((1 + 4.0 / 3) / 2));
  CHECK(r.n_instances == 2);
  CHECK(r.n_excluded == 0);

  const std::vector<std::pair<double, double>> same{{1, 1}, {5, 5}, {0, 0}};
  const MetricsReport e = compute_metrics(same);
  CHECK(e.eta == 0.0);
  CHECK(e.zeta == 1.0);
  CHECK(e.n_excluded == 1);
  CHECK(e.n_excluded_zeta == 0);

  const std::vector<std::pair<double, double>> one_zero{{0, 2}, {4, 0}, {2, 1}};
  const MetricsReport z = compute_metrics(one_zero);
  CHECK(z.n_excluded == 1);
  CHECK(z.n_excluded_zeta == 2);
  CHECK(z.eta == doctest::Approx((1.0 + 0.5) / 2));
  CHECK(z.zeta == doctest::Approx(2.0));

  const std::vector<std::pair<double, double>> all_zero{{0, 0}, {0, 3}};
  CHECK_THROWS_AS(compute_metrics(all_zero), std::invalid_argument);
  CHECK_THROWS_AS(compute_metrics({}), std::invalid_argument);

  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 5; ++i) pairs.emplace_back(uniform_int(rng, 1, 9), uniform_int(rng, 0, 9));
    const MetricsReport m = compute_metrics(pairs);
    CHECK(m.eta >= 0.0);
    CHECK(m.zeta >= 1.0);
  }
}

TEST_CASE("evaluate_policy") {
  const auto data = solved_family(3, 40);

  SUBCASE("the oracle is a fixed point") {
    const MetricsReport r = evaluate_policy(data, OraclePolicy{}, 0);
    CHECK(r.eta == 0.0);
    CHECK(r.zeta == 1.0);
    CHECK(r.n_instances == 40);
    CHECK(r.mean_time_s >= 0.0);
  }
  SUBCASE("random policy is deterministic and thread-independent") {
    const MetricsReport a = evaluate_policy(data, RandomPolicy(10), 7);
    const MetricsReport b = evaluate_policy(data, RandomPolicy(10), 7, 3);
    CHECK(a.eta == b.eta);
    CHECK(a.zeta == b.zeta);
    CHECK(a.eta >= 0.0);
  }
  SUBCASE("an all-zero dataset takes the exclusion error path") {
    std::vector<SolvedInstance> zeros;
    for (int i = 0; i < 5; ++i) {
      const GameState s = make_state(Graph::path(2), {0, 1, 0}, {});
      zeros.push_back({"z" + std::to_string(i), s, exact_value(s)});
      CHECK(zeros.back().exact_value == 0);
    }
    CHECK_THROWS_AS(evaluate_policy(zeros, RandomPolicy(10), 1), std::invalid_argument);
  }
  SUBCASE("failures name the instance") {
    try {
      evaluate_policy(data, FailingPolicy{}, 0);
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("'t0'") != std::string::npos);
    }
  }
  SUBCASE("greedy with the oracle matches the oracle") {
    const OracleValuer oracle;
    const MetricsReport r = evaluate_policy(data, GreedyPolicy(oracle, "oracle-greedy"), 0, 2);
    CHECK(r.eta == 0.0);
    CHECK(r.zeta == 1.0);
  }
}

TEST_CASE("inspect_action_values") {
  const OracleValuer oracle;
  const GameState p3 = make_state(Graph::path(3), {1, 1, 0});
  const auto rows = inspect_action_values(p3, oracle, 0.0);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].value == 1.0);
  CHECK(rows[1].value == 2.0);
  CHECK(rows[2].value == 1.0);
  CHECK_FALSE(rows[0].optimal);
  CHECK(rows[1].optimal);
  CHECK_FALSE(rows[2].optimal);

  const GameState single = make_state(Graph::path(2), {0, 1, 0}, {0});
  const auto one = inspect_action_values(single, oracle, 0.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].optimal);

  CHECK_THROWS_AS(inspect_action_values(make_state(Graph::path(2), {0, 0, 0}), oracle, 0.0),
                  std::invalid_argument);

  SUBCASE("optimal flags follow a relabeling") {
    Rng rng(4);
    for (int t = 0; t < 60; ++t) {
      const GameState s = testing::random_variant_state(rng, t % 3, 1, 7, 2, 3);
      if (is_terminal(s)) continue;
      const auto m = testing::random_relabeling(rng, s.graph);
      const GameState r = testing::relabel_state(s, m);
      std::map<NodeId, NodeId> to(m.begin(), m.end());
      std::set<NodeId> mapped, flagged;
      for (const auto& row : inspect_action_values(s, oracle, 0.0))
        if (row.optimal) mapped.insert(to.at(row.node));
      for (const auto& row : inspect_action_values(r, oracle, 0.0))
        if (row.optimal) flagged.insert(row.node);
      CHECK(mapped == flagged);
    }
  }
  SUBCASE("flags agree with the oracle's own action values") {
    Rng rng(6);
    for (int t = 0; t < 60; ++t) {
      const GameState s = testing::random_variant_state(rng, t % 3, 1, 7, 2, 3);
      if (is_terminal(s) || legal_actions(s).empty()) continue;
      const OracleResult o = minimax_value(s);
      for (const auto& row : inspect_action_values(s, oracle, 0.0)) {
        CHECK(row.value == static_cast<double>(o.action_values.at(row.node)));
        CHECK(row.optimal == (o.action_values.at(row.node) == o.value));
      }
    }
  }
}
