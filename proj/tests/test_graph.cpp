#include <doctest.h>

#include <cmath>

#include "mbc/graph.hpp"
#include "support.hpp"

using namespace mbc;

namespace {

NodeSet mask_to_set(const Graph& g, std::uint32_t mask) {
  NodeSet out;
  for (int i = 0; i < g.size(); ++i)
    if (mask >> i & 1) out.push_back(g.nodes()[i]);
  return out;
}

bool subset(const NodeSet& a, const NodeSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

}  // namespace

TEST_CASE("graph construction validates its invariants") {
  CHECK_THROWS_AS(Graph({0, 1}, {1, 1}, {{0, 0}}, false), std::invalid_argument);
  CHECK_THROWS_AS(Graph({0, 1}, {1, 0}, {}, false), std::invalid_argument);
  CHECK_THROWS_AS(Graph({0, 1}, {1, 1}, {{0, 2}}, false), std::invalid_argument);
  CHECK_THROWS_AS(Graph({0, 1}, {1, 1}, {{0, 1}, {1, 0}}, false), std::invalid_argument);
  CHECK_NOTHROW(Graph({0, 1}, {1, 1}, {{0, 1}, {1, 0}}, true));

  const Graph g({2, 0, 1}, {5, 3, 4}, {{2, 0}}, false);
  CHECK(g.nodes() == std::vector<NodeId>{0, 1, 2});
  CHECK(g.weights() == std::vector<Weight>{3, 4, 5});
  CHECK(g.arcs() == std::vector<Arc>{{0, 2}});
  CHECK(g.total_weight() == 12);
}

TEST_CASE("generate_graph") {
  SUBCASE("single node has no arcs") {
    for (double d : {0.0, 0.5, 1.0}) {
      const Graph g = generate_graph({1, d, d, false, 1, 1, true}, 7);
      CHECK(g.size() == 1);
      CHECK(g.arcs().empty());
    }
  }
  SUBCASE("n=10 undirected in [0.1, 0.2] gives 5..9 edges") {
    CHECK(arc_count_range(10, 0.1, 0.2, false) == std::pair<std::int64_t, std::int64_t>{5, 9});
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto m = generate_graph({10, 0.1, 0.2, false, 1, 1, true}, seed).arcs().size();
      CHECK(m >= 5);
      CHECK(m <= 9);
    }
  }
  SUBCASE("deterministic given seed") {
    const GraphGenParams p{12, 0.1, 0.4, true, 1, 5, true};
    CHECK(generate_graph(p, 42) == generate_graph(p, 42));
    CHECK_FALSE(generate_graph(p, 42) == generate_graph(p, 43));
  }
  SUBCASE("arc count within the integer interval over 1000 seeds") {
    Rng rng(5);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const int n = uniform_int(rng, 1, 25);
      const bool directed = seed % 2 == 1;
      double a = uniform_real(rng), b = uniform_real(rng);
      if (a > b) std::swap(a, b);
      const std::int64_t big_m = directed ? std::int64_t{n} * (n - 1) : std::int64_t{n} * (n - 1) / 2;
      const auto lo = static_cast<std::int64_t>(std::ceil(a * big_m - 1e-9));
      const auto hi = static_cast<std::int64_t>(std::floor(b * big_m + 1e-9));
      if (lo > hi) {
        CHECK_THROWS_AS(generate_graph({n, a, b, directed, 1, 3, true}, seed), std::invalid_argument);
        continue;
      }
      const Graph g = generate_graph({n, a, b, directed, 1, 3, true}, seed);
      const auto m = static_cast<std::int64_t>(g.arcs().size());
      CHECK(m >= lo);
      CHECK(m <= hi);
      for (Weight w : g.weights()) {
        CHECK(w >= 1);
        CHECK(w <= 3);
      }
    }
  }
  SUBCASE("empty ranges are rejected") {
    CHECK_THROWS_AS(generate_graph({0, 0.1, 0.2, false, 1, 1, true}, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_graph({5, 0.3, 0.2, false, 1, 1, true}, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_graph({5, 0.1, 0.2, false, 3, 2, true}, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_graph({5, 0.0, 0.05, false, 1, 1, false}, 1), std::invalid_argument);
  }
  SUBCASE("arc draws are roughly uniform over pairs") {
    // Each of the 10 pairs of K5 appears with probability 3/10 when 3 edges are drawn.
    std::map<Arc, int> freq;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
      const Graph g = generate_graph({5, 0.3, 0.3, false, 1, 1, true}, 1000 + t);
      for (const Arc& a : g.arcs()) ++freq[a];
    }
    CHECK(freq.size() == 10);
    const double p = 0.3;
    const double sd = std::sqrt(trials * p * (1 - p));
    for (const auto& [a, c] : freq) CHECK(std::abs(c - trials * p) < 4.5 * sd);
  }
}

TEST_CASE("remove_node") {
  const Graph p3 = Graph::path(3);
  const Graph r = remove_node(p3, 1);
  CHECK(r.nodes() == std::vector<NodeId>{0, 2});
  CHECK(r.arcs().empty());

  CHECK(remove_node(Graph::path(1), 0).empty());

  const Graph tri = Graph::unit_weight(3, {{0, 1}, {0, 2}, {1, 2}});
  CHECK(remove_node(tri, 0).arcs() == std::vector<Arc>{{1, 2}});

  CHECK_THROWS_AS(remove_node(p3, 9), std::invalid_argument);
}

TEST_CASE("reachable_from examples") {
  CHECK(reachable_from(Graph::path(3), {1}) == NodeSet{0, 1, 2});
  CHECK(reachable_from(Graph::path(3, true), {2}) == NodeSet{2});
  CHECK(reachable_from(Graph::path(3, true), {0}) == NodeSet{0, 1, 2});
  CHECK(reachable_from(Graph::path(3), {}).empty());
}

TEST_CASE("reachable_from agrees with a transitive-closure oracle and is monotone") {
  Rng rng(11);
  for (int t = 0; t < 300; ++t) {
    const bool directed = t % 2 == 0;
    const Graph g = testing::random_small_graph(rng, uniform_int(rng, 1, 9), 0.25, directed, 3);
    const std::uint32_t all = (1u << g.size()) - 1;
    const std::uint32_t s_mask = static_cast<std::uint32_t>(rng()) & all;
    const std::uint32_t bigger = s_mask | (static_cast<std::uint32_t>(rng()) & all);
    const NodeSet s = mask_to_set(g, s_mask);
    const NodeSet r = reachable_from(g, s);
    CHECK(r == mask_to_set(g, testing::closure_reach(testing::dense_adjacency(g), all, s_mask)));
    CHECK(subset(r, reachable_from(g, mask_to_set(g, bigger))));
    CHECK(reachable_from(g, r) == r);

    if (g.size() > 0) {
      const NodeId v = g.nodes()[uniform_int(rng, 0, g.size() - 1)];
      NodeSet s2;
      for (NodeId x : s)
        if (x != v) s2.push_back(x);
      NodeSet r_minus;
      for (NodeId x : r)
        if (x != v) r_minus.push_back(x);
      CHECK(subset(reachable_from(remove_node(g, v), s2), r_minus));
    }
  }
}

TEST_CASE("local_degree_profile") {
  const auto p3 = local_degree_profile(Graph::path(3));
  CHECK(p3[1] == DegreeProfile{2, 1, 1, 1, 0});
  CHECK(p3[0] == DegreeProfile{1, 2, 2, 2, 0});
  CHECK(local_degree_profile(Graph::path(1))[0] == DegreeProfile{0, 0, 0, 0, 0});

  SUBCASE("star center with mixed neighbor degrees") {
    // Edges 0-1, 0-2, 0-3, 1-2: neighbors of 0 have degrees 2, 2, 1.
    const auto ldp = local_degree_profile(Graph::unit_weight(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}}));
    CHECK(ldp[0][0] == 3);
    CHECK(ldp[0][1] == 1);
    CHECK(ldp[0][2] == 2);
    CHECK(ldp[0][3] == doctest::Approx(5.0 / 3));
    CHECK(ldp[0][4] == doctest::Approx(std::sqrt(2.0 / 9)));
  }
  SUBCASE("directed degree counts both directions") {
    const auto ldp = local_degree_profile(Graph::path(3, true));
    CHECK(ldp[1] == DegreeProfile{2, 1, 1, 1, 0});
    CHECK(ldp[0] == DegreeProfile{1, 2, 2, 2, 0});
  }
  SUBCASE("min <= mean <= max for non-isolated nodes") {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
      const Graph g = testing::random_small_graph(rng, uniform_int(rng, 1, 10), 0.3, t % 2 == 0, 1);
      for (const auto& d : local_degree_profile(g)) {
        if (d[0] == 0) {
          CHECK(d == DegreeProfile{0, 0, 0, 0, 0});
          continue;
        }
        CHECK(d[1] <= d[3] + 1e-12);
        CHECK(d[3] <= d[2] + 1e-12);
        CHECK(d[4] >= 0);
      }
    }
  }
}

TEST_CASE("relabel preserves structure") {
  Rng rng(9);
  const Graph g = testing::random_small_graph(rng, 6, 0.4, true, 5);
  const auto m = testing::random_relabeling(rng, g);
  const Graph h = relabel(g, m);
  CHECK(h.size() == g.size());
  CHECK(h.arcs().size() == g.arcs().size());
  CHECK(h.total_weight() == g.total_weight());
  for (const auto& [from, to] : m) CHECK(h.weight(to) == g.weight(from));
}
