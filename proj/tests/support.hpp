#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library beyond the Graph accessors.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "mbc/game.hpp"
#include "mbc/graph.hpp"
#include "mbc/rng.hpp"

namespace testing {

using namespace mbc;

/// Dense adjacency over row indices; symmetric when undirected.
inline std::vector<std::vector<bool>> dense_adjacency(const Graph& g) {
  const int n = g.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (auto [u, v] : g.arcs()) {
    const int a = g.index_of(u);
    const int b = g.index_of(v);
    adj[a][b] = true;
    if (!g.directed()) adj[b][a] = true;
  }
  return adj;
}

/// Reachability by transitive closure (Floyd-Warshall), restricted to `alive`.
inline std::uint32_t closure_reach(const std::vector<std::vector<bool>>& adj, std::uint32_t alive,
                                   std::uint32_t sources) {
  const int n = static_cast<int>(adj.size());
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) {
    if (!(alive >> i & 1)) continue;
    r[i][i] = true;
    for (int j = 0; j < n; ++j) r[i][j] = r[i][j] || (adj[i][j] && (alive >> j & 1));
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
  std::uint32_t out = 0;
  for (int i = 0; i < n; ++i) {
    if (!(sources >> i & 1) || !(alive >> i & 1)) continue;
    for (int j = 0; j < n; ++j)
      if (r[i][j]) out |= 1u << j;
  }
  return out;
}

/// Bitmask minimax over the unit-step game on row indices. Plays the same
/// rules (vaccinate, attack, protect, forfeit when nothing is legal) from
/// scratch without memoization.
class ReferenceSolver {
 public:
  explicit ReferenceSolver(const Graph& g) : adj_(dense_adjacency(g)), w_(g.weights()) {}

  std::int64_t value(std::uint32_t alive, std::uint32_t attacked, Budgets b) const {
    const int n = static_cast<int>(w_.size());
    if (b.omega == 0 && b.phi == 0 && b.lambda == 0) return saved(alive, attacked);
    std::vector<int> legal;
    for (int i = 0; i < n; ++i) {
      if (!(alive >> i & 1)) continue;
      if (b.omega > 0 || !(attacked >> i & 1)) legal.push_back(i);
    }
    if (legal.empty()) {
      Budgets nb = b;
      if (b.omega > 0) nb.omega = 0;
      else if (b.phi > 0) nb.phi = 0;
      else nb.lambda = 0;
      return value(alive, attacked, nb);
    }
    const bool defender = b.omega > 0 || b.phi == 0;
    std::int64_t best = defender ? -1 : (std::int64_t{1} << 60);
    for (int i : legal) {
      std::int64_t v = 0;
      Budgets nb = b;
      if (b.omega > 0) {
        --nb.omega;
        v = w_[i] + value(alive & ~(1u << i), attacked, nb);
      } else if (b.phi > 0) {
        --nb.phi;
        v = value(alive, attacked | (1u << i), nb);
      } else {
        --nb.lambda;
        v = w_[i] + value(alive & ~(1u << i), attacked, nb);
      }
      best = defender ? std::max(best, v) : std::min(best, v);
    }
    return best;
  }

  std::int64_t saved(std::uint32_t alive, std::uint32_t attacked) const {
    const std::uint32_t infected = closure_reach(adj_, alive, attacked);
    std::int64_t s = 0;
    for (std::size_t i = 0; i < w_.size(); ++i)
      if ((alive >> i & 1) && !(infected >> i & 1)) s += w_[i];
    return s;
  }

 private:
  std::vector<std::vector<bool>> adj_;
  std::vector<Weight> w_;
};

/// Reference value of a GameState whose graph is a subgraph of `original`.
inline std::int64_t reference_value(const GameState& s) {
  const Graph& g = s.graph;
  std::uint32_t attacked = 0;
  for (NodeId v : s.attacked) attacked |= 1u << g.index_of(v);
  return ReferenceSolver(g).value((1u << g.size()) - 1, attacked, s.budgets);
}

/// Seeded small instance: n nodes, arc probability p, weights in [1, wmax].
inline Graph random_small_graph(Rng& rng, int n, double p, bool directed, int wmax) {
  std::vector<NodeId> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::vector<Weight> w(n);
  for (auto& x : w) x = uniform_int(rng, 1, wmax);
  std::vector<Arc> arcs;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      if (u == v || (!directed && v < u)) continue;
      if (uniform_real(rng) < p) arcs.emplace_back(u, v);
    }
  return Graph(nodes, w, arcs, directed);
}

inline Budgets random_budgets(Rng& rng, int max_each, int max_total) {
  while (true) {
    Budgets b{uniform_int(rng, 0, max_each), uniform_int(rng, 0, max_each), uniform_int(rng, 0, max_each)};
    if (b.total() <= max_total) return b;
  }
}

/// Variant index 0: unit undirected, 1: weighted undirected, 2: directed (unit or weighted).
inline GameState random_variant_state(Rng& rng, int variant, int n_lo, int n_hi, int max_each,
                                      int max_total) {
  const int n = uniform_int(rng, n_lo, n_hi);
  const double p = 0.2 + 0.5 * uniform_real(rng);
  const bool directed = variant == 2;
  const int wmax = variant == 0 ? 1 : 5;
  return make_state(random_small_graph(rng, n, p, directed, wmax), random_budgets(rng, max_each, max_total));
}

/// Random relabeling: a shuffled set of labels in [0, 3n).
inline std::vector<std::pair<NodeId, NodeId>> random_relabeling(Rng& rng, const Graph& g) {
  std::vector<NodeId> pool(3 * std::max(1, g.size()));
  std::iota(pool.begin(), pool.end(), 0);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<std::pair<NodeId, NodeId>> m;
  for (int i = 0; i < g.size(); ++i) m.emplace_back(g.nodes()[i], pool[i]);
  return m;
}

inline GameState relabel_state(const GameState& s, const std::vector<std::pair<NodeId, NodeId>>& m) {
  std::map<NodeId, NodeId> f(m.begin(), m.end());
  NodeSet attacked;
  for (NodeId v : s.attacked) attacked.push_back(f.at(v));
  std::sort(attacked.begin(), attacked.end());
  return make_state(relabel(s.graph, m), s.budgets, attacked);
}

}  // namespace testing
