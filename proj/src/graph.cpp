#include "mbc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mbc/rng.hpp"

namespace mbc {

Graph::Graph(std::vector<NodeId> nodes, std::vector<Weight> weights, std::vector<Arc> arcs,
             bool directed)
    : directed_(directed) {
  if (nodes.size() != weights.size()) {
    throw std::invalid_argument("graph: node and weight counts differ");
  }
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return nodes[a] < nodes[b]; });
  nodes_.reserve(nodes.size());
  weights_.reserve(nodes.size());
  for (auto i : order) {
    if (nodes[i] < 0) throw std::invalid_argument("graph: node ids must be nonnegative");
    if (weights[i] < 1) throw std::invalid_argument("graph: weights must be >= 1");
    if (!nodes_.empty() && nodes_.back() == nodes[i]) {
      throw std::invalid_argument("graph: duplicate node id " + std::to_string(nodes[i]));
    }
    nodes_.push_back(nodes[i]);
    weights_.push_back(weights[i]);
  }
  for (auto& [u, v] : arcs) {
    if (u == v) throw std::invalid_argument("graph: self-loop on " + std::to_string(u));
    if (!contains(u) || !contains(v)) throw std::invalid_argument("graph: dangling arc");
    if (!directed_ && u > v) std::swap(u, v);
  }
  std::sort(arcs.begin(), arcs.end());
  if (std::adjacent_find(arcs.begin(), arcs.end()) != arcs.end()) {
    throw std::invalid_argument("graph: duplicate arc");
  }
  arcs_ = std::move(arcs);

  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  for (auto [u, v] : arcs_) {
    const int iu = index_of(u);
    const int iv = index_of(v);
    out_[iu].push_back(iv);
    in_[iv].push_back(iu);
    if (!directed_) {
      out_[iv].push_back(iu);
      in_[iu].push_back(iv);
    }
  }
  for (auto& l : out_) std::sort(l.begin(), l.end());
  for (auto& l : in_) std::sort(l.begin(), l.end());
}

Graph Graph::path(int n, bool directed) {
  std::vector<Arc> arcs;
  for (int i = 0; i + 1 < n; ++i) arcs.emplace_back(i, i + 1);
  return unit_weight(n, std::move(arcs), directed);
}

Graph Graph::unit_weight(int n, std::vector<Arc> arcs, bool directed) {
  std::vector<NodeId> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0);
  return Graph(std::move(nodes), std::vector<Weight>(n, 1), std::move(arcs), directed);
}

bool Graph::contains(NodeId v) const { return index_of(v) >= 0; }

int Graph::index_of(NodeId v) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), v);
  if (it == nodes_.end() || *it != v) return -1;
  return static_cast<int>(it - nodes_.begin());
}

Weight Graph::weight(NodeId v) const {
  const int i = index_of(v);
  if (i < 0) throw std::invalid_argument("graph: unknown node " + std::to_string(v));
  return weights_[i];
}

Weight Graph::total_weight() const {
  return std::accumulate(weights_.begin(), weights_.end(), Weight{0});
}

std::int64_t max_arc_count(int n, bool directed) {
  const std::int64_t pairs = static_cast<std::int64_t>(n) * (n - 1);
  return directed ? pairs : pairs / 2;
}

std::pair<std::int64_t, std::int64_t> arc_count_range(int n, double density_min,
                                                      double density_max, bool directed) {
  const auto m = static_cast<double>(max_arc_count(n, directed));
  // Products such as 0.1 * 50 land a few ulps off the integer.
  constexpr double kSlack = 1e-9;
  const auto lo = static_cast<std::int64_t>(std::ceil(density_min * m - kSlack));
  const auto hi = static_cast<std::int64_t>(std::floor(density_max * m + kSlack));
  return {std::max<std::int64_t>(lo, 0), hi};
}

Graph generate_graph(const GraphGenParams& p, std::uint64_t seed) {
  if (p.n < 1) throw std::invalid_argument("generate_graph: n must be >= 1");
  if (!(0.0 <= p.density_min && p.density_min <= p.density_max && p.density_max <= 1.0)) {
    throw std::invalid_argument("generate_graph: density range must satisfy 0<=min<=max<=1");
  }
  if (p.weight_min < 1 || p.weight_min > p.weight_max) {
    throw std::invalid_argument("generate_graph: invalid weight range");
  }
  const auto [lo, hi] = arc_count_range(p.n, p.density_min, p.density_max, p.directed);
  if (lo > hi) throw std::invalid_argument("generate_graph: density range admits no arc count");
  if (!p.allow_no_arcs && lo == 0 && p.n >= 2) {
    throw std::invalid_argument("generate_graph: density range admits zero arcs");
  }

  Rng rng(seed);
  const auto count = std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);

  // Candidate pairs in a fixed order; a partial Fisher-Yates picks `count`.
  std::vector<Arc> candidates;
  candidates.reserve(static_cast<std::size_t>(max_arc_count(p.n, p.directed)));
  for (int u = 0; u < p.n; ++u) {
    for (int v = p.directed ? 0 : u + 1; v < p.n; ++v) {
      if (u != v) candidates.emplace_back(u, v);
    }
  }
  for (std::int64_t i = 0; i < count; ++i) {
    const auto j = std::uniform_int_distribution<std::int64_t>(
        i, static_cast<std::int64_t>(candidates.size()) - 1)(rng);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(static_cast<std::size_t>(count));

  std::vector<NodeId> nodes(p.n);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::vector<Weight> weights(p.n);
  std::uniform_int_distribution<Weight> wdist(p.weight_min, p.weight_max);
  for (auto& w : weights) w = wdist(rng);
  return Graph(std::move(nodes), std::move(weights), std::move(candidates), p.directed);
}

Graph remove_node(const Graph& g, NodeId v) {
  const int iv = g.index_of(v);
  if (iv < 0) throw std::invalid_argument("remove_node: node " + std::to_string(v) + " absent");
  std::vector<NodeId> nodes;
  std::vector<Weight> weights;
  nodes.reserve(g.size() - 1);
  weights.reserve(g.size() - 1);
  for (int i = 0; i < g.size(); ++i) {
    if (i == iv) continue;
    nodes.push_back(g.nodes()[i]);
    weights.push_back(g.weights()[i]);
  }
  std::vector<Arc> arcs;
  arcs.reserve(g.arcs().size());
  for (const auto& a : g.arcs()) {
    if (a.first != v && a.second != v) arcs.push_back(a);
  }
  return Graph(std::move(nodes), std::move(weights), std::move(arcs), g.directed());
}

NodeSet reachable_from(const Graph& g, const NodeSet& sources) {
  std::vector<char> seen(g.size(), 0);
  std::vector<int> stack;
  for (NodeId s : sources) {
    const int i = g.index_of(s);
    if (i < 0) throw std::invalid_argument("reachable_from: source " + std::to_string(s) + " absent");
    if (!seen[i]) {
      seen[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j : g.out_neighbors(i)) {
      if (!seen[j]) {
        seen[j] = 1;
        stack.push_back(j);
      }
    }
  }
  NodeSet out;
  for (int i = 0; i < g.size(); ++i) {
    if (seen[i]) out.push_back(g.nodes()[i]);
  }
  return out;
}

std::vector<DegreeProfile> local_degree_profile(const Graph& g) {
  const int n = g.size();
  // Neighborhood = union of in- and out-neighbors; degree = in + out.
  std::vector<std::vector<int>> nbrs(n);
  std::vector<double> degree(n);
  for (int i = 0; i < n; ++i) {
    if (g.directed()) {
      std::set_union(g.out_neighbors(i).begin(), g.out_neighbors(i).end(),
                     g.in_neighbors(i).begin(), g.in_neighbors(i).end(),
                     std::back_inserter(nbrs[i]));
      degree[i] = static_cast<double>(g.out_neighbors(i).size() + g.in_neighbors(i).size());
    } else {
      nbrs[i] = g.out_neighbors(i);
      degree[i] = static_cast<double>(nbrs[i].size());
    }
  }
  std::vector<DegreeProfile> out(n, DegreeProfile{0, 0, 0, 0, 0});
  for (int i = 0; i < n; ++i) {
    if (nbrs[i].empty()) continue;
    double lo = degree[nbrs[i][0]];
    double hi = lo;
    double sum = 0.0;
    for (int j : nbrs[i]) {
      lo = std::min(lo, degree[j]);
      hi = std::max(hi, degree[j]);
      sum += degree[j];
    }
    const double mean = sum / static_cast<double>(nbrs[i].size());
    double var = 0.0;
    for (int j : nbrs[i]) var += (degree[j] - mean) * (degree[j] - mean);
    var /= static_cast<double>(nbrs[i].size());
    out[i] = {degree[i], lo, hi, mean, std::sqrt(var)};
  }
  return out;
}

Graph relabel(const Graph& g, const std::vector<std::pair<NodeId, NodeId>>& mapping) {
  auto map_one = [&](NodeId v) {
    for (const auto& [from, to] : mapping) {
      if (from == v) return to;
    }
    throw std::invalid_argument("relabel: node " + std::to_string(v) + " not mapped");
  };
  std::vector<NodeId> nodes;
  for (NodeId v : g.nodes()) nodes.push_back(map_one(v));
  std::vector<Arc> arcs;
  for (auto [u, v] : g.arcs()) arcs.emplace_back(map_one(u), map_one(v));
  return Graph(std::move(nodes), g.weights(), std::move(arcs), g.directed());
}

}  // namespace mbc
