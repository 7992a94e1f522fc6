#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace mbc {

using NodeId = int;
using Weight = std::int64_t;
using Arc = std::pair<NodeId, NodeId>;
using NodeSet = std::vector<NodeId>;  // always sorted ascending, no duplicates

/// Weighted, optionally directed graph over integer node labels.
///
/// Nodes are kept sorted by label; row `i` of any per-node matrix refers to
/// `nodes()[i]`. Undirected arcs are stored once as (min, max). The value is
/// immutable after construction.
class Graph {
 public:
  Graph() = default;
  Graph(std::vector<NodeId> nodes, std::vector<Weight> weights, std::vector<Arc> arcs,
        bool directed);

  static Graph path(int n, bool directed = false);
  static Graph unit_weight(int n, std::vector<Arc> arcs, bool directed = false);

  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<Weight>& weights() const { return weights_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  bool directed() const { return directed_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  bool empty() const { return nodes_.empty(); }

  bool contains(NodeId v) const;
  /// Row index of `v`, or -1 when absent.
  int index_of(NodeId v) const;
  Weight weight(NodeId v) const;
  Weight total_weight() const;

  /// Successor indices (both directions when undirected).
  const std::vector<int>& out_neighbors(int i) const { return out_[i]; }
  /// Predecessor indices (equal to out_neighbors when undirected).
  const std::vector<int>& in_neighbors(int i) const { return in_[i]; }

  bool operator==(const Graph& other) const {
    return directed_ == other.directed_ && nodes_ == other.nodes_ &&
           weights_ == other.weights_ && arcs_ == other.arcs_;
  }

 private:
  std::vector<NodeId> nodes_;
  std::vector<Weight> weights_;
  std::vector<Arc> arcs_;
  bool directed_ = false;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

struct GraphGenParams {
  int n = 1;
  double density_min = 0.0;
  double density_max = 1.0;
  bool directed = false;
  Weight weight_min = 1;
  Weight weight_max = 1;
  bool allow_no_arcs = true;
};

/// Maximum arc count: n(n-1) directed, n(n-1)/2 undirected.
std::int64_t max_arc_count(int n, bool directed);

/// Inclusive integer interval [ceil(d_min*M), floor(d_max*M)] of arc counts.
std::pair<std::int64_t, std::int64_t> arc_count_range(int n, double density_min,
                                                      double density_max, bool directed);

/// Erdos-Renyi style instance with a uniformly drawn arc count, arcs chosen
/// uniformly without replacement, and uniform integer weights.
Graph generate_graph(const GraphGenParams& params, std::uint64_t seed);

Graph remove_node(const Graph& g, NodeId v);

/// Sources plus everything reachable from them along arcs.
NodeSet reachable_from(const Graph& g, const NodeSet& sources);

/// Per node: degree, then min, max, mean and population std of neighbor degrees.
using DegreeProfile = std::array<double, 5>;
std::vector<DegreeProfile> local_degree_profile(const Graph& g);

/// Relabels nodes through `mapping` (old label -> new label, must be injective).
Graph relabel(const Graph& g, const std::vector<std::pair<NodeId, NodeId>>& mapping);

}  // namespace mbc
