#include "mbc/value_net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mbc/parallel.hpp"
#include "mbc/rng.hpp"

namespace mbc {

using nn::Matrix;
using nn::Slice;

ModelConfig ModelConfig::desk(int max_nodes) {
  ModelConfig cfg;
  cfg.propagation_steps = max_nodes;
  return cfg;
}

ModelConfig ModelConfig::full(int max_nodes) {
  ModelConfig cfg;
  cfg.embed_dim = 200;
  cfg.hidden_dim = 400;
  cfg.head_dim = 100;
  cfg.attention_blocks = 7;
  cfg.heads = 3;
  cfg.pool_replicas = 3;
  cfg.alpha = 0.2;
  cfg.dropout = 0.2;
  cfg.propagation_steps = max_nodes;
  return cfg;
}

void ModelConfig::validate() const {
  if (embed_dim < 1 || hidden_dim < 1 || head_dim < 1 || attention_blocks < 0 || heads < 1 ||
      pool_replicas < 1) {
    throw std::invalid_argument("model config: dimensions must be >= 1");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("model config: alpha in [0,1]");
  if (propagation_steps < 0) throw std::invalid_argument("model config: K must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("model config: dropout in [0,1)");
  }
}

namespace {

class LayoutBuilder {
 public:
  Slice take(int rows, int cols) {
    Slice s{next_, rows, cols};
    next_ += s.size();
    return s;
  }
  ParamLayout::Linear linear(int in, int out) { return {take(in, out), take(1, out)}; }
  ParamLayout::Norm norm(int dim, bool enabled) {
    if (!enabled) return {};
    return {take(1, dim), take(1, dim)};
  }
  std::size_t size() const { return next_; }

 private:
  std::size_t next_ = 0;
};

}  // namespace

ParamLayout::ParamLayout(const ModelConfig& cfg) {
  cfg.validate();
  const int de = cfg.embed_dim;
  const int dh = cfg.hidden_dim;
  const int dv = cfg.head_dim;
  LayoutBuilder b;
  input = b.linear(kNodeFeatures, de);
  for (int i = 0; i < cfg.attention_blocks; ++i) {
    Block blk;
    for (int h = 0; h < cfg.heads; ++h) {
      Head head;
      head.theta = b.take(de, dv);
      head.a_self = b.take(dv, 1);
      head.a_nbr = b.take(dv, 1);
      head.out = b.take(dv, de);
      blk.heads.push_back(head);
    }
    blk.norm1 = b.norm(de, cfg.normalize);
    blk.ff1 = b.linear(de, dh);
    blk.ff2 = b.linear(dh, de);
    blk.norm2 = b.norm(de, cfg.normalize);
    blocks.push_back(std::move(blk));
  }
  for (int p = 0; p < cfg.pool_replicas; ++p) {
    Pool pool;
    pool.gate1 = b.linear(de + 2, dh);
    pool.gate2 = b.linear(dh, 1);
    pool.proj1 = b.linear(de + 2, dh);
    pool.proj2 = b.linear(dh, de);
    pools.push_back(pool);
  }
  const int head_in = de + cfg.pool_replicas * de + 8;
  out1 = b.linear(head_in, dh);
  out_norm1 = b.norm(dh, cfg.normalize);
  out2 = b.linear(dh, de);
  out_norm2 = b.norm(de, cfg.normalize);
  out3 = b.linear(de, 1);
  total = b.size();
}

std::size_t parameter_count(const ModelConfig& cfg) { return ParamLayout(cfg).total; }

ValueNetwork init_network(const ModelConfig& cfg, std::uint64_t seed) {
  const ParamLayout layout(cfg);
  ValueNetwork net{cfg, std::vector<double>(layout.total, 0.0)};
  Rng rng(seed);
  auto fill = [&](const Slice& s, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < s.size(); ++i) net.params[s.offset + i] = dist(rng);
  };
  auto linear = [&](const ParamLayout::Linear& l) {
    fill(l.w, l.w.rows);
    fill(l.b, l.w.rows);
  };
  auto norm = [&](const ParamLayout::Norm& n) {
    for (std::size_t i = 0; i < n.gamma.size(); ++i) net.params[n.gamma.offset + i] = 1.0;
  };
  linear(layout.input);
  for (const auto& blk : layout.blocks) {
    for (const auto& h : blk.heads) {
      fill(h.theta, cfg.embed_dim);
      fill(h.a_self, 2 * cfg.head_dim);
      fill(h.a_nbr, 2 * cfg.head_dim);
      fill(h.out, cfg.head_dim);
    }
    norm(blk.norm1);
    linear(blk.ff1);
    linear(blk.ff2);
    norm(blk.norm2);
  }
  for (const auto& p : layout.pools) {
    linear(p.gate1);
    linear(p.gate2);
    linear(p.proj1);
    linear(p.proj2);
  }
  linear(layout.out1);
  norm(layout.out_norm1);
  linear(layout.out2);
  norm(layout.out_norm2);
  linear(layout.out3);
  return net;
}

Matrix<double> node_features(const GameState& s) {
  const Graph& g = s.graph;
  Matrix<double> x = Matrix<double>::Zero(g.size(), kNodeFeatures);
  if (g.empty()) return x;
  const auto total = static_cast<double>(g.total_weight());
  const auto ldp = local_degree_profile(g);
  for (int i = 0; i < g.size(); ++i) {
    x(i, 0) = static_cast<double>(g.weights()[i]) / total;
    x(i, 1) = std::binary_search(s.attacked.begin(), s.attacked.end(), g.nodes()[i]) ? 1.0 : 0.0;
    for (int j = 0; j < 5; ++j) x(i, 2 + j) = ldp[i][j];
  }
  return x;
}

Matrix<double> context_features(const GameState& s) {
  Matrix<double> c(1, 8);
  const double n = s.graph.size();
  const double inv = n > 0 ? 1.0 / n : 0.0;
  c << n, s.budgets.omega, s.budgets.phi, s.budgets.lambda, s.budgets.omega * inv,
      s.budgets.phi * inv, s.budgets.lambda * inv, static_cast<double>(s.graph.total_weight());
  return c;
}

nn::SparseRows normalized_adjacency(const Graph& g) {
  const int n = g.size();
  std::vector<double> inv_sqrt_deg(n);
  for (int v = 0; v < n; ++v) {
    inv_sqrt_deg[v] = 1.0 / std::sqrt(1.0 + static_cast<double>(g.in_neighbors(v).size()));
  }
  nn::SparseRows rows(n);
  for (int v = 0; v < n; ++v) {
    rows[v].emplace_back(v, inv_sqrt_deg[v] * inv_sqrt_deg[v]);
    for (int u : g.in_neighbors(v)) rows[v].emplace_back(u, inv_sqrt_deg[v] * inv_sqrt_deg[u]);
  }
  return rows;
}

nn::Neighborhoods attention_neighborhoods(const Graph& g) {
  nn::Neighborhoods nb(g.size());
  for (int v = 0; v < g.size(); ++v) {
    nb[v].push_back(v);
    for (int u : g.in_neighbors(v)) nb[v].push_back(u);
  }
  return nb;
}

Matrix<double> appnp_propagate(const Matrix<double>& x0, const Graph& g, double alpha, int k) {
  if (k < 0) throw std::invalid_argument("appnp_propagate: K must be >= 0");
  if (x0.rows() != g.size()) throw std::invalid_argument("appnp_propagate: row count mismatch");
  const auto adj = normalized_adjacency(g);
  Matrix<double> cur = x0;
  for (int it = 0; it < k; ++it) {
    cur = (1.0 - alpha) * nn::Tape<double>::apply(adj, cur) + alpha * x0;
  }
  return cur;
}

namespace detail {

template <typename T>
typename nn::Tape<T>::Var attention_block(nn::Tape<T>& tape, typename nn::Tape<T>::Var x,
                                          const ParamLayout::Block& block,
                                          const nn::Neighborhoods& nb, const ModelConfig& cfg) {
  using Var = typename nn::Tape<T>::Var;
  Var merged;
  for (const auto& head : block.heads) {
    const Var h = tape.matmul(x, tape.param(head.theta));
    const Var f = tape.matmul(h, tape.param(head.a_self));
    const Var g = tape.matmul(h, tape.param(head.a_nbr));
    const Var mixed = tape.attention(h, f, g, nb, static_cast<T>(cfg.leaky_slope));
    const Var projected = tape.matmul(mixed, tape.param(head.out));
    merged = merged.id < 0 ? projected : tape.add(merged, projected);
  }
  Var y = tape.add(x, merged);
  if (cfg.normalize) y = tape.layer_norm(y, tape.param(block.norm1.gamma), tape.param(block.norm1.beta));
  const Var hidden = tape.relu(tape.linear(y, tape.param(block.ff1.w), tape.param(block.ff1.b)));
  Var z = tape.add(y, tape.linear(hidden, tape.param(block.ff2.w), tape.param(block.ff2.b)));
  if (cfg.normalize) z = tape.layer_norm(z, tape.param(block.norm2.gamma), tape.param(block.norm2.beta));
  return z;
}

template <typename T>
typename nn::Tape<T>::Var graph_pool(nn::Tape<T>& tape, typename nn::Tape<T>::Var x,
                                     const std::vector<ParamLayout::Pool>& pools) {
  using Var = typename nn::Tape<T>::Var;
  auto mlp = [&](Var in, const ParamLayout::Linear& l1, const ParamLayout::Linear& l2) {
    const Var hidden = tape.relu(tape.linear(in, tape.param(l1.w), tape.param(l1.b)));
    return tape.linear(hidden, tape.param(l2.w), tape.param(l2.b));
  };
  Var out;
  for (const auto& pool : pools) {
    const Var gates = tape.softmax_column(mlp(x, pool.gate1, pool.gate2));
    const Var r = tape.matmul_tn(gates, mlp(x, pool.proj1, pool.proj2));
    out = out.id < 0 ? r : tape.concat_cols(out, r);
  }
  return out;
}

template nn::Tape<float>::Var attention_block<float>(nn::Tape<float>&, nn::Tape<float>::Var,
                                                     const ParamLayout::Block&,
                                                     const nn::Neighborhoods&, const ModelConfig&);
template nn::Tape<double>::Var attention_block<double>(nn::Tape<double>&, nn::Tape<double>::Var,
                                                       const ParamLayout::Block&,
                                                       const nn::Neighborhoods&,
                                                       const ModelConfig&);
template nn::Tape<float>::Var graph_pool<float>(nn::Tape<float>&, nn::Tape<float>::Var,
                                                const std::vector<ParamLayout::Pool>&);
template nn::Tape<double>::Var graph_pool<double>(nn::Tape<double>&, nn::Tape<double>::Var,
                                                  const std::vector<ParamLayout::Pool>&);

}  // namespace detail

namespace {

/// Graph operators referenced by the tape's backward closures; must outlive it.
struct GraphOperators {
  nn::SparseRows adjacency;
  nn::Neighborhoods neighborhoods;

  explicit GraphOperators(const Graph& g)
      : adjacency(normalized_adjacency(g)), neighborhoods(attention_neighborhoods(g)) {}
};

template <typename T>
Matrix<T> dropout_mask(int rows, int cols, double p, Rng& rng) {
  Matrix<T> mask(rows, cols);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  std::bernoulli_distribution keep(1.0 - p);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? keep_scale : T(0);
  return mask;
}

/// Full trunk plus head, returning the per-node pre-activation output (n x 1).
template <typename T>
typename nn::Tape<T>::Var forward_nodes(nn::Tape<T>& tape, const GameState& s,
                                        const ModelConfig& cfg, const ParamLayout& layout,
                                        const GraphOperators& ops, Mode mode,
                                        std::uint64_t dropout_seed) {
  using Var = typename nn::Tape<T>::Var;
  const int n = s.graph.size();
  const Matrix<double> features = node_features(s);

  const Var raw = tape.constant(features.template cast<T>());
  Var x = tape.linear(raw, tape.param(layout.input.w), tape.param(layout.input.b));
  for (const auto& block : layout.blocks) {
    x = detail::attention_block<T>(tape, x, block, ops.neighborhoods, cfg);
  }
  x = tape.appnp(x, ops.adjacency, static_cast<T>(cfg.alpha), cfg.propagation_steps);

  const Var skip = tape.constant(features.leftCols(2).template cast<T>());
  const Var pooled = detail::graph_pool<T>(tape, tape.concat_cols(x, skip), layout.pools);
  const Var context =
      tape.concat_cols(pooled, tape.constant(context_features(s).template cast<T>()));
  const Var head_in = tape.concat_cols(x, tape.repeat_rows(context, n));

  const T slope = static_cast<T>(cfg.leaky_slope);
  const bool drop = mode == Mode::Train && cfg.dropout > 0.0;
  Rng rng(dropout_seed);
  Var h = tape.leaky_relu(
      tape.linear(head_in, tape.param(layout.out1.w), tape.param(layout.out1.b)), slope);
  if (cfg.normalize) {
    h = tape.layer_norm(h, tape.param(layout.out_norm1.gamma), tape.param(layout.out_norm1.beta));
  }
  if (drop) h = tape.mul_const(h, dropout_mask<T>(n, cfg.hidden_dim, cfg.dropout, rng));
  h = tape.leaky_relu(tape.linear(h, tape.param(layout.out2.w), tape.param(layout.out2.b)), slope);
  if (cfg.normalize) {
    h = tape.layer_norm(h, tape.param(layout.out_norm2.gamma), tape.param(layout.out_norm2.beta));
  }
  if (drop) h = tape.mul_const(h, dropout_mask<T>(n, cfg.embed_dim, cfg.dropout, rng));
  return tape.linear(h, tape.param(layout.out3.w), tape.param(layout.out3.b));
}

template <typename T>
Matrix<T> weight_column(const Graph& g) {
  Matrix<T> w(g.size(), 1);
  for (int i = 0; i < g.size(); ++i) w(i, 0) = static_cast<T>(g.weights()[i]);
  return w;
}

template <typename T>
ForwardResult value_forward_impl(const GameState& s, const ValueNetwork& net, Mode mode,
                                 std::uint64_t seed) {
  ForwardResult result;
  if (s.graph.empty()) return result;
  const ParamLayout layout(net.config);
  const GraphOperators ops(s.graph);
  nn::Tape<T> tape(net.params, false);
  const auto logits = forward_nodes<T>(tape, s, net.config, layout, ops, mode, seed);
  const auto probs = tape.sigmoid(logits);
  const auto value = tape.dot_const(probs, weight_column<T>(s.graph));
  result.value = static_cast<double>(tape.value(value)(0, 0));
  const auto& p = tape.value(probs);
  result.save_probability.assign(p.data(), p.data() + p.size());
  return result;
}

/// Prediction and (if `scale` != 0) gradient of scale * prediction, for one sample.
template <typename T>
double value_sample_gradient(const GameState& s, const ValueNetwork& net, const ParamLayout& layout,
                             Mode mode, std::uint64_t seed, double target, double scale,
                             std::span<double> grad) {
  if (s.graph.empty()) return 0.0;
  const GraphOperators ops(s.graph);
  nn::Tape<T> tape(net.params, true);
  const auto logits = forward_nodes<T>(tape, s, net.config, layout, ops, mode, seed);
  const auto value = tape.dot_const(tape.sigmoid(logits), weight_column<T>(s.graph));
  const double pred = static_cast<double>(tape.value(value)(0, 0));
  Matrix<T> seed_grad(1, 1);
  seed_grad(0, 0) = static_cast<T>(scale * (pred - target));
  tape.backward(value, seed_grad, grad);
  return pred;
}

template <typename T>
double q_sample_gradient(const QSample& sample, const ValueNetwork& net, const ParamLayout& layout,
                         Mode mode, std::uint64_t seed, double scale, std::span<double> grad) {
  const GameState& s = sample.state;
  const int row = s.graph.index_of(sample.action);
  if (row < 0) throw std::invalid_argument("q loss: action not in graph");
  const GraphOperators ops(s.graph);
  nn::Tape<T> tape(net.params, true);
  const auto q = tape.softplus(forward_nodes<T>(tape, s, net.config, layout, ops, mode, seed));
  const double pred = static_cast<double>(tape.value(q)(row, 0));
  Matrix<T> seed_grad = Matrix<T>::Zero(s.graph.size(), 1);
  seed_grad(row, 0) = static_cast<T>(scale * (pred - sample.target));
  tape.backward(q, seed_grad, grad);
  return pred;
}

void require_head(const ValueNetwork& net, HeadKind kind) {
  if (net.config.head != kind) {
    throw std::invalid_argument(kind == HeadKind::Value ? "network has a Q head, not a value head"
                                                        : "network has a value head, not a Q head");
  }
}

/// Shared driver: per-sample gradients into separate buffers, summed in index order.
template <typename SampleFn>
LossGradient batched_gradient(const ValueNetwork& net, int m, int threads, SampleFn&& sample_fn) {
  if (m < 1) throw std::invalid_argument("loss_and_gradient: empty batch");
  const std::size_t p = net.params.size();
  std::vector<std::vector<double>> grads(m);
  std::vector<double> sq(m);
  parallel_for(m, threads, [&](int i) {
    grads[i].assign(p, 0.0);
    sq[i] = sample_fn(i, std::span<double>(grads[i]));
  });
  LossGradient out;
  out.gradient.assign(p, 0.0);
  for (int i = 0; i < m; ++i) {
    out.loss += sq[i];
    for (std::size_t j = 0; j < p; ++j) out.gradient[j] += grads[i][j];
  }
  out.loss /= m;
  return out;
}

template <typename T>
LossGradient value_loss(const ValueNetwork& net, std::span<const ValueSample> batch, Mode mode,
                        std::uint64_t seed, int threads) {
  const ParamLayout layout(net.config);
  const int m = static_cast<int>(batch.size());
  const double scale = 2.0 / m;
  return batched_gradient(net, m, threads, [&](int i, std::span<double> g) {
    const double pred = value_sample_gradient<T>(batch[i].state, net, layout, mode,
                                                 derive_seed(seed, "dropout", i), batch[i].target,
                                                 scale, g);
    return (pred - batch[i].target) * (pred - batch[i].target);
  });
}

}  // namespace

ForwardResult value_forward(const GameState& s, const ValueNetwork& net, Mode mode,
                            std::uint64_t dropout_seed) {
  require_head(net, HeadKind::Value);
  return net.config.precision == Precision::Double
             ? value_forward_impl<double>(s, net, mode, dropout_seed)
             : value_forward_impl<float>(s, net, mode, dropout_seed);
}

std::map<NodeId, double> q_forward(const GameState& s, const ValueNetwork& net) {
  require_head(net, HeadKind::Q);
  if (is_terminal(s)) throw std::invalid_argument("q_forward: terminal state");
  std::map<NodeId, double> out;
  const NodeSet legal = legal_actions(s);
  if (legal.empty()) return out;
  const ParamLayout layout(net.config);
  const GraphOperators ops(s.graph);
  auto run = [&]<typename T>(T) {
    nn::Tape<T> tape(net.params, false);
    const auto q = tape.softplus(forward_nodes<T>(tape, s, net.config, layout, ops, Mode::Eval, 0));
    for (NodeId v : legal) out.emplace(v, static_cast<double>(tape.value(q)(s.graph.index_of(v), 0)));
  };
  if (net.config.precision == Precision::Double) {
    run(double{});
  } else {
    run(float{});
  }
  return out;
}

LossGradient loss_and_gradient(const ValueNetwork& net, std::span<const ValueSample> batch,
                               Mode mode, std::uint64_t seed, int threads) {
  require_head(net, HeadKind::Value);
  return net.config.precision == Precision::Double
             ? value_loss<double>(net, batch, mode, seed, threads)
             : value_loss<float>(net, batch, mode, seed, threads);
}

LossGradient loss_and_gradient_serial(const ValueNetwork& net,
                                      std::span<const ValueSample> batch, Mode mode,
                                      std::uint64_t seed) {
  return loss_and_gradient(net, batch, mode, seed, 1);
}

LossGradient q_loss_and_gradient(const ValueNetwork& net, std::span<const QSample> batch,
                                 Mode mode, std::uint64_t seed, int threads) {
  require_head(net, HeadKind::Q);
  const ParamLayout layout(net.config);
  const int m = static_cast<int>(batch.size());
  const double scale = 2.0 / m;
  return batched_gradient(net, m, threads, [&](int i, std::span<double> g) {
    const auto sample_seed = derive_seed(seed, "dropout", i);
    const double pred =
        net.config.precision == Precision::Double
            ? q_sample_gradient<double>(batch[i], net, layout, mode, sample_seed, scale, g)
            : q_sample_gradient<float>(batch[i], net, layout, mode, sample_seed, scale, g);
    return (pred - batch[i].target) * (pred - batch[i].target);
  });
}

double mean_squared_error(const ValueNetwork& net, std::span<const ValueSample> data,
                          int threads) {
  if (data.empty()) return 0.0;
  std::vector<double> sq(data.size());
  parallel_for(static_cast<int>(data.size()), threads, [&](int i) {
    const double d = value_forward(data[i].state, net).value - data[i].target;
    sq[i] = d * d;
  });
  double total = 0.0;
  for (double x : sq) total += x;
  return total / static_cast<double>(data.size());
}

}  // namespace mbc
