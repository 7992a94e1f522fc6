#pragma once

// Minimal reverse-mode differentiation over dense row-major matrices, with the
// graph-specific fused ops the value network needs (neighborhood attention and
// personalized-pagerank propagation).

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace mbc::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Location of one parameter tensor inside the flat parameter vector.
struct Slice {
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

/// Row v lists (column index, coefficient) pairs of a sparse operator.
using SparseRows = std::vector<std::vector<std::pair<int, double>>>;
/// Row v lists the nodes v attends over (its neighborhood plus itself).
using Neighborhoods = std::vector<std::vector<int>>;

template <typename T>
class Tape {
 public:
  using Mat = Matrix<T>;

  struct Var {
    int id = -1;
  };

  /// `record = false` skips building the backward graph (inference only).
  Tape(std::span<const double> params, bool record) : params_(params), record_(record) {}

  bool recording() const { return record_; }
  const Mat& value(Var v) const { return nodes_[v.id].value; }
  std::size_t size() const { return nodes_.size(); }

  Var constant(Mat m) { return push(std::move(m), false, {}); }

  Var param(const Slice& s) {
    Mat m(s.rows, s.cols);
    for (std::size_t i = 0; i < s.size(); ++i) m.data()[i] = static_cast<T>(params_[s.offset + i]);
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{std::move(m), Mat(), nullptr, record_, s.offset, true});
    return Var{id};
  }

  Var matmul(Var a, Var b) {
    Mat out = value(a) * value(b);
    return push(std::move(out), needs(a, b), [a, b](Tape& t, const Mat& g) {
      if (t.needs(a)) t.grad(a).noalias() += g * t.value(b).transpose();
      if (t.needs(b)) t.grad(b).noalias() += t.value(a).transpose() * g;
    });
  }

  /// aᵀ b
  Var matmul_tn(Var a, Var b) {
    Mat out = value(a).transpose() * value(b);
    return push(std::move(out), needs(a, b), [a, b](Tape& t, const Mat& g) {
      if (t.needs(a)) t.grad(a).noalias() += t.value(b) * g.transpose();
      if (t.needs(b)) t.grad(b).noalias() += t.value(a) * g;
    });
  }

  Var add(Var a, Var b) {
    Mat out = value(a) + value(b);
    return push(std::move(out), needs(a, b), [a, b](Tape& t, const Mat& g) {
      if (t.needs(a)) t.grad(a) += g;
      if (t.needs(b)) t.grad(b) += g;
    });
  }

  /// Adds a 1 x c row to every row of a.
  Var add_row(Var a, Var row) {
    Mat out = value(a).rowwise() + value(row).row(0);
    return push(std::move(out), needs(a, row), [a, row](Tape& t, const Mat& g) {
      if (t.needs(a)) t.grad(a) += g;
      if (t.needs(row)) t.grad(row) += g.colwise().sum();
    });
  }

  Var linear(Var x, Var w, Var b) { return add_row(matmul(x, w), b); }

  Var relu(Var a) { return leaky_relu(a, T(0)); }

  Var leaky_relu(Var a, T slope) {
    Mat out = value(a).unaryExpr([slope](T x) { return x > 0 ? x : slope * x; });
    return push(std::move(out), needs(a), [a, slope](Tape& t, const Mat& g) {
      t.grad(a) += g.binaryExpr(t.value(a), [slope](T gi, T x) { return x > 0 ? gi : slope * gi; });
    });
  }

  Var sigmoid(Var a) {
    Mat out = value(a).unaryExpr([](T x) { return T(1) / (T(1) + std::exp(-x)); });
    const int self = static_cast<int>(nodes_.size());
    return push(std::move(out), needs(a), [a, self](Tape& t, const Mat& g) {
      const Mat& y = t.nodes_[self].value;
      t.grad(a) += g.cwiseProduct(y.cwiseProduct((Mat::Ones(y.rows(), y.cols()) - y)));
    });
  }

  /// log(1 + e^x), evaluated stably.
  Var softplus(Var a) {
    Mat out = value(a).unaryExpr([](T x) { return std::max(x, T(0)) + std::log1p(std::exp(-std::abs(x))); });
    return push(std::move(out), needs(a), [a](Tape& t, const Mat& g) {
      t.grad(a) += g.binaryExpr(t.value(a), [](T gi, T x) { return gi / (T(1) + std::exp(-x)); });
    });
  }

  /// Elementwise product with a constant (dropout masks).
  Var mul_const(Var a, Mat mask) {
    Mat out = value(a).cwiseProduct(mask);
    return push(std::move(out), needs(a), [a, mask = std::move(mask)](Tape& t, const Mat& g) {
      t.grad(a) += g.cwiseProduct(mask);
    });
  }

  /// Per-row normalization to zero mean and unit variance, then gain and bias.
  Var layer_norm(Var a, Var gamma, Var beta, T eps = T(1e-5)) {
    const Mat& x = value(a);
    const auto cols = static_cast<T>(x.cols());
    Mat xhat(x.rows(), x.cols());
    Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const T mean = x.row(r).sum() / cols;
      const T var = (x.row(r).array() - mean).square().sum() / cols;
      inv_std(r) = T(1) / std::sqrt(var + eps);
      xhat.row(r) = (x.row(r).array() - mean) * inv_std(r);
    }
    Mat out = (xhat.array().rowwise() * value(gamma).row(0).array()).matrix();
    out.rowwise() += value(beta).row(0);
    return push(std::move(out), needs(a, gamma) || needs(beta),
                [a, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                    Tape& t, const Mat& g) {
                  if (t.needs(gamma)) t.grad(gamma) += g.cwiseProduct(xhat).colwise().sum();
                  if (t.needs(beta)) t.grad(beta) += g.colwise().sum();
                  if (!t.needs(a)) return;
                  const Mat dxhat = (g.array().rowwise() * t.value(gamma).row(0).array()).matrix();
                  const auto n = static_cast<T>(g.cols());
                  for (Eigen::Index r = 0; r < g.rows(); ++r) {
                    const T mean_d = dxhat.row(r).sum() / n;
                    const T mean_dx = dxhat.row(r).dot(xhat.row(r)) / n;
                    t.grad(a).row(r).array() +=
                        inv_std(r) *
                        (dxhat.row(r).array() - mean_d - xhat.row(r).array() * mean_dx);
                  }
                });
  }

  Var concat_cols(Var a, Var b) {
    const Mat& va = value(a);
    const Mat& vb = value(b);
    Mat out(va.rows(), va.cols() + vb.cols());
    out << va, vb;
    const auto ca = va.cols();
    const auto cb = vb.cols();
    return push(std::move(out), needs(a, b), [a, b, ca, cb](Tape& t, const Mat& g) {
      if (t.needs(a)) t.grad(a) += g.leftCols(ca);
      if (t.needs(b)) t.grad(b) += g.rightCols(cb);
    });
  }

  Var repeat_rows(Var row, int n) {
    Mat out = value(row).replicate(n, 1);
    return push(std::move(out), needs(row), [row](Tape& t, const Mat& g) {
      t.grad(row) += g.colwise().sum();
    });
  }

  /// Softmax over the entries of an n x 1 column.
  Var softmax_column(Var a) {
    const Mat& x = value(a);
    Mat out(x.rows(), 1);
    if (x.rows() > 0) {
      const T mx = x.maxCoeff();
      out = (x.array() - mx).exp().matrix();
      out /= out.sum();
    }
    const int self = static_cast<int>(nodes_.size());
    return push(std::move(out), needs(a), [a, self](Tape& t, const Mat& g) {
      const Mat& y = t.nodes_[self].value;
      const T dot = g.cwiseProduct(y).sum();
      t.grad(a) += (y.array() * (g.array() - dot)).matrix();
    });
  }

  /// out_v = sum_{u in nb[v]} mu_vu h_u with mu_v. = softmax_u(leaky(f_v + g_u)).
  /// f and g are n x 1 (the two halves of the attention vector applied to h).
  Var attention(Var h, Var f, Var g, const Neighborhoods& nb, T slope) {
    const Mat& H = value(h);
    const Mat& F = value(f);
    const Mat& G = value(g);
    const auto n = H.rows();
    Mat out = Mat::Zero(n, H.cols());
    // mu and the pre-activation logits, flattened in neighborhood order.
    std::vector<T> mu;
    std::vector<T> z;
    for (Eigen::Index v = 0; v < n; ++v) {
      const auto& nv = nb[v];
      const std::size_t base = mu.size();
      T mx = -std::numeric_limits<T>::infinity();
      for (int u : nv) {
        const T zi = F(v, 0) + G(u, 0);
        z.push_back(zi);
        const T e = zi > 0 ? zi : slope * zi;
        mu.push_back(e);
        mx = std::max(mx, e);
      }
      T sum = 0;
      for (std::size_t k = base; k < mu.size(); ++k) {
        mu[k] = std::exp(mu[k] - mx);
        sum += mu[k];
      }
      for (std::size_t k = base; k < mu.size(); ++k) {
        mu[k] /= sum;
        out.row(v) += mu[k] * H.row(nv[k - base]);
      }
    }
    last_attention_ = mu;
    return push(std::move(out), needs(h, f) || needs(g),
                [h, f, g, &nb, slope, mu = std::move(mu), z = std::move(z)](Tape& t,
                                                                             const Mat& go) {
                  const Mat& H = t.value(h);
                  const bool gh = t.needs(h), gf = t.needs(f), gg = t.needs(g);
                  std::size_t k = 0;
                  std::vector<T> dmu;
                  for (Eigen::Index v = 0; v < H.rows(); ++v) {
                    const auto& nv = nb[v];
                    dmu.assign(nv.size(), T(0));
                    T weighted = 0;
                    for (std::size_t j = 0; j < nv.size(); ++j) {
                      if (gh) t.grad(h).row(nv[j]) += mu[k + j] * go.row(v);
                      dmu[j] = go.row(v).dot(H.row(nv[j]));
                      weighted += mu[k + j] * dmu[j];
                    }
                    for (std::size_t j = 0; j < nv.size(); ++j) {
                      const T de = mu[k + j] * (dmu[j] - weighted);
                      const T dz = z[k + j] > 0 ? de : slope * de;
                      if (gf) t.grad(f)(v, 0) += dz;
                      if (gg) t.grad(g)(nv[j], 0) += dz;
                    }
                    k += nv.size();
                  }
                });
  }

  /// K rounds of X <- (1 - alpha) M X + alpha X0, starting from X0.
  Var appnp(Var x0, const SparseRows& m, T alpha, int k) {
    Mat cur = value(x0);
    const Mat& base = value(x0);
    for (int it = 0; it < k; ++it) cur = (T(1) - alpha) * apply(m, cur) + alpha * base;
    return push(std::move(cur), needs(x0), [x0, &m, alpha, k](Tape& t, const Mat& g) {
      // Reverse the recursion: dY_{i-1} = (1 - alpha) Mᵀ dY_i, dX0 += alpha dY_i.
      Mat dy = g;
      Mat& dx0 = t.grad(x0);
      for (int it = k; it >= 1; --it) {
        dx0 += alpha * dy;
        dy = (T(1) - alpha) * apply_transposed(m, dy);
      }
      dx0 += dy;
    });
  }

  /// 1 x 1 result: sum of a ⊙ w for a constant w of the same shape.
  Var dot_const(Var a, Mat w) {
    Mat out(1, 1);
    out(0, 0) = value(a).cwiseProduct(w).sum();
    return push(std::move(out), needs(a), [a, w = std::move(w)](Tape& t, const Mat& g) {
      t.grad(a) += g(0, 0) * w;
    });
  }

  /// Back-propagates `seed` (same shape as `out`) and accumulates parameter
  /// gradients, in double, into `grad` (indexed like the parameter vector).
  void backward(Var out, const Mat& seed, std::span<double> grad) {
    for (auto& node : nodes_) {
      if (node.needs_grad) node.grad = Mat::Zero(node.value.rows(), node.value.cols());
    }
    nodes_[out.id].grad += seed;
    for (int i = out.id; i >= 0; --i) {
      Node& node = nodes_[i];
      if (!node.needs_grad) continue;
      if (node.is_param) {
        for (Eigen::Index j = 0; j < node.grad.size(); ++j) {
          grad[node.param_offset + j] += static_cast<double>(node.grad.data()[j]);
        }
      } else if (node.back) {
        node.back(*this, node.grad);
      }
    }
  }

  /// Attention coefficients of the most recent attention() call, for tests.
  const std::vector<T>& last_attention() const { return last_attention_; }

  static Mat apply(const SparseRows& m, const Mat& x) {
    Mat out = Mat::Zero(x.rows(), x.cols());
    for (std::size_t v = 0; v < m.size(); ++v) {
      for (auto [u, c] : m[v]) out.row(v) += static_cast<T>(c) * x.row(u);
    }
    return out;
  }

  static Mat apply_transposed(const SparseRows& m, const Mat& x) {
    Mat out = Mat::Zero(x.rows(), x.cols());
    for (std::size_t v = 0; v < m.size(); ++v) {
      for (auto [u, c] : m[v]) out.row(u) += static_cast<T>(c) * x.row(v);
    }
    return out;
  }

 private:
  using Backward = std::function<void(Tape&, const Mat&)>;

  struct Node {
    Mat value;
    Mat grad;
    Backward back;
    bool needs_grad = false;
    std::size_t param_offset = 0;
    bool is_param = false;
  };

  bool needs(Var a) const { return nodes_[a.id].needs_grad; }
  bool needs(Var a, Var b) const { return needs(a) || needs(b); }
  Mat& grad(Var a) { return nodes_[a.id].grad; }

  Var push(Mat value, bool needs_grad, Backward back) {
    const bool keep = record_ && needs_grad;
    nodes_.push_back(Node{std::move(value), Mat(), keep ? std::move(back) : nullptr, keep, 0, false});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  std::span<const double> params_;
  bool record_;
  std::vector<Node> nodes_;
  std::vector<T> last_attention_;
};

}  // namespace mbc::nn
