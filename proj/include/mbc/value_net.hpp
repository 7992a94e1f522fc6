#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mbc/game.hpp"
#include "mbc/tape.hpp"

namespace mbc {

enum class Precision { Single, Double };
enum class HeadKind { Value, Q };
enum class Mode { Train, Eval };

struct ModelConfig {
  int embed_dim = 32;       // d_e
  int hidden_dim = 64;      // d_h
  int head_dim = 16;        // d_v
  int attention_blocks = 2; // n_a
  int heads = 2;            // n_h
  int pool_replicas = 2;    // n_p
  double alpha = 0.2;       // APPNP teleport
  int propagation_steps = 12;  // K
  double dropout = 0.2;
  double leaky_slope = 0.2;
  bool normalize = true;
  HeadKind head = HeadKind::Value;
  Precision precision = Precision::Single;

  /// Desk-scale defaults with K set to the largest graph of the distribution.
  static ModelConfig desk(int max_nodes);
  /// The full-size preset (d_e=200, d_h=400, d_v=100, n_a=7, n_h=3, n_p=3).
  static ModelConfig full(int max_nodes);

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Offsets of every tensor in the flat parameter vector.
struct ParamLayout {
  struct Linear {
    nn::Slice w;  // in x out
    nn::Slice b;  // 1 x out
  };
  struct Norm {
    nn::Slice gamma;
    nn::Slice beta;
  };
  struct Head {
    nn::Slice theta;   // d_e x d_v
    nn::Slice a_self;  // d_v x 1
    nn::Slice a_nbr;   // d_v x 1
    nn::Slice out;     // d_v x d_e
  };
  struct Block {
    std::vector<Head> heads;
    Norm norm1;
    Linear ff1, ff2;
    Norm norm2;
  };
  struct Pool {
    Linear gate1, gate2;
    Linear proj1, proj2;
  };

  Linear input;
  std::vector<Block> blocks;
  std::vector<Pool> pools;
  Linear out1;
  Norm out_norm1;
  Linear out2;
  Norm out_norm2;
  Linear out3;
  std::size_t total = 0;

  explicit ParamLayout(const ModelConfig& cfg);
};

std::size_t parameter_count(const ModelConfig& cfg);

struct ValueNetwork {
  ModelConfig config;
  std::vector<double> params;

  bool operator==(const ValueNetwork&) const = default;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, unit gains.
ValueNetwork init_network(const ModelConfig& cfg, std::uint64_t seed);

inline constexpr int kNodeFeatures = 7;

/// Per node: normalized weight, attacked flag, local degree profile.
nn::Matrix<double> node_features(const GameState& s);

/// Context features appended to the pooled vector: n, budgets, budgets / n, total weight.
nn::Matrix<double> context_features(const GameState& s);

/// Symmetric-normalized adjacency with self loops; row v aggregates over v and
/// its predecessors.
nn::SparseRows normalized_adjacency(const Graph& g);
/// Per node: itself plus its predecessors.
nn::Neighborhoods attention_neighborhoods(const Graph& g);

/// Standalone propagation on plain matrices.
nn::Matrix<double> appnp_propagate(const nn::Matrix<double>& x0, const Graph& g, double alpha,
                                   int k);

struct ForwardResult {
  double value = 0.0;
  std::vector<double> save_probability;  // aligned with graph nodes
};

ForwardResult value_forward(const GameState& s, const ValueNetwork& net, Mode mode = Mode::Eval,
                            std::uint64_t dropout_seed = 0);

/// Per legal node action values (eval mode). Rejects terminal states.
std::map<NodeId, double> q_forward(const GameState& s, const ValueNetwork& net);

struct ValueSample {
  GameState state;
  double target = 0.0;
};

struct QSample {
  GameState state;
  NodeId action = 0;
  double target = 0.0;
};

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Mean squared error over the batch and its gradient. Sample i uses dropout
/// seed derive_seed(seed, "dropout", i); `threads` > 1 splits samples across
/// workers and sums per-sample gradients in index order.
LossGradient loss_and_gradient(const ValueNetwork& net, std::span<const ValueSample> batch,
                               Mode mode, std::uint64_t seed, int threads = 1);

/// Serial reference for loss_and_gradient.
LossGradient loss_and_gradient_serial(const ValueNetwork& net,
                                      std::span<const ValueSample> batch, Mode mode,
                                      std::uint64_t seed);

LossGradient q_loss_and_gradient(const ValueNetwork& net, std::span<const QSample> batch,
                                 Mode mode, std::uint64_t seed, int threads = 1);

/// Mean squared error in eval mode.
double mean_squared_error(const ValueNetwork& net, std::span<const ValueSample> data,
                          int threads = 1);

namespace detail {

/// The network pieces, exposed so tests can probe them in isolation.
template <typename T>
struct Trunk {
  typename nn::Tape<T>::Var embeddings;  // n x d_e after propagation
  typename nn::Tape<T>::Var node_input;  // n x (d_e + 2) fed to pooling
};

template <typename T>
typename nn::Tape<T>::Var attention_block(nn::Tape<T>& tape, typename nn::Tape<T>::Var x,
                                          const ParamLayout::Block& block,
                                          const nn::Neighborhoods& nb, const ModelConfig& cfg);

template <typename T>
typename nn::Tape<T>::Var graph_pool(nn::Tape<T>& tape, typename nn::Tape<T>::Var x,
                                     const std::vector<ParamLayout::Pool>& pools);

}  // namespace detail

}  // namespace mbc
