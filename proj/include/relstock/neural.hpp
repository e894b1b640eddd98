#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "relstock/market_data.hpp"
#include "relstock/relation_graph.hpp"

namespace relstock::nn {

/// Dense row-major tensor of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  /// Throws a numeric error naming `where` if any element is NaN or infinite.
  void require_finite(std::string_view where) const;

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

Tensor to_tensor(const market::SequenceBatch& batch);

enum class Activation { kLeakyRelu, kIdentity, kUnit };
enum class GraphMode { kStatic, kTemporal };

inline constexpr double kLeakySlope = 0.01;
inline constexpr std::size_t kDefaultHidden = 32;

double activate(Activation a, double x);
double activate_grad(Activation a, double x);
std::string_view to_string(Activation a);
std::string_view to_string(GraphMode m);
Activation parse_activation(std::string_view s);
GraphMode parse_graph_mode(std::string_view s);

enum class Gate { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };

/// Standard LSTM. The four gate matrices (each U x (I + U), acting on the
/// concatenation [x_t; h_{t-1}]) are stacked in Gate order.
struct LstmParams {
  std::size_t input_dim = market::kFeatureCount;
  std::size_t hidden_dim = kDefaultHidden;
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;

  Eigen::MatrixXd gate_weight(Gate g) const {
    return weights.middleRows(static_cast<Eigen::Index>(g) * hidden_dim, hidden_dim);
  }
  Eigen::VectorXd gate_bias(Gate g) const {
    return bias.segment(static_cast<Eigen::Index>(g) * hidden_dim, hidden_dim);
  }
};

struct GraphLayerParams {
  Eigen::VectorXd weights;  // one per relation slice
  double bias = 0.0;
  GraphMode mode = GraphMode::kTemporal;
  Activation activation = Activation::kLeakyRelu;
};

struct HeadParams {
  Eigen::VectorXd weights;
  double bias = 0.0;
};

struct ModelParams {
  LstmParams lstm;
  GraphLayerParams graph;
  HeadParams head;
  std::uint64_t seed = 0;

  std::size_t relation_count() const { return static_cast<std::size_t>(graph.weights.size()); }
  std::size_t parameter_count() const;
  /// Order: LSTM weights (column-major), LSTM bias, graph weights, graph bias,
  /// head weights, head bias.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  std::uint64_t fingerprint() const;

  bool operator==(const ModelParams& other) const;
};

/// Gradients in the same layout as ModelParams::flatten.
struct Gradients {
  Eigen::MatrixXd lstm_weights;
  Eigen::VectorXd lstm_bias;
  Eigen::VectorXd graph_weights;
  double graph_bias = 0.0;
  Eigen::VectorXd head_weights;
  double head_bias = 0.0;

  std::vector<double> flatten() const;
};

struct InitOptions {
  GraphMode mode = GraphMode::kTemporal;
  Activation activation = Activation::kLeakyRelu;
  std::size_t input_dim = market::kFeatureCount;
};

ModelParams init_params(std::size_t n_relations, std::size_t hidden, std::uint64_t seed,
                        const InitOptions& options = {});

/// The graph-free baseline: static mode, unit activation, to be used with
/// RelationTensor::identity so that aggregation returns its input.
ModelParams init_baseline_params(std::size_t hidden, std::uint64_t seed);

/// Per-step LSTM activations, columns are stocks.
struct LstmStep {
  Eigen::MatrixXd z;  // [x_t; h_{t-1}], (I + U) x N
  Eigen::MatrixXd gates;  // 4U x N activated gates, blocks i, f, o, candidate
  Eigen::MatrixXd cell, cell_tanh, hidden;
};

/// One aggregated neighbor term i <- j.
struct PairTerm {
  std::size_t i = 0;
  std::size_t j = 0;
  double pre_activation = 0.0;  // W^T A_ij + b
  double weight = 0.0;          // phi(pre) / d_j
  double similarity = 1.0;      // e_i^T e_j in temporal mode, 1 otherwise
  double degree = 1.0;          // d_j
};

struct GraphTrace {
  GraphMode mode = GraphMode::kStatic;
  Activation activation = Activation::kLeakyRelu;
  std::vector<PairTerm> terms;
  std::vector<double> slices;  // terms.size() x K, A_ij for each term
  std::size_t k = 0;
};

struct ForwardTrace {
  std::uint64_t params_fingerprint = 0;
  std::size_t n = 0;
  std::size_t seq_len = 0;
  std::vector<LstmStep> steps;
  Eigen::MatrixXd embeddings;  // U x N
  GraphTrace graph;
  Eigen::MatrixXd aggregated;  // U x N
  Eigen::VectorXd predictions;
};

/// Final hidden state per stock, N x U.
Tensor lstm_encode(const LstmParams& params, const Tensor& inputs);

/// Static aggregation: ebar_i = sum_j phi(W^T A_ij + b) / d_j * e_j over
/// connected j (self included).
Tensor gcn_aggregate(const GraphLayerParams& params, const Tensor& embeddings,
                     const graph::RelationTensor& rel);
/// Temporal aggregation: each term is additionally scaled by e_i^T e_j.
Tensor tgc_aggregate(const GraphLayerParams& params, const Tensor& embeddings,
                     const graph::RelationTensor& rel);

struct Prediction {
  std::vector<double> values;
  ForwardTrace trace;
};

Prediction predict(const ModelParams& params, const market::SequenceBatch& batch,
                   const graph::RelationTensor& rel);

double loss_mse(std::span<const double> predicted, std::span<const double> target);

Gradients backward(const ForwardTrace& trace, const ModelParams& params,
                   std::span<const double> target);

struct TrainOptions {
  std::size_t epochs = 10;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;
  std::size_t seq_len = market::kDefaultSeqLen;
  std::uint64_t shuffle_seed = 0;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_losses;
};

/// One Adam step per anchor in `anchors` (all stocks jointly), anchors
/// visited in a freshly shuffled order every epoch.
TrainResult train(const ModelParams& params, const market::FeatureTensor& data,
                  const graph::RelationTensor& rel, market::TimeRange anchors,
                  const TrainOptions& options);

void save_checkpoint(std::ostream& out, const ModelParams& params);
ModelParams load_checkpoint(std::istream& in);

}  // namespace relstock::nn
