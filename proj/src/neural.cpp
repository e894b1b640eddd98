#include "relstock/neural.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "relstock/error.hpp"
#include "relstock/rng.hpp"

namespace relstock::nn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using graph::RelationTensor;

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  std::size_t total = 1;
  for (std::size_t e : shape_) total *= e;
  data_.assign(total, 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  std::size_t total = 1;
  for (std::size_t e : shape_) total *= e;
  if (total != data_.size()) {
    throw Error(ErrorKind::kContract, "tensor data length does not match its shape");
  }
}

void Tensor::require_finite(std::string_view where) const {
  for (std::size_t idx = 0; idx < data_.size(); ++idx) {
    if (!std::isfinite(data_[idx])) {
      throw Error(ErrorKind::kNumeric, std::string(where) + ": non-finite value at flat index " +
                                           std::to_string(idx));
    }
  }
}

Tensor to_tensor(const market::SequenceBatch& batch) {
  return Tensor({batch.n, batch.seq_len, market::kFeatureCount}, batch.inputs);
}

double activate(Activation a, double x) {
  switch (a) {
    case Activation::kLeakyRelu: return x > 0.0 ? x : kLeakySlope * x;
    case Activation::kIdentity: return x;
    case Activation::kUnit: return 1.0;
  }
  return x;
}

double activate_grad(Activation a, double x) {
  switch (a) {
    case Activation::kLeakyRelu: return x > 0.0 ? 1.0 : kLeakySlope;
    case Activation::kIdentity: return 1.0;
    case Activation::kUnit: return 0.0;
  }
  return 1.0;
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kLeakyRelu: return "leaky_relu";
    case Activation::kIdentity: return "identity";
    case Activation::kUnit: return "unit";
  }
  return "?";
}

std::string_view to_string(GraphMode m) { return m == GraphMode::kStatic ? "static" : "temporal"; }

Activation parse_activation(std::string_view s) {
  if (s == "leaky_relu") return Activation::kLeakyRelu;
  if (s == "identity") return Activation::kIdentity;
  if (s == "unit") return Activation::kUnit;
  throw Error(ErrorKind::kConfiguration, "unknown activation '" + std::string(s) + "'");
}

GraphMode parse_graph_mode(std::string_view s) {
  if (s == "static") return GraphMode::kStatic;
  if (s == "temporal") return GraphMode::kTemporal;
  throw Error(ErrorKind::kConfiguration, "unknown graph mode '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Parameters

std::size_t ModelParams::parameter_count() const {
  return static_cast<std::size_t>(lstm.weights.size() + lstm.bias.size() + graph.weights.size() +
                                  1 + head.weights.size() + 1);
}

namespace {

template <typename Derived>
void append(std::vector<double>& out, const Eigen::DenseBase<Derived>& m) {
  const auto& d = m.derived();
  out.insert(out.end(), d.data(), d.data() + d.size());
}

template <typename Derived>
std::size_t take(std::span<const double> flat, std::size_t pos, Eigen::DenseBase<Derived>& m) {
  auto& d = m.derived();
  std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), d.size(), d.data());
  return pos + static_cast<std::size_t>(d.size());
}

}  // namespace

std::vector<double> ModelParams::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  append(out, lstm.weights);
  append(out, lstm.bias);
  append(out, graph.weights);
  out.push_back(graph.bias);
  append(out, head.weights);
  out.push_back(head.bias);
  return out;
}

void ModelParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw Error(ErrorKind::kContract, "flat parameter vector has the wrong length");
  }
  std::size_t pos = 0;
  pos = take(flat, pos, lstm.weights);
  pos = take(flat, pos, lstm.bias);
  pos = take(flat, pos, graph.weights);
  graph.bias = flat[pos++];
  pos = take(flat, pos, head.weights);
  head.bias = flat[pos++];
}

std::uint64_t ModelParams::fingerprint() const {
  // FNV-1a over 64-bit words; only used to detect stale traces.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  const auto mix = [&h](std::uint64_t word) {
    h ^= word;
    h *= 0x100000001B3ULL;
    h ^= h >> 29;
  };
  const auto mix_all = [&mix](const double* data, std::size_t count) {
    for (std::size_t k = 0; k < count; ++k) mix(std::bit_cast<std::uint64_t>(data[k]));
  };
  mix_all(lstm.weights.data(), static_cast<std::size_t>(lstm.weights.size()));
  mix_all(lstm.bias.data(), static_cast<std::size_t>(lstm.bias.size()));
  mix_all(graph.weights.data(), static_cast<std::size_t>(graph.weights.size()));
  mix(std::bit_cast<std::uint64_t>(graph.bias));
  mix_all(head.weights.data(), static_cast<std::size_t>(head.weights.size()));
  mix(std::bit_cast<std::uint64_t>(head.bias));
  mix(seed);
  mix(static_cast<std::uint64_t>(graph.mode) << 8 | static_cast<std::uint64_t>(graph.activation));
  mix(lstm.input_dim << 32 | lstm.hidden_dim);
  return h;
}

bool ModelParams::operator==(const ModelParams& other) const {
  return lstm.input_dim == other.lstm.input_dim && lstm.hidden_dim == other.lstm.hidden_dim &&
         relation_count() == other.relation_count() && graph.mode == other.graph.mode &&
         graph.activation == other.graph.activation && seed == other.seed &&
         flatten() == other.flatten();
}

std::vector<double> Gradients::flatten() const {
  std::vector<double> out;
  append(out, lstm_weights);
  append(out, lstm_bias);
  append(out, graph_weights);
  out.push_back(graph_bias);
  append(out, head_weights);
  out.push_back(head_bias);
  return out;
}

ModelParams init_params(std::size_t n_relations, std::size_t hidden, std::uint64_t seed,
                        const InitOptions& options) {
  if (n_relations < 1 || hidden < 1 || options.input_dim < 1) {
    throw Error(ErrorKind::kConfiguration, "model needs K >= 1, U >= 1 and input_dim >= 1");
  }
  Rng rng(seed);
  const auto u = static_cast<Index>(hidden);
  const auto in = static_cast<Index>(options.input_dim);
  const auto xavier = [&rng](Eigen::Ref<MatrixXd> m, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-limit, limit);
    }
  };

  ModelParams p;
  p.seed = seed;
  p.lstm.input_dim = options.input_dim;
  p.lstm.hidden_dim = hidden;
  p.lstm.weights.resize(4 * u, in + u);
  p.lstm.bias = VectorXd::Zero(4 * u);
  for (Index g = 0; g < 4; ++g) {
    xavier(p.lstm.weights.middleRows(g * u, u), static_cast<double>(in + u),
           static_cast<double>(u));
  }
  p.lstm.bias.segment(static_cast<Index>(Gate::kForget) * u, u).setOnes();

  p.graph.weights.resize(static_cast<Index>(n_relations));
  MatrixXd gw(static_cast<Index>(n_relations), 1);
  xavier(gw, static_cast<double>(n_relations), 1.0);
  p.graph.weights = gw.col(0);
  p.graph.bias = 0.0;
  p.graph.mode = options.mode;
  p.graph.activation = options.activation;

  MatrixXd hw(u, 1);
  xavier(hw, static_cast<double>(hidden), 1.0);
  p.head.weights = hw.col(0);
  p.head.bias = 0.0;
  return p;
}

ModelParams init_baseline_params(std::size_t hidden, std::uint64_t seed) {
  return init_params(1, hidden, seed, InitOptions{GraphMode::kStatic, Activation::kUnit});
}

// ---------------------------------------------------------------------------
// Forward

namespace {

// In place: logistic on the first `sig_rows` rows, tanh on the rest. tanh is
// computed through the vectorized exp; absolute error stays near 1e-16.
void activate_gates(Eigen::Ref<MatrixXd> a, Index sig_rows) {
  auto sig = a.topRows(sig_rows).array();
  sig = 1.0 / (1.0 + (-sig).exp());
  auto th = a.bottomRows(a.rows() - sig_rows).array();
  th = 1.0 - 2.0 / ((2.0 * th).exp() + 1.0);
}

void tanh_into(const MatrixXd& x, MatrixXd& out) {
  out.array() = 1.0 - 2.0 / ((2.0 * x.array()).exp() + 1.0);
}

// inputs: n x seq_len x input_dim row-major. Returns the final hidden state (U x N).
MatrixXd run_lstm(const LstmParams& p, std::span<const double> inputs, std::size_t n,
                  std::size_t seq_len, std::vector<LstmStep>* steps) {
  const auto u = static_cast<Index>(p.hidden_dim);
  const auto in = static_cast<Index>(p.input_dim);
  const auto cols = static_cast<Index>(n);
  if (p.weights.rows() != 4 * u || p.weights.cols() != in + u || p.bias.size() != 4 * u) {
    throw Error(ErrorKind::kContract, "LSTM parameter shapes are inconsistent");
  }
  // Without a trace only the latest step is kept.
  std::vector<LstmStep> local;
  std::vector<LstmStep>& out = steps ? *steps : local;
  const MatrixXd zero = MatrixXd::Zero(u, cols);
  for (std::size_t l = 0; l < seq_len; ++l) {
    if (steps || out.empty()) out.emplace_back();
    LstmStep& cur = out.back();
    const MatrixXd& h_prev = l == 0 ? zero : (steps ? out[l - 1].hidden : cur.hidden);
    const MatrixXd& c_prev = l == 0 ? zero : (steps ? out[l - 1].cell : cur.cell);
    cur.z.resize(in + u, cols);
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = inputs.data() + (i * seq_len + l) * p.input_dim;
      for (Index f = 0; f < in; ++f) cur.z(f, static_cast<Index>(i)) = x[f];
    }
    cur.z.bottomRows(u) = h_prev;
    cur.gates.noalias() = p.weights * cur.z;
    cur.gates.colwise() += p.bias;
    activate_gates(cur.gates, 3 * u);
    const auto ig = cur.gates.middleRows(0, u).array();
    const auto fg = cur.gates.middleRows(u, u).array();
    const auto og = cur.gates.middleRows(2 * u, u).array();
    const auto cand = cur.gates.middleRows(3 * u, u).array();
    cur.cell = (fg * c_prev.array() + ig * cand).matrix();
    tanh_into(cur.cell, cur.cell_tanh);
    cur.hidden = (og * cur.cell_tanh.array()).matrix();
  }
  return out.back().hidden;
}

// e: U x N. Returns ebar (U x N).
MatrixXd run_graph(const GraphLayerParams& p, const MatrixXd& e, const RelationTensor& rel,
                   GraphTrace* trace) {
  const std::size_t n = static_cast<std::size_t>(e.cols());
  const std::size_t k = rel.k();
  if (rel.n() != n) {
    throw Error(ErrorKind::kContract, "relation tensor has " + std::to_string(rel.n()) +
                                          " stocks, embeddings have " + std::to_string(n));
  }
  if (static_cast<std::size_t>(p.weights.size()) != k) {
    throw Error(ErrorKind::kContract, "graph layer has " + std::to_string(p.weights.size()) +
                                          " relation weights, tensor has K=" + std::to_string(k));
  }
  if (trace) {
    trace->mode = p.mode;
    trace->activation = p.activation;
    trace->k = k;
    trace->terms.clear();
    trace->slices.clear();
  }
  MatrixXd out = MatrixXd::Zero(e.rows(), e.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!rel.connected(i, j)) continue;
      const auto a = rel.slices(i, j);
      double pre = p.bias;
      for (std::size_t s = 0; s < k; ++s) pre += p.weights(static_cast<Index>(s)) * a[s];
      const double degree = static_cast<double>(rel.degree(j));
      const double weight = activate(p.activation, pre) / degree;
      const double sim = p.mode == GraphMode::kTemporal
                             ? e.col(static_cast<Index>(i)).dot(e.col(static_cast<Index>(j)))
                             : 1.0;
      out.col(static_cast<Index>(i)) += (sim * weight) * e.col(static_cast<Index>(j));
      if (trace) {
        trace->terms.push_back(PairTerm{i, j, pre, weight, sim, degree});
        trace->slices.insert(trace->slices.end(), a.begin(), a.end());
      }
    }
  }
  return out;
}

MatrixXd embeddings_from(const Tensor& e) {
  if (e.rank() != 2) throw Error(ErrorKind::kContract, "embeddings must be N x U");
  e.require_finite("graph layer input");
  MatrixXd m(static_cast<Index>(e.extent(1)), static_cast<Index>(e.extent(0)));
  for (std::size_t i = 0; i < e.extent(0); ++i) {
    for (std::size_t u = 0; u < e.extent(1); ++u) m(static_cast<Index>(u), static_cast<Index>(i)) = e(i, u);
  }
  return m;
}

Tensor tensor_from(const MatrixXd& m) {
  Tensor t({static_cast<std::size_t>(m.cols()), static_cast<std::size_t>(m.rows())});
  for (Index i = 0; i < m.cols(); ++i) {
    for (Index u = 0; u < m.rows(); ++u) t(static_cast<std::size_t>(i), static_cast<std::size_t>(u)) = m(u, i);
  }
  return t;
}

}  // namespace

Tensor lstm_encode(const LstmParams& params, const Tensor& inputs) {
  if (inputs.rank() != 3 || inputs.extent(2) != params.input_dim || inputs.extent(1) < 1) {
    throw Error(ErrorKind::kContract, "LSTM input must be N x L x input_dim with L >= 1");
  }
  inputs.require_finite("LSTM input");
  const MatrixXd h = run_lstm(params, inputs.data(), inputs.extent(0), inputs.extent(1), nullptr);
  return tensor_from(h);
}

Tensor gcn_aggregate(const GraphLayerParams& params, const Tensor& embeddings,
                     const RelationTensor& rel) {
  if (params.mode != GraphMode::kStatic) {
    throw Error(ErrorKind::kMode, "gcn_aggregate needs a static-mode graph layer");
  }
  return tensor_from(run_graph(params, embeddings_from(embeddings), rel, nullptr));
}

Tensor tgc_aggregate(const GraphLayerParams& params, const Tensor& embeddings,
                     const RelationTensor& rel) {
  if (params.mode != GraphMode::kTemporal) {
    throw Error(ErrorKind::kMode, "tgc_aggregate needs a temporal-mode graph layer");
  }
  return tensor_from(run_graph(params, embeddings_from(embeddings), rel, nullptr));
}

Prediction predict(const ModelParams& params, const market::SequenceBatch& batch,
                   const RelationTensor& rel) {
  if (batch.n != rel.n()) {
    throw Error(ErrorKind::kContract, "batch and relation tensor disagree on N");
  }
  if (batch.seq_len < 1) throw Error(ErrorKind::kContract, "sequence length must be >= 1");
  for (double v : batch.inputs) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kNumeric, "non-finite model input");
  }
  Prediction out;
  ForwardTrace& tr = out.trace;
  tr.params_fingerprint = params.fingerprint();
  tr.n = batch.n;
  tr.seq_len = batch.seq_len;
  tr.steps.reserve(batch.seq_len);
  tr.embeddings = run_lstm(params.lstm, batch.inputs, batch.n, batch.seq_len, &tr.steps);
  tr.aggregated = run_graph(params.graph, tr.embeddings, rel, &tr.graph);
  if (params.head.weights.size() != tr.aggregated.rows()) {
    throw Error(ErrorKind::kContract, "head width does not match the hidden size");
  }
  tr.predictions = (params.head.weights.transpose() * tr.aggregated).transpose();
  tr.predictions.array() += params.head.bias;
  out.values.assign(tr.predictions.data(), tr.predictions.data() + tr.predictions.size());
  for (double v : out.values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kNumeric, "non-finite prediction");
  }
  return out;
}

double loss_mse(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.size() != target.size()) {
    throw Error(ErrorKind::kContract, "prediction and target lengths differ");
  }
  if (predicted.empty()) throw Error(ErrorKind::kContract, "empty prediction");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double r = predicted[i] - target[i];
    sum += r * r;
  }
  return sum / static_cast<double>(predicted.size());
}

// ---------------------------------------------------------------------------
// Backward

Gradients backward(const ForwardTrace& trace, const ModelParams& params,
                   std::span<const double> target) {
  if (trace.params_fingerprint != params.fingerprint()) {
    throw Error(ErrorKind::kContract, "trace was produced with different parameters");
  }
  if (target.size() != trace.n) throw Error(ErrorKind::kContract, "target length differs from N");

  const auto u = static_cast<Index>(params.lstm.hidden_dim);
  const Index n = static_cast<Index>(trace.n);
  const std::size_t k = trace.graph.k;

  Gradients g;
  g.lstm_weights = MatrixXd::Zero(params.lstm.weights.rows(), params.lstm.weights.cols());
  g.lstm_bias = VectorXd::Zero(params.lstm.bias.size());
  g.graph_weights = VectorXd::Zero(static_cast<Index>(k));
  g.head_weights = VectorXd::Zero(u);

  // Head.
  VectorXd dy(n);
  for (Index i = 0; i < n; ++i) {
    dy(i) = 2.0 * (trace.predictions(i) - target[static_cast<std::size_t>(i)]) / static_cast<double>(n);
  }
  g.head_weights = trace.aggregated * dy;
  g.head_bias = dy.sum();
  const MatrixXd d_agg = params.head.weights * dy.transpose();  // U x N

  // Graph layer.
  const MatrixXd& e = trace.embeddings;
  MatrixXd d_e = MatrixXd::Zero(u, n);
  const bool temporal = trace.graph.mode == GraphMode::kTemporal;
  for (std::size_t t = 0; t < trace.graph.terms.size(); ++t) {
    const PairTerm& term = trace.graph.terms[t];
    const auto i = static_cast<Index>(term.i);
    const auto j = static_cast<Index>(term.j);
    const double coef = term.similarity * term.weight;
    d_e.col(j) += coef * d_agg.col(i);
    const double d_coef = d_agg.col(i).dot(e.col(j));
    double d_weight = d_coef;
    if (temporal) {
      d_weight = d_coef * term.similarity;
      const double d_sim = d_coef * term.weight;
      d_e.col(i) += d_sim * e.col(j);
      d_e.col(j) += d_sim * e.col(i);
    }
    const double d_pre = d_weight * activate_grad(trace.graph.activation, term.pre_activation) / term.degree;
    const double* a = trace.graph.slices.data() + t * k;
    for (std::size_t s = 0; s < k; ++s) g.graph_weights(static_cast<Index>(s)) += d_pre * a[s];
    g.graph_bias += d_pre;
  }

  // LSTM, backpropagation through time.
  const MatrixXd& w = params.lstm.weights;
  const MatrixXd zero_cell = MatrixXd::Zero(u, n);
  MatrixXd d_h = d_e;
  MatrixXd d_c = MatrixXd::Zero(u, n);
  MatrixXd d_a(4 * u, n);
  for (std::size_t l = trace.steps.size(); l-- > 0;) {
    const LstmStep& s = trace.steps[l];
    const auto ct = s.cell_tanh.array();
    const auto ig = s.gates.middleRows(0, u).array();
    const auto fg = s.gates.middleRows(u, u).array();
    const auto og = s.gates.middleRows(2 * u, u).array();
    const auto cand = s.gates.middleRows(3 * u, u).array();
    const auto c_prev = (l > 0 ? trace.steps[l - 1].cell : zero_cell).array();
    d_c.array() += d_h.array() * og * (1.0 - ct * ct);
    d_a.middleRows(0, u).array() = d_c.array() * cand * ig * (1.0 - ig);
    d_a.middleRows(u, u).array() = d_c.array() * c_prev * fg * (1.0 - fg);
    d_a.middleRows(2 * u, u).array() = d_h.array() * ct * og * (1.0 - og);
    d_a.middleRows(3 * u, u).array() = d_c.array() * ig * (1.0 - cand * cand);
    g.lstm_weights.noalias() += d_a * s.z.transpose();
    g.lstm_bias += d_a.rowwise().sum();
    if (l == 0) break;
    d_h.noalias() = w.rightCols(u).transpose() * d_a;
    d_c.array() *= fg;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Training

TrainResult train(const ModelParams& params, const market::FeatureTensor& data,
                  const RelationTensor& rel, market::TimeRange anchors,
                  const TrainOptions& options) {
  if (anchors.begin >= anchors.end) throw Error(ErrorKind::kNoData, "empty training anchor set");
  if (anchors.end > data.steps) throw Error(ErrorKind::kContract, "training anchors exceed the data");

  TrainResult result{params, {}};
  ModelParams& p = result.params;
  if (options.epochs == 0) return result;

  // Slice every anchor once; batches are reused across epochs.
  std::vector<market::SequenceBatch> batches;
  batches.reserve(anchors.size());
  for (std::size_t t = anchors.begin; t < anchors.end; ++t) {
    batches.push_back(market::slice_sequence(data, t, options.seq_len));
  }

  std::vector<double> flat = p.flatten();
  std::vector<double> m(flat.size(), 0.0);
  std::vector<double> v(flat.size(), 0.0);
  std::vector<std::size_t> order(batches.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(options.shuffle_seed);
  double beta1_t = 1.0;
  double beta2_t = 1.0;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t idx : order) {
      const auto& batch = batches[idx];
      const Prediction pred = predict(p, batch, rel);
      epoch_loss += loss_mse(pred.values, batch.targets);
      std::vector<double> grad = backward(pred.trace, p, batch.targets).flatten();

      double norm_sq = 0.0;
      for (double x : grad) norm_sq += x * x;
      const double norm = std::sqrt(norm_sq);
      if (!std::isfinite(norm)) throw Error(ErrorKind::kNumeric, "non-finite gradient");
      if (options.clip_norm > 0.0 && norm > options.clip_norm) {
        const double scale = options.clip_norm / norm;
        for (double& x : grad) x *= scale;
      }

      beta1_t *= options.beta1;
      beta2_t *= options.beta2;
      for (std::size_t q = 0; q < flat.size(); ++q) {
        m[q] = options.beta1 * m[q] + (1.0 - options.beta1) * grad[q];
        v[q] = options.beta2 * v[q] + (1.0 - options.beta2) * grad[q] * grad[q];
        const double m_hat = m[q] / (1.0 - beta1_t);
        const double v_hat = v[q] / (1.0 - beta2_t);
        flat[q] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
      }
      p.assign(flat);
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(batches.size()));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

void save_checkpoint(std::ostream& out, const ModelParams& params) {
  nlohmann::json doc;
  doc["format"] = "relstock-model";
  doc["version"] = 1;
  doc["seed"] = params.seed;
  doc["input_dim"] = params.lstm.input_dim;
  doc["hidden_dim"] = params.lstm.hidden_dim;
  doc["relations"] = params.relation_count();
  doc["mode"] = std::string(to_string(params.graph.mode));
  doc["activation"] = std::string(to_string(params.graph.activation));
  doc["values"] = params.flatten();
  out << doc.dump() << '\n';
}

ModelParams load_checkpoint(std::istream& in) {
  try {
    const auto doc = nlohmann::json::parse(in);
    if (doc.at("format") != "relstock-model" || doc.at("version") != 1) {
      throw Error(ErrorKind::kSchema, "not a version 1 model checkpoint");
    }
    InitOptions opts;
    opts.input_dim = doc.at("input_dim").get<std::size_t>();
    opts.mode = parse_graph_mode(doc.at("mode").get<std::string>());
    opts.activation = parse_activation(doc.at("activation").get<std::string>());
    ModelParams p = init_params(doc.at("relations").get<std::size_t>(),
                                doc.at("hidden_dim").get<std::size_t>(), 0, opts);
    p.seed = doc.at("seed").get<std::uint64_t>();
    const auto values = doc.at("values").get<std::vector<double>>();
    if (values.size() != p.parameter_count()) {
      throw Error(ErrorKind::kSchema, "checkpoint value count does not match its shape");
    }
    p.assign(values);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("checkpoint: ") + e.what());
  }
}

}  // namespace relstock::nn
