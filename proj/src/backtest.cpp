#include "relstock/backtest.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "relstock/error.hpp"
#include "relstock/rng.hpp"

namespace relstock::backtest {

std::string_view to_string(WindowMode m) { return m == WindowMode::kRolling ? "rolling" : "growing"; }

WindowMode parse_window_mode(std::string_view s) {
  if (s == "rolling") return WindowMode::kRolling;
  if (s == "growing") return WindowMode::kGrowing;
  throw Error(ErrorKind::kConfiguration, "unknown window mode '" + std::string(s) + "'");
}

WindowPlan plan_windows(std::size_t usable, std::size_t train_len, std::size_t test_len,
                        WindowMode mode) {
  if (train_len == 0 || test_len == 0) {
    throw Error(ErrorKind::kConfiguration, "train and test lengths must be positive");
  }
  if (usable < train_len + test_len) {
    throw Error(ErrorKind::kInsufficientHistory,
                std::to_string(usable) + " usable steps cannot hold a " + std::to_string(train_len) +
                    "/" + std::to_string(test_len) + " window");
  }
  WindowPlan plan{mode, train_len, test_len, {}};
  const std::size_t count = (usable - train_len) / test_len;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t test_begin = train_len + k * test_len;
    const std::size_t train_begin = mode == WindowMode::kRolling ? k * test_len : 0;
    plan.windows.push_back(Window{{train_begin, test_begin}, {test_begin, test_begin + test_len}});
  }
  return plan;
}

std::vector<std::size_t> select_top_k(std::span<const double> predictions,
                                      std::span<const std::string> tickers, std::size_t top_k) {
  if (predictions.size() != tickers.size()) {
    throw Error(ErrorKind::kContract, "predictions and tickers differ in length");
  }
  if (top_k == 0 || top_k > predictions.size()) {
    throw Error(ErrorKind::kConfiguration, "top_k must be in [1, " +
                                               std::to_string(predictions.size()) + "]");
  }
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (predictions[a] != predictions[b]) return predictions[a] > predictions[b];
                      return tickers[a] < tickers[b];
                    });
  order.resize(top_k);
  return order;
}

std::vector<double> apply_strategy(const std::vector<std::vector<double>>& predictions,
                                   const std::vector<std::vector<double>>& labels,
                                   std::span<const std::string> tickers,
                                   const StrategyConfig& cfg, int horizon) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorKind::kContract, "predictions and labels cover different step counts");
  }
  if (horizon < 1) throw Error(ErrorKind::kConfiguration, "horizon must be >= 1");
  if (cfg.top_k == 0 || cfg.top_k > tickers.size()) {
    throw Error(ErrorKind::kConfiguration, "top_k " + std::to_string(cfg.top_k) +
                                               " exceeds universe size " +
                                               std::to_string(tickers.size()));
  }
  std::vector<double> out;
  for (std::size_t s = 0; s < predictions.size(); s += static_cast<std::size_t>(horizon)) {
    if (labels[s].size() != tickers.size()) {
      throw Error(ErrorKind::kContract, "label row width differs from the universe");
    }
    const auto picks = select_top_k(predictions[s], tickers, cfg.top_k);
    double sum = 0.0;
    for (std::size_t i : picks) sum += labels[s][i];
    out.push_back(sum / static_cast<double>(picks.size()));
  }
  return out;
}

double annualized_return(std::span<const double> returns, double periods_per_year) {
  if (returns.empty()) throw Error(ErrorKind::kInsufficientData, "empty return series");
  double log_growth = 0.0;
  for (double r : returns) {
    if (!(r > -1.0)) throw Error(ErrorKind::kBankruptcy, "period return <= -100%");
    log_growth += std::log1p(r);
  }
  return std::expm1(log_growth * periods_per_year / static_cast<double>(returns.size())) * 100.0;
}

double sharpe_ratio(std::span<const double> returns, double risk_free) {
  if (returns.size() < 2) {
    throw Error(ErrorKind::kInsufficientData, "Sharpe ratio needs at least 2 returns");
  }
  const double n = static_cast<double>(returns.size());
  const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  // Relative threshold so rounding noise in a constant series reads as zero.
  if (!(sd > 1e-14 * std::max(1.0, std::abs(mean)))) {
    throw Error(ErrorKind::kZeroVariance, "return series has zero variance");
  }
  return (mean - risk_free) / sd;
}

std::vector<double> buy_hold_benchmark(const market::AlignedPanel& panel,
                                       std::span<const TimeRange> ranges) {
  std::vector<double> out;
  const std::size_t n = panel.n();
  for (const TimeRange& r : ranges) {
    if (r.begin >= r.end || r.end >= panel.t()) {
      throw Error(ErrorKind::kContract, "benchmark range outside the panel");
    }
    double prev = 1.0;
    for (std::size_t t = r.begin; t < r.end; ++t) {
      double value = 0.0;
      for (std::size_t i = 0; i < n; ++i) value += panel.close(i, t + 1) / panel.close(i, r.begin);
      value /= static_cast<double>(n);
      out.push_back(value / prev - 1.0);
      prev = value;
    }
  }
  return out;
}

WindowTimes window_times(const Window& w, std::size_t steps, int horizon, std::size_t seq_len) {
  const TimeRange anchors = market::anchor_range(steps, horizon, seq_len);
  if (w.test.end > anchors.size()) {
    throw Error(ErrorKind::kInsufficientHistory, "window extends past the last usable anchor");
  }
  const std::size_t purge = static_cast<std::size_t>(horizon) - 1;
  WindowTimes times;
  times.train = TimeRange{anchors.begin + w.train.begin, anchors.begin + w.train.end};
  times.train.end = std::max(times.train.begin, times.train.end - std::min(purge, times.train.size()));
  times.test = TimeRange{anchors.begin + w.test.begin, anchors.begin + w.test.end};
  return times;
}

namespace {

double mse_of(const std::vector<std::vector<double>>& pred,
              const std::vector<std::vector<double>>& label) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    for (std::size_t i = 0; i < pred[s].size(); ++i) {
      const double r = pred[s][i] - label[s][i];
      sum += r * r;
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace

WindowRun run_window(const Window& window, std::size_t window_index,
                     const market::AlignedPanel& panel, int horizon,
                     const graph::RelationTensor& rel, ModelKind kind, const ModelConfig& config) {
  if (rel.tickers() != panel.tickers) {
    throw Error(ErrorKind::kContract, "relation tensor universe differs from the panel");
  }
  const WindowTimes times = window_times(window, panel.t(), horizon, config.seq_len);
  if (times.train.size() == 0) throw Error(ErrorKind::kNoData, "window has no training anchors");
  const TimeRange anchors = market::anchor_range(panel.t(), horizon, config.seq_len);
  const TimeRange norm_range{times.train.begin, anchors.begin + window.train.end};
  const market::FeatureTensor feat = market::build_features(panel, horizon, norm_range);

  const std::uint64_t init_seed = derive_seed(config.seed, streams::kParamInit, window_index);
  const graph::RelationTensor identity = graph::RelationTensor::identity(panel.tickers);
  const graph::RelationTensor& model_rel = kind == ModelKind::kBaseline ? identity : rel;
  const nn::ModelParams init =
      kind == ModelKind::kBaseline
          ? nn::init_baseline_params(config.hidden, init_seed)
          : nn::init_params(rel.k(), config.hidden, init_seed,
                            nn::InitOptions{config.mode, config.activation});

  nn::TrainOptions opts;
  opts.epochs = config.epochs;
  opts.learning_rate = config.learning_rate;
  opts.clip_norm = config.clip_norm;
  opts.seq_len = config.seq_len;
  opts.shuffle_seed = derive_seed(config.seed, streams::kShuffle, window_index);

  WindowRun run;
  run.window_index = window_index;
  const auto evaluate = [&](const nn::ModelParams& p, TimeRange range,
                            std::vector<std::vector<double>>& preds,
                            std::vector<std::vector<double>>& labels,
                            std::vector<std::size_t>& anchors_out, nn::ForwardTrace* last) {
    preds.clear();
    labels.clear();
    anchors_out.clear();
    for (std::size_t t = range.begin; t < range.end; ++t) {
      const auto batch = market::slice_sequence(feat, t, config.seq_len);
      auto pred = nn::predict(p, batch, model_rel);
      preds.push_back(std::move(pred.values));
      labels.push_back(batch.targets);
      anchors_out.push_back(t);
      if (last && t + 1 == range.end) *last = std::move(pred.trace);
    }
  };

  {
    std::vector<std::vector<double>> p0, l0;
    std::vector<std::size_t> a0;
    evaluate(init, times.test, p0, l0, a0, nullptr);
    run.untrained_test_mse = mse_of(p0, l0);
  }
  nn::TrainResult trained = nn::train(init, feat, model_rel, times.train, opts);
  run.params = std::move(trained.params);
  run.epoch_losses = std::move(trained.epoch_losses);
  evaluate(run.params, times.train, run.train_predictions, run.train_labels, run.train_anchors,
           nullptr);
  evaluate(run.params, times.test, run.test_predictions, run.test_labels, run.test_anchors,
           &run.last_trace);
  run.test_mse = mse_of(run.test_predictions, run.test_labels);
  return run;
}

std::vector<EdgeStrength> edge_strength_report(const nn::ForwardTrace& trace,
                                               const graph::RelationTensor& rel,
                                               std::size_t top_m) {
  if (trace.graph.mode != nn::GraphMode::kTemporal) {
    throw Error(ErrorKind::kMode, "edge strengths need a temporal-mode trace");
  }
  if (rel.n() != trace.n || rel.k() != trace.graph.k) {
    throw Error(ErrorKind::kContract, "relation tensor does not match the trace");
  }
  std::vector<EdgeStrength> all;
  all.reserve(trace.graph.terms.size());
  for (const nn::PairTerm& term : trace.graph.terms) {
    EdgeStrength e;
    e.i = term.i;
    e.j = term.j;
    e.ticker_i = rel.tickers()[term.i];
    e.ticker_j = rel.tickers()[term.j];
    for (std::size_t k = 0; k < rel.k(); ++k) {
      if (rel.at(term.i, term.j, k) == 0.0) continue;
      if (!e.relation.empty()) e.relation += '+';
      e.relation += rel.relations()[k];
    }
    e.strength = term.similarity * term.weight;
    all.push_back(std::move(e));
  }
  std::sort(all.begin(), all.end(), [](const EdgeStrength& a, const EdgeStrength& b) {
    const double sa = std::abs(a.strength);
    const double sb = std::abs(b.strength);
    if (sa != sb) return sa > sb;
    if (a.ticker_i != b.ticker_i) return a.ticker_i < b.ticker_i;
    return a.ticker_j < b.ticker_j;
  });
  if (all.size() > top_m) all.resize(top_m);
  return all;
}

bool ReportRow::operator==(const ReportRow& o) const {
  const bool sharpe_eq = (std::isnan(sharpe) && std::isnan(o.sharpe)) || sharpe == o.sharpe;
  return window_index == o.window_index && segment == o.segment && relation == o.relation &&
         horizon == o.horizon && strategy == o.strategy &&
         annualized_return_pct == o.annualized_return_pct && sharpe_eq && n_steps == o.n_steps;
}

namespace {

double sharpe_or_nan(std::span<const double> returns, double risk_free) {
  try {
    return sharpe_ratio(returns, risk_free);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kZeroVariance || e.kind() == ErrorKind::kInsufficientData) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    throw;
  }
}

struct ModelSlot {
  std::string name;      // summary row name
  std::string relation;  // report relation column
  std::string strategy;
  ModelKind kind;
  graph::RelationTensor rel;
};

// Runs fn(job) for job in [0, count) over `workers` threads.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t j = 0; j < count; ++j) fn(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t j = next++; j < count; j = next++) {
        try {
          fn(j);
        } catch (...) {
          errors[j] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

BacktestReport run_backtest(const market::AlignedPanel& panel, const graph::RelationFile& relations,
                            const BacktestConfig& config) {
  if (config.selections.empty()) throw Error(ErrorKind::kConfiguration, "no relation selected");
  const graph::RelationFile local = graph::restrict_relations(relations, panel.tickers);
  const TimeRange anchors = market::anchor_range(panel.t(), config.horizon, config.model.seq_len);
  const WindowPlan plan =
      plan_windows(anchors.size(), config.train_len, config.test_len, config.window_mode);
  if (config.strategy.top_k == 0 || config.strategy.top_k > panel.n()) {
    throw Error(ErrorKind::kConfiguration, "top_k exceeds the universe size");
  }

  std::vector<ModelSlot> slots;
  slots.push_back({"lstm", "none", "lstm", ModelKind::kBaseline,
                   graph::RelationTensor::identity(panel.tickers)});
  const std::string graph_strategy = config.model.mode == nn::GraphMode::kTemporal ? "tgc" : "gcn";
  for (const auto& sel : config.selections) {
    slots.push_back({sel, sel, graph_strategy, ModelKind::kGraph,
                     graph::build_relation_tensor(local.first, local.second, local.tickers, sel)});
  }

  const std::size_t n_windows = plan.windows.size();
  std::vector<WindowRun> runs(slots.size() * n_windows);
  parallel_for(runs.size(), config.workers, [&](std::size_t job) {
    const std::size_t s = job / n_windows;
    const std::size_t w = job % n_windows;
    try {
      runs[job] = run_window(plan.windows[w], w, panel, config.horizon, slots[s].rel,
                             slots[s].kind, config.model);
    } catch (const Error& e) {
      throw Error(e.kind(), "model " + slots[s].name + ", window " + std::to_string(w) + ": " +
                                e.what());
    }
  });

  BacktestReport report;
  report.seed = config.model.seed;
  report.config_hash = config.config_hash;
  report.selections = config.selections;
  report.horizon = config.horizon;
  report.window_mode = config.window_mode;
  report.window_count = n_windows;

  const double ppy = config.strategy.periods_per_year;
  const double model_ppy = ppy / static_cast<double>(config.horizon);
  const double rf = config.strategy.risk_free;
  const auto make_row = [&](std::size_t w, const char* segment, const std::string& relation,
                            const std::string& strategy, std::span<const double> returns,
                            double periods) {
    ReportRow row;
    row.window_index = w;
    row.segment = segment;
    row.relation = relation;
    row.horizon = config.horizon;
    row.strategy = strategy;
    row.annualized_return_pct = annualized_return(returns, periods);
    row.sharpe = sharpe_or_nan(returns, rf);
    row.n_steps = returns.size();
    return row;
  };

  // Aggregates, concatenated over windows: [slot][segment].
  std::vector<std::array<std::vector<double>, 2>> concat(slots.size());
  std::array<std::vector<double>, 2> bench_concat;
  std::vector<double> sq_err(slots.size(), 0.0);
  std::vector<std::size_t> sq_count(slots.size(), 0);

  for (std::size_t w = 0; w < n_windows; ++w) {
    const WindowTimes times = window_times(plan.windows[w], panel.t(), config.horizon,
                                           config.model.seq_len);
    const std::array<TimeRange, 2> ranges{times.train, times.test};
    const std::array<const char*, 2> names{"train", "test"};
    for (std::size_t seg = 0; seg < 2; ++seg) {
      const std::array<TimeRange, 1> r{ranges[seg]};
      const auto bench = buy_hold_benchmark(panel, r);
      report.rows.push_back(make_row(w, names[seg], "none", "buy-hold", bench, ppy));
      bench_concat[seg].insert(bench_concat[seg].end(), bench.begin(), bench.end());
      for (std::size_t s = 0; s < slots.size(); ++s) {
        const WindowRun& run = runs[s * n_windows + w];
        const auto& preds = seg == 0 ? run.train_predictions : run.test_predictions;
        const auto& labels = seg == 0 ? run.train_labels : run.test_labels;
        const auto returns = apply_strategy(preds, labels, panel.tickers, config.strategy,
                                            config.horizon);
        report.rows.push_back(
            make_row(w, names[seg], slots[s].relation, slots[s].strategy, returns, model_ppy));
        concat[s][seg].insert(concat[s][seg].end(), returns.begin(), returns.end());
        if (seg == 1) {
          sq_err[s] += run.test_mse * static_cast<double>(preds.size() * panel.n());
          sq_count[s] += preds.size() * panel.n();
        }
      }
    }
  }
  const std::array<const char*, 2> names{"train", "test"};
  for (std::size_t seg = 0; seg < 2; ++seg) {
    report.rows.push_back(
        make_row(kAggregateWindow, names[seg], "none", "buy-hold", bench_concat[seg], ppy));
    for (std::size_t s = 0; s < slots.size(); ++s) {
      report.rows.push_back(make_row(kAggregateWindow, names[seg], slots[s].relation,
                                     slots[s].strategy, concat[s][seg], model_ppy));
    }
  }

  SummaryRow bench_row{"benchmark", "buy-hold", annualized_return(bench_concat[1], ppy),
                       sharpe_or_nan(bench_concat[1], rf),
                       std::numeric_limits<double>::quiet_NaN(), bench_concat[1]};
  report.summary.push_back(std::move(bench_row));
  for (std::size_t s = 0; s < slots.size(); ++s) {
    SummaryRow row;
    row.name = slots[s].name;
    row.strategy = slots[s].strategy;
    row.annualized_return_pct = annualized_return(concat[s][1], model_ppy);
    row.sharpe = sharpe_or_nan(concat[s][1], rf);
    row.test_mse = sq_err[s] / static_cast<double>(sq_count[s]);
    row.returns = concat[s][1];
    report.summary.push_back(std::move(row));
  }

  if (config.model.mode == nn::GraphMode::kTemporal && slots.size() > 1) {
    const WindowRun& last = runs[1 * n_windows + (n_windows - 1)];
    report.edges = edge_strength_report(last.last_trace, slots[1].rel, config.edge_top_m);
  }
  return report;
}

}  // namespace relstock::backtest
