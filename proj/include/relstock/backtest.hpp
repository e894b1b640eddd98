#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relstock/market_data.hpp"
#include "relstock/neural.hpp"
#include "relstock/relation_graph.hpp"

namespace relstock::backtest {

using market::TimeRange;

enum class WindowMode { kRolling, kGrowing };

std::string_view to_string(WindowMode m);
WindowMode parse_window_mode(std::string_view s);

/// Train/test ranges, as indices into the sequence of usable anchors.
struct Window {
  TimeRange train;
  TimeRange test;

  bool operator==(const Window&) const = default;
};

struct WindowPlan {
  WindowMode mode = WindowMode::kRolling;
  std::size_t train_len = 2000;
  std::size_t test_len = 200;
  std::vector<Window> windows;
};

WindowPlan plan_windows(std::size_t usable, std::size_t train_len = 2000,
                        std::size_t test_len = 200, WindowMode mode = WindowMode::kRolling);

struct StrategyConfig {
  std::size_t top_k = 1;
  double periods_per_year = 252.0;
  double risk_free = 0.0;
};

/// Indices of the top_k largest predictions; ties go to the smaller ticker.
std::vector<std::size_t> select_top_k(std::span<const double> predictions,
                                      std::span<const std::string> tickers, std::size_t top_k);

/// predictions/labels are [step][stock]. With horizon h > 1 only every h-th
/// step opens a position, so the returned series holds h-step returns.
std::vector<double> apply_strategy(const std::vector<std::vector<double>>& predictions,
                                   const std::vector<std::vector<double>>& labels,
                                   std::span<const std::string> tickers,
                                   const StrategyConfig& cfg, int horizon = 1);

/// Compound annual growth of the series, in percent.
double annualized_return(std::span<const double> returns, double periods_per_year);

/// (mean - risk_free) / sample standard deviation, per period, not annualized.
double sharpe_ratio(std::span<const double> returns, double risk_free = 0.0);

/// Equal-weight buy-and-hold of the whole panel, bought at each range start.
/// Range [s, e) contributes the returns from t to t + 1 for t in [s, e).
std::vector<double> buy_hold_benchmark(const market::AlignedPanel& panel,
                                       std::span<const TimeRange> ranges);

struct ModelConfig {
  std::size_t hidden = nn::kDefaultHidden;
  std::size_t seq_len = market::kDefaultSeqLen;
  std::size_t epochs = 10;
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  nn::Activation activation = nn::Activation::kLeakyRelu;
  nn::GraphMode mode = nn::GraphMode::kTemporal;
  std::uint64_t seed = 0;
};

enum class ModelKind { kBaseline, kGraph };

struct WindowRun {
  std::size_t window_index = 0;
  std::vector<std::size_t> train_anchors;  // panel timesteps
  std::vector<std::size_t> test_anchors;
  std::vector<std::vector<double>> train_predictions;  // [step][stock]
  std::vector<std::vector<double>> train_labels;
  std::vector<std::vector<double>> test_predictions;
  std::vector<std::vector<double>> test_labels;
  std::vector<double> epoch_losses;
  double test_mse = 0.0;
  double untrained_test_mse = 0.0;
  nn::ModelParams params;
  nn::ForwardTrace last_trace;  // forward pass at the final test anchor
};

/// Maps a window's anchor indices to panel timesteps for a given horizon and
/// sequence length. The last h - 1 training anchors are dropped so no training
/// label reaches past the first test anchor.
struct WindowTimes {
  TimeRange train;
  TimeRange test;
};
WindowTimes window_times(const Window& w, std::size_t steps, int horizon, std::size_t seq_len);

/// Trains a freshly initialized model (seeded by config seed and window index)
/// on the window's training anchors and predicts every test anchor.
/// For ModelKind::kBaseline `rel` only supplies the tickers.
WindowRun run_window(const Window& window, std::size_t window_index,
                     const market::AlignedPanel& panel, int horizon,
                     const graph::RelationTensor& rel, ModelKind kind, const ModelConfig& config);

struct EdgeStrength {
  std::size_t i = 0;
  std::size_t j = 0;
  std::string ticker_i;
  std::string ticker_j;
  std::string relation;
  double strength = 0.0;
};

std::vector<EdgeStrength> edge_strength_report(const nn::ForwardTrace& trace,
                                               const graph::RelationTensor& rel,
                                               std::size_t top_m);

inline constexpr std::size_t kAggregateWindow = std::numeric_limits<std::size_t>::max();

struct ReportRow {
  std::size_t window_index = kAggregateWindow;
  std::string segment;   // train | test
  std::string relation;  // relation selection, or "none"
  int horizon = 1;
  std::string strategy;  // buy-hold | lstm | tgc | gcn
  double annualized_return_pct = 0.0;
  double sharpe = std::numeric_limits<double>::quiet_NaN();  // NaN when undefined
  std::size_t n_steps = 0;

  bool operator==(const ReportRow& other) const;
};

struct SummaryRow {
  std::string name;  // benchmark | lstm | relation name | all
  std::string strategy;
  double annualized_return_pct = 0.0;
  double sharpe = std::numeric_limits<double>::quiet_NaN();
  double test_mse = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> returns;  // aggregate test returns across windows
};

struct BacktestConfig {
  int horizon = 1;
  WindowMode window_mode = WindowMode::kRolling;
  std::size_t train_len = 2000;
  std::size_t test_len = 200;
  ModelConfig model;
  StrategyConfig strategy;
  std::vector<std::string> selections{"all"};
  std::size_t edge_top_m = 20;
  std::size_t workers = 1;
  std::string config_hash;
};

struct BacktestReport {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::string> selections;
  int horizon = 1;
  WindowMode window_mode = WindowMode::kRolling;
  std::size_t window_count = 0;
  std::vector<ReportRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<EdgeStrength> edges;
};

/// Full pipeline: buy-hold benchmark, graph-free LSTM baseline and one graph
/// model per selection, over every window of the plan.
BacktestReport run_backtest(const market::AlignedPanel& panel, const graph::RelationFile& relations,
                            const BacktestConfig& config);

// Report files.
void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);
std::vector<ReportRow> read_report_csv(std::istream& in);
void write_report_json(std::ostream& out, std::span<const ReportRow> rows);
std::vector<ReportRow> read_report_json(std::istream& in);
void write_report_text(std::ostream& out, std::span<const ReportRow> rows);
void write_summary_json(std::ostream& out, const BacktestReport& report);
void write_edges_csv(std::ostream& out, std::span<const EdgeStrength> edges);
std::vector<EdgeStrength> read_edges_csv(std::istream& in);
void write_edges_text(std::ostream& out, std::span<const EdgeStrength> edges);

}  // namespace relstock::backtest
