#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "relstock/backtest.hpp"
#include "relstock/synth.hpp"

namespace relstock::cli {

/// Fully resolved run configuration. Read from a flat `key = value` file
/// (`#` starts a comment), then overridden by command-line flags.
struct RunConfig {
  std::string prices;
  std::string graph;
  std::string relations;
  std::string out = "out";

  std::string relation = "all";
  bool sweep_relations = false;
  int horizon = 1;
  std::size_t min_length = market::kDefaultMinLength;

  std::size_t hidden = nn::kDefaultHidden;
  std::size_t seq_len = market::kDefaultSeqLen;
  std::size_t epochs = 10;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::string activation = "leaky_relu";
  std::string graph_mode = "temporal";
  double clip = 5.0;

  std::string window_mode = "rolling";
  std::size_t train_len = 2000;
  std::size_t test_len = 200;

  std::size_t top_k = 1;
  double periods_per_year = 252.0;
  double risk_free = 0.0;
  std::size_t edge_top_m = 20;
  std::size_t workers = 1;

  // Synthetic market generation.
  std::string structure = "lead-lag";
  std::size_t stocks = 20;
  std::size_t steps = 2600;
  std::size_t leaders = 5;
  std::size_t lag = 1;
  double signal_sigma = 0.02;
  double noise_sigma = 0.01;
  double growth_rate = 0.01;
  bool shuffle_graph = false;

  /// Sets one key from its text form; unknown keys and malformed values
  /// raise a configuration error.
  void set(std::string_view key, std::string_view value);
  void load(std::istream& in);
  void load_file(const std::filesystem::path& path);

  static const std::vector<std::string>& keys();
  std::string get(std::string_view key) const;

  /// Every key in fixed order, `key = value` per line.
  std::string echo() const;
  /// Hash of the settings that influence results (paths and workers excluded).
  std::string result_hash() const;

  void validate_backtest() const;

  backtest::BacktestConfig backtest_config() const;
  synth::SyntheticMarketSpec synth_spec() const;
};

}  // namespace relstock::cli
