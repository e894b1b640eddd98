#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relstock::market {

/// Calendar date, parsed from and printed as ISO-8601 `YYYY-MM-DD`.
struct Date {
  std::chrono::sys_days value{};

  static Date parse(std::string_view text);
  static Date from_ymd(int y, unsigned m, unsigned d);
  std::string to_string() const;

  auto operator<=>(const Date&) const = default;
};

struct PriceSeries {
  std::string ticker;
  std::vector<Date> dates;
  std::vector<double> closes;
};

/// N tickers observed on a common date axis of length T. Closes are stored
/// row-major, one row per ticker.
struct AlignedPanel {
  std::vector<std::string> tickers;
  std::vector<Date> dates;
  std::vector<double> closes;

  std::size_t n() const { return tickers.size(); }
  std::size_t t() const { return dates.size(); }
  double close(std::size_t i, std::size_t t) const { return closes[i * dates.size() + t]; }
};

struct TimeRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(std::size_t t) const { return t >= begin && t < end; }
  bool operator==(const TimeRange&) const = default;
};

inline constexpr std::size_t kFeatureCount = 5;
inline constexpr std::array<std::size_t, 4> kMovingAverageWindows{5, 10, 20, 30};
/// First timestep at which the feature vector and label may be used.
inline constexpr std::size_t kWarmup = 30;
inline constexpr std::size_t kDefaultMinLength = 2230;
inline constexpr std::size_t kDefaultSeqLen = 8;

/// Per-stock, per-step features [close, MA5, MA10, MA20, MA30] on normalized
/// closes, plus horizon return labels. Entries outside `valid` are NaN.
struct FeatureTensor {
  std::size_t n = 0;
  std::size_t steps = 0;
  int horizon = 1;
  std::vector<double> features;  // n * steps * kFeatureCount
  std::vector<double> labels;    // n * steps
  std::vector<std::uint8_t> valid;
  std::vector<double> norm_factors;

  double feature(std::size_t i, std::size_t t, std::size_t f) const {
    return features[(i * steps + t) * kFeatureCount + f];
  }
  double label(std::size_t i, std::size_t t) const { return labels[i * steps + t]; }
  bool is_valid(std::size_t i, std::size_t t) const { return valid[i * steps + t] != 0; }
};

/// Inputs for one prediction step: N stocks, seq_len steps ending at anchor_t.
struct SequenceBatch {
  std::size_t n = 0;
  std::size_t seq_len = 0;
  std::size_t anchor_t = 0;
  std::vector<double> inputs;  // n * seq_len * kFeatureCount
  std::vector<double> targets;

  double input(std::size_t i, std::size_t l, std::size_t f) const {
    return inputs[(i * seq_len + l) * kFeatureCount + f];
  }
};

std::vector<PriceSeries> parse_prices(std::istream& in);
std::vector<PriceSeries> ingest_prices(const std::filesystem::path& path);
void write_prices(std::ostream& out, std::span<const PriceSeries> series);

AlignedPanel align_universe(std::span<const PriceSeries> series,
                            std::size_t min_length = kDefaultMinLength);

/// Normalization factors are each stock's maximum close over `norm_range`.
FeatureTensor build_features(const AlignedPanel& panel, int horizon, TimeRange norm_range);
FeatureTensor build_features(const AlignedPanel& panel, int horizon);

SequenceBatch slice_sequence(const FeatureTensor& feat, std::size_t anchor_t,
                             std::size_t seq_len = kDefaultSeqLen);

/// Anchors t for which every stock has a full valid window and a label:
/// [kWarmup + seq_len - 1, steps - horizon).
TimeRange anchor_range(std::size_t steps, int horizon, std::size_t seq_len);

}  // namespace relstock::market
