#include "relstock/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "relstock/error.hpp"
#include "text_util.hpp"

namespace relstock::market {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool parse_uint(std::string_view s, unsigned& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Date Date::from_ymd(int y, unsigned m, unsigned d) {
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) {
    throw Error(ErrorKind::kParse, "invalid calendar date " + std::to_string(y) + "-" +
                                       std::to_string(m) + "-" + std::to_string(d));
  }
  return Date{std::chrono::sys_days{ymd}};
}

Date Date::parse(std::string_view text) {
  unsigned y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      !parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) ||
      !parse_uint(text.substr(8, 2), d)) {
    throw Error(ErrorKind::kParse, "expected YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  return from_ymd(static_cast<int>(y), m, d);
}

std::string Date::to_string() const {
  const std::chrono::year_month_day ymd{value};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::vector<PriceSeries> parse_prices(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorKind::kParse, "line 1: missing header");
  ++line_no;
  if (detail::rstrip_cr(line) != "date,ticker,close") {
    throw Error(ErrorKind::kParse, "line 1: expected header 'date,ticker,close'");
  }

  std::map<std::string, std::map<Date, double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = detail::rstrip_cr(line);
    if (row.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    const auto fields = detail::split(row, ',');
    if (fields.size() != 3) throw Error(ErrorKind::kParse, where + "expected 3 fields");
    if (fields[1].empty()) throw Error(ErrorKind::kParse, where + "empty ticker");

    Date date;
    try {
      date = Date::parse(fields[0]);
    } catch (const Error& e) {
      throw Error(ErrorKind::kParse, where + e.what());
    }
    double close = 0.0;
    if (!detail::parse_double(fields[2], close)) {
      throw Error(ErrorKind::kParse, where + "malformed close '" + std::string(fields[2]) + "'");
    }
    if (!std::isfinite(close) || close <= 0.0) {
      throw Error(ErrorKind::kValidation, where + "close must be positive");
    }
    auto& per_ticker = rows[std::string(fields[1])];
    if (!per_ticker.emplace(date, close).second) {
      throw Error(ErrorKind::kValidation, where + "duplicate date " + date.to_string() +
                                              " for ticker " + std::string(fields[1]));
    }
  }

  std::vector<PriceSeries> out;
  out.reserve(rows.size());
  for (auto& [ticker, by_date] : rows) {
    PriceSeries s{ticker, {}, {}};
    s.dates.reserve(by_date.size());
    s.closes.reserve(by_date.size());
    for (const auto& [date, close] : by_date) {
      s.dates.push_back(date);
      s.closes.push_back(close);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PriceSeries> ingest_prices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kFileNotFound, path.string());
  return parse_prices(in);
}

void write_prices(std::ostream& out, std::span<const PriceSeries> series) {
  out << "date,ticker,close\n";
  for (const auto& s : series) {
    for (std::size_t t = 0; t < s.dates.size(); ++t) {
      out << s.dates[t].to_string() << ',' << s.ticker << ',' << detail::format_double(s.closes[t])
          << '\n';
    }
  }
}

AlignedPanel align_universe(std::span<const PriceSeries> series, std::size_t min_length) {
  if (series.size() < 2) {
    throw Error(ErrorKind::kUniverseTooSmall, "need at least 2 series, got " +
                                                  std::to_string(series.size()));
  }
  std::vector<const PriceSeries*> kept;
  for (const auto& s : series) {
    if (s.dates.size() >= min_length) kept.push_back(&s);
  }
  if (kept.size() < 2) {
    throw Error(ErrorKind::kUniverseTooSmall,
                std::to_string(kept.size()) + " tickers have at least " +
                    std::to_string(min_length) + " observations");
  }
  std::sort(kept.begin(), kept.end(),
            [](const PriceSeries* a, const PriceSeries* b) { return a->ticker < b->ticker; });
  for (std::size_t k = 1; k < kept.size(); ++k) {
    if (kept[k]->ticker == kept[k - 1]->ticker) {
      throw Error(ErrorKind::kValidation, "ticker " + kept[k]->ticker + " appears twice");
    }
  }

  std::vector<Date> axis = kept.front()->dates;
  for (std::size_t k = 1; k < kept.size(); ++k) {
    std::vector<Date> next;
    std::set_intersection(axis.begin(), axis.end(), kept[k]->dates.begin(), kept[k]->dates.end(),
                          std::back_inserter(next));
    axis = std::move(next);
  }
  // A shorter common calendar would make a second pass drop every ticker.
  if (axis.size() < min_length) {
    throw Error(ErrorKind::kUniverseTooSmall,
                "common calendar has " + std::to_string(axis.size()) + " dates, need " +
                    std::to_string(min_length));
  }

  AlignedPanel panel;
  panel.dates = axis;
  panel.closes.reserve(kept.size() * axis.size());
  for (const PriceSeries* s : kept) {
    panel.tickers.push_back(s->ticker);
    std::size_t cursor = 0;
    for (const Date& d : axis) {
      while (s->dates[cursor] < d) ++cursor;
      panel.closes.push_back(s->closes[cursor]);
    }
  }
  return panel;
}

FeatureTensor build_features(const AlignedPanel& panel, int horizon, TimeRange norm_range) {
  if (horizon < 1) throw Error(ErrorKind::kConfiguration, "horizon must be >= 1");
  const std::size_t n = panel.n();
  const std::size_t steps = panel.t();
  const auto h = static_cast<std::size_t>(horizon);
  if (steps < kWarmup + h + 1) {
    throw Error(ErrorKind::kInsufficientHistory,
                "need at least " + std::to_string(kWarmup + h + 1) + " steps for horizon " +
                    std::to_string(horizon) + ", panel has " + std::to_string(steps));
  }
  if (norm_range.begin >= norm_range.end || norm_range.end > steps) {
    throw Error(ErrorKind::kContract, "normalization range outside the panel");
  }

  FeatureTensor feat;
  feat.n = n;
  feat.steps = steps;
  feat.horizon = horizon;
  feat.features.assign(n * steps * kFeatureCount, kNaN);
  feat.labels.assign(n * steps, kNaN);
  feat.valid.assign(n * steps, 0);
  feat.norm_factors.resize(n);

  std::vector<double> normalized(steps);
  for (std::size_t i = 0; i < n; ++i) {
    double factor = 0.0;
    for (std::size_t t = norm_range.begin; t < norm_range.end; ++t) {
      factor = std::max(factor, panel.close(i, t));
    }
    feat.norm_factors[i] = factor;
    for (std::size_t t = 0; t < steps; ++t) normalized[t] = panel.close(i, t) / factor;

    for (std::size_t t = kWarmup; t + h < steps; ++t) {
      double* row = &feat.features[(i * steps + t) * kFeatureCount];
      row[0] = normalized[t];
      for (std::size_t w = 0; w < kMovingAverageWindows.size(); ++w) {
        const std::size_t k = kMovingAverageWindows[w];
        double sum = 0.0;
        for (std::size_t s = t + 1 - k; s <= t; ++s) sum += normalized[s];
        row[w + 1] = sum / static_cast<double>(k);
      }
      const double p0 = panel.close(i, t);
      feat.labels[i * steps + t] = (panel.close(i, t + h) - p0) / p0;
      feat.valid[i * steps + t] = 1;
    }
  }
  return feat;
}

FeatureTensor build_features(const AlignedPanel& panel, int horizon) {
  return build_features(panel, horizon, TimeRange{0, panel.t()});
}

SequenceBatch slice_sequence(const FeatureTensor& feat, std::size_t anchor_t,
                             std::size_t seq_len) {
  if (seq_len == 0) throw Error(ErrorKind::kConfiguration, "sequence length must be >= 1");
  if (anchor_t >= feat.steps || anchor_t + 1 < seq_len) {
    throw Error(ErrorKind::kWindowInvalid, "anchor " + std::to_string(anchor_t) +
                                               " with length " + std::to_string(seq_len) +
                                               " falls outside the tensor");
  }
  const std::size_t start = anchor_t + 1 - seq_len;
  SequenceBatch batch;
  batch.n = feat.n;
  batch.seq_len = seq_len;
  batch.anchor_t = anchor_t;
  batch.inputs.resize(feat.n * seq_len * kFeatureCount);
  batch.targets.resize(feat.n);
  for (std::size_t i = 0; i < feat.n; ++i) {
    for (std::size_t l = 0; l < seq_len; ++l) {
      const std::size_t t = start + l;
      if (!feat.is_valid(i, t)) {
        throw Error(ErrorKind::kWindowInvalid,
                    "stock " + std::to_string(i) + " invalid at timestep " + std::to_string(t));
      }
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        batch.inputs[(i * seq_len + l) * kFeatureCount + f] = feat.feature(i, t, f);
      }
    }
    batch.targets[i] = feat.label(i, anchor_t);
  }
  return batch;
}

TimeRange anchor_range(std::size_t steps, int horizon, std::size_t seq_len) {
  const std::size_t begin = kWarmup + seq_len - 1;
  const auto h = static_cast<std::size_t>(horizon);
  if (steps < h || steps - h <= begin) return TimeRange{begin, begin};
  return TimeRange{begin, steps - h};
}

}  // namespace relstock::market
