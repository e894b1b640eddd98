#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "relstock/backtest.hpp"
#include "relstock/error.hpp"
#include "text_util.hpp"

namespace relstock::backtest {

using nlohmann::json;

namespace {

constexpr std::string_view kReportHeader =
    "window_index,segment,relation,horizon,strategy,annualized_return_pct,sharpe,n_steps";
constexpr std::string_view kEdgesHeader = "rank,ticker_i,ticker_j,relation,strength";

std::string window_label(std::size_t w) {
  return w == kAggregateWindow ? "all" : std::to_string(w);
}

std::string number(double v) { return std::isnan(v) ? "nan" : detail::format_double(v); }

double parse_number(std::string_view s, std::size_t line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  if (!detail::parse_double(s, v)) {
    throw Error(ErrorKind::kSchema, "line " + std::to_string(line) + ": bad number '" +
                                        std::string(s) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::kSchema, "line " + std::to_string(line) + ": bad integer '" +
                                        std::string(s) + "'");
  }
  return v;
}

json nullable(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double from_nullable(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

}  // namespace

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows) {
  out << kReportHeader << '\n';
  for (const auto& r : rows) {
    out << window_label(r.window_index) << ',' << r.segment << ',' << r.relation << ','
        << r.horizon << ',' << r.strategy << ',' << number(r.annualized_return_pct) << ','
        << number(r.sharpe) << ',' << r.n_steps << '\n';
  }
}

std::vector<ReportRow> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::rstrip_cr(line) != kReportHeader) {
    throw Error(ErrorKind::kSchema, "report csv: missing or wrong header");
  }
  std::vector<ReportRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::rstrip_cr(line);
    if (text.empty()) continue;
    const auto f = detail::split(text, ',');
    if (f.size() != 8) {
      throw Error(ErrorKind::kSchema, "line " + std::to_string(line_no) + ": expected 8 fields");
    }
    ReportRow r;
    r.window_index = f[0] == "all" ? kAggregateWindow : parse_count(f[0], line_no);
    r.segment = std::string(f[1]);
    if (r.segment != "train" && r.segment != "test") {
      throw Error(ErrorKind::kSchema, "line " + std::to_string(line_no) + ": bad segment");
    }
    r.relation = std::string(f[2]);
    r.horizon = static_cast<int>(parse_count(f[3], line_no));
    r.strategy = std::string(f[4]);
    r.annualized_return_pct = parse_number(f[5], line_no);
    r.sharpe = parse_number(f[6], line_no);
    r.n_steps = parse_count(f[7], line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_report_json(std::ostream& out, std::span<const ReportRow> rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"window_index", window_label(r.window_index)},
                   {"segment", r.segment},
                   {"relation", r.relation},
                   {"horizon", r.horizon},
                   {"strategy", r.strategy},
                   {"annualized_return_pct", nullable(r.annualized_return_pct)},
                   {"sharpe", nullable(r.sharpe)},
                   {"n_steps", r.n_steps}});
  }
  out << arr.dump(1) << '\n';
}

std::vector<ReportRow> read_report_json(std::istream& in) {
  std::vector<ReportRow> rows;
  try {
    const json arr = json::parse(in);
    if (!arr.is_array()) throw Error(ErrorKind::kSchema, "report json must be an array");
    for (const auto& o : arr) {
      ReportRow r;
      const auto w = o.at("window_index").get<std::string>();
      r.window_index = w == "all" ? kAggregateWindow : parse_count(w, 0);
      r.segment = o.at("segment").get<std::string>();
      r.relation = o.at("relation").get<std::string>();
      r.horizon = o.at("horizon").get<int>();
      r.strategy = o.at("strategy").get<std::string>();
      r.annualized_return_pct = from_nullable(o.at("annualized_return_pct"));
      r.sharpe = from_nullable(o.at("sharpe"));
      r.n_steps = o.at("n_steps").get<std::size_t>();
      rows.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("report json: ") + e.what());
  }
  return rows;
}

void write_report_text(std::ostream& out, std::span<const ReportRow> rows) {
  const std::vector<std::string> header{"window", "segment", "relation", "h",
                                        "strategy", "return %/yr", "sharpe", "steps"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::ostringstream ret, sh;
    ret << std::fixed << std::setprecision(2) << r.annualized_return_pct;
    if (std::isnan(r.sharpe)) {
      sh << "n/a";
    } else {
      sh << std::fixed << std::setprecision(4) << r.sharpe;
    }
    cells.push_back({window_label(r.window_index), r.segment, r.relation,
                     std::to_string(r.horizon), r.strategy, ret.str(), sh.str(),
                     std::to_string(r.n_steps)});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  const auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << "  ";
      // Text columns left-aligned, numbers right-aligned.
      if (c == 1 || c == 2 || c == 4) {
        out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      } else {
        out << std::right << std::setw(static_cast<int>(width[c])) << row[c];
      }
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : cells) emit(row);
  out << std::right;
}

void write_summary_json(std::ostream& out, const BacktestReport& report) {
  json doc;
  doc["format"] = "relstock-summary";
  doc["version"] = 1;
  doc["metadata"] = {{"seed", report.seed},
                     {"config_hash", report.config_hash},
                     {"selections", report.selections},
                     {"horizon", report.horizon},
                     {"window_mode", std::string(to_string(report.window_mode))},
                     {"windows", report.window_count},
                     {"sharpe_convention", "per period, unannualized, sample stddev"}};
  json table = json::array();
  for (const auto& row : report.summary) {
    table.push_back({{"row", row.name},
                     {"strategy", row.strategy},
                     {"annualized_return_pct", nullable(row.annualized_return_pct)},
                     {"sharpe", nullable(row.sharpe)},
                     {"test_mse", nullable(row.test_mse)},
                     {"returns", row.returns}});
  }
  doc["table"] = std::move(table);
  out << doc.dump(1) << '\n';
}

void write_edges_csv(std::ostream& out, std::span<const EdgeStrength> edges) {
  out << kEdgesHeader << '\n';
  for (std::size_t r = 0; r < edges.size(); ++r) {
    const auto& e = edges[r];
    out << r + 1 << ',' << e.ticker_i << ',' << e.ticker_j << ',' << e.relation << ','
        << number(e.strength) << '\n';
  }
}

std::vector<EdgeStrength> read_edges_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::rstrip_cr(line) != kEdgesHeader) {
    throw Error(ErrorKind::kSchema, "edges csv: missing or wrong header");
  }
  std::vector<EdgeStrength> edges;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::rstrip_cr(line);
    if (text.empty()) continue;
    const auto f = detail::split(text, ',');
    if (f.size() != 5) {
      throw Error(ErrorKind::kSchema, "line " + std::to_string(line_no) + ": expected 5 fields");
    }
    if (parse_count(f[0], line_no) != edges.size() + 1) {
      throw Error(ErrorKind::kSchema, "line " + std::to_string(line_no) + ": ranks out of order");
    }
    EdgeStrength e;
    e.ticker_i = std::string(f[1]);
    e.ticker_j = std::string(f[2]);
    e.relation = std::string(f[3]);
    e.strength = parse_number(f[4], line_no);
    edges.push_back(std::move(e));
  }
  return edges;
}

void write_edges_text(std::ostream& out, std::span<const EdgeStrength> edges) {
  out << "edge strengths:\n";
  if (edges.empty()) {
    out << "  none\n";
    return;
  }
  std::size_t wi = 8, wj = 8, wr = 8;
  for (const auto& e : edges) {
    wi = std::max(wi, e.ticker_i.size());
    wj = std::max(wj, e.ticker_j.size());
    wr = std::max(wr, e.relation.size());
  }
  out << std::left << "  " << std::setw(5) << "rank" << "  " << std::setw(static_cast<int>(wi))
      << "ticker_i" << "  " << std::setw(static_cast<int>(wj)) << "ticker_j" << "  "
      << std::setw(static_cast<int>(wr)) << "relation" << "  strength\n";
  for (std::size_t r = 0; r < edges.size(); ++r) {
    const auto& e = edges[r];
    out << "  " << std::setw(5) << r + 1 << "  " << std::setw(static_cast<int>(wi)) << e.ticker_i
        << "  " << std::setw(static_cast<int>(wj)) << e.ticker_j << "  "
        << std::setw(static_cast<int>(wr)) << e.relation << "  " << std::right
        << std::scientific << std::setprecision(6) << e.strength << std::left << '\n';
  }
  out << std::right << std::defaultfloat;
}

}  // namespace relstock::backtest
