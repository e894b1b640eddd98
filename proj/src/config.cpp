#include "relstock/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "relstock/error.hpp"
#include "text_util.hpp"

namespace relstock::cli {

namespace {

std::string text(bool v) { return v ? "true" : "false"; }
std::string text(double v) { return detail::format_double(v); }
std::string text(const std::string& v) { return v; }
template <typename T>
  requires std::is_integral_v<T>
std::string text(T v) {
  return std::to_string(v);
}

[[noreturn]] void bad(std::string_view key, std::string_view value, const char* expected) {
  throw Error(ErrorKind::kConfiguration, "'" + std::string(key) + "': expected " + expected +
                                             ", got '" + std::string(value) + "'");
}

void read(std::string_view, std::string_view v, std::string& out) { out = std::string(v); }

void read(std::string_view key, std::string_view v, bool& out) {
  if (v == "true" || v == "1") {
    out = true;
  } else if (v == "false" || v == "0") {
    out = false;
  } else {
    bad(key, v, "true or false");
  }
}

void read(std::string_view key, std::string_view v, double& out) {
  if (!detail::parse_double(v, out) || !std::isfinite(out)) bad(key, v, "a number");
}

template <typename T>
  requires std::is_integral_v<T>
void read(std::string_view key, std::string_view v, T& out) {
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) bad(key, v, "an integer");
}

struct Field {
  std::function<void(RunConfig&, std::string_view, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
  bool affects_results;
};

#define RELSTOCK_FIELD(name, affects)                                                    \
  {                                                                                      \
    #name, Field {                                                                       \
      [](RunConfig& c, std::string_view k, std::string_view v) { read(k, v, c.name); },  \
          [](const RunConfig& c) { return text(c.name); }, affects                        \
    }                                                                                    \
  }

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table{
      RELSTOCK_FIELD(prices, true),
      RELSTOCK_FIELD(graph, true),
      RELSTOCK_FIELD(relations, true),
      RELSTOCK_FIELD(out, false),
      RELSTOCK_FIELD(relation, true),
      RELSTOCK_FIELD(sweep_relations, true),
      RELSTOCK_FIELD(horizon, true),
      RELSTOCK_FIELD(min_length, true),
      RELSTOCK_FIELD(hidden, true),
      RELSTOCK_FIELD(seq_len, true),
      RELSTOCK_FIELD(epochs, true),
      RELSTOCK_FIELD(lr, true),
      RELSTOCK_FIELD(seed, true),
      RELSTOCK_FIELD(activation, true),
      RELSTOCK_FIELD(graph_mode, true),
      RELSTOCK_FIELD(clip, true),
      RELSTOCK_FIELD(window_mode, true),
      RELSTOCK_FIELD(train_len, true),
      RELSTOCK_FIELD(test_len, true),
      RELSTOCK_FIELD(top_k, true),
      RELSTOCK_FIELD(periods_per_year, true),
      RELSTOCK_FIELD(risk_free, true),
      RELSTOCK_FIELD(edge_top_m, true),
      RELSTOCK_FIELD(workers, false),
      RELSTOCK_FIELD(structure, true),
      RELSTOCK_FIELD(stocks, true),
      RELSTOCK_FIELD(steps, true),
      RELSTOCK_FIELD(leaders, true),
      RELSTOCK_FIELD(lag, true),
      RELSTOCK_FIELD(signal_sigma, true),
      RELSTOCK_FIELD(noise_sigma, true),
      RELSTOCK_FIELD(growth_rate, true),
      RELSTOCK_FIELD(shuffle_graph, true),
  };
  return table;
}

#undef RELSTOCK_FIELD

const Field& field(std::string_view key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return f;
  }
  throw Error(ErrorKind::kConfiguration, "unknown config key '" + std::string(key) + "'");
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  field(key).set(*this, key, detail::trim(value));
}

std::string RunConfig::get(std::string_view key) const { return field(key).get(*this); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : fields()) out.push_back(name);
    return out;
  }();
  return names;
}

void RunConfig::load(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = line;
    if (const auto hash = row.find('#'); hash != std::string_view::npos) row = row.substr(0, hash);
    row = detail::trim(row);
    if (row.empty()) continue;
    const auto eq = row.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::kConfiguration,
                  "config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set(detail::trim(row.substr(0, eq)), row.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(ErrorKind::kConfiguration,
                  "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kFileNotFound, path.string());
  load(in);
}

std::string RunConfig::echo() const {
  std::string out;
  for (const auto& [name, f] : fields()) out += name + " = " + f.get(*this) + "\n";
  return out;
}

std::string RunConfig::result_hash() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const auto& [name, f] : fields()) {
    if (!f.affects_results) continue;
    for (char c : name + "=" + f.get(*this) + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001B3ULL;
    }
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunConfig::validate_backtest() const {
  const auto fail = [](const std::string& msg) { throw Error(ErrorKind::kConfiguration, msg); };
  if (horizon != 1 && horizon != 5 && horizon != 10 && horizon != 20) {
    fail("horizon must be one of 1, 5, 10, 20");
  }
  if (relation != graph::kAllSelection && !graph::parse_relation(relation)) {
    fail("unknown relation '" + relation + "'");
  }
  if (hidden < 1 || seq_len < 1) fail("hidden and seq_len must be >= 1");
  if (!(lr >= 0.0)) fail("lr must be >= 0");
  if (!(clip >= 0.0)) fail("clip must be >= 0");
  if (train_len < 1 || test_len < 1) fail("train_len and test_len must be >= 1");
  if (top_k < 1) fail("top_k must be >= 1");
  if (!(periods_per_year > 0.0)) fail("periods_per_year must be positive");
  if (workers < 1) fail("workers must be >= 1");
  (void)nn::parse_activation(activation);
  (void)nn::parse_graph_mode(graph_mode);
  (void)backtest::parse_window_mode(window_mode);
}

backtest::BacktestConfig RunConfig::backtest_config() const {
  validate_backtest();
  backtest::BacktestConfig c;
  c.horizon = horizon;
  c.window_mode = backtest::parse_window_mode(window_mode);
  c.train_len = train_len;
  c.test_len = test_len;
  c.model.hidden = hidden;
  c.model.seq_len = seq_len;
  c.model.epochs = epochs;
  c.model.learning_rate = lr;
  c.model.clip_norm = clip;
  c.model.activation = nn::parse_activation(activation);
  c.model.mode = nn::parse_graph_mode(graph_mode);
  c.model.seed = seed;
  c.strategy.top_k = top_k;
  c.strategy.periods_per_year = periods_per_year;
  c.strategy.risk_free = risk_free;
  if (sweep_relations) {
    c.selections.clear();
    for (auto r : graph::kAllRelations) c.selections.emplace_back(graph::to_string(r));
    c.selections.emplace_back(graph::kAllSelection);
  } else {
    c.selections = {relation};
  }
  c.edge_top_m = edge_top_m;
  c.workers = workers;
  c.config_hash = result_hash();
  return c;
}

synth::SyntheticMarketSpec RunConfig::synth_spec() const {
  synth::SyntheticMarketSpec s;
  s.n = stocks;
  s.steps = steps;
  s.seed = seed;
  s.structure = synth::parse_structure(structure);
  s.leaders = leaders;
  s.lag = lag;
  s.signal_sigma = signal_sigma;
  s.noise_sigma = noise_sigma;
  s.shuffle_graph = shuffle_graph;
  s.growth_rate = growth_rate;
  synth::validate(s);
  return s;
}

}  // namespace relstock::cli
