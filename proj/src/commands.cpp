#include "relstock/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "relstock/error.hpp"
#include "text_util.hpp"

namespace relstock::cli {

namespace fs = std::filesystem;

void OutputSet::add(std::string name, std::string content) {
  files_.emplace_back(std::move(name), std::move(content));
}

void OutputSet::commit() const {
  std::vector<fs::path> written;
  try {
    fs::create_directories(dir_);
    for (const auto& [name, content] : files_) {
      const fs::path path = dir_ / name;
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      if (!f) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
      written.push_back(path);
      f << content;
      f.close();
      if (!f) throw Error(ErrorKind::kIo, "failed writing " + path.string());
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

namespace {

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "n/a";
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

graph::RelationFile relations_for(const RunConfig& config, const market::AlignedPanel& panel) {
  if (!config.relations.empty()) return graph::read_relation_file(config.relations);
  if (config.graph.empty()) {
    throw Error(ErrorKind::kConfiguration, "backtest needs 'relations' or 'graph'");
  }
  const auto g = graph::resolve_entities(graph::load_graph(config.graph));
  graph::RelationFile file;
  file.tickers = panel.tickers;
  file.first = graph::extract_first_order(g, panel.tickers);
  file.second = graph::extract_second_order(g, panel.tickers);
  return file;
}

}  // namespace

void cmd_extract(const RunConfig& config, std::ostream& out) {
  if (config.graph.empty()) throw Error(ErrorKind::kConfiguration, "extract needs 'graph'");
  const graph::KnowledgeGraph raw = graph::load_graph(config.graph);
  const graph::KnowledgeGraph resolved = graph::resolve_entities(raw);
  const graph::GraphSummary before = graph::graph_summary(raw);
  const graph::GraphSummary after = graph::graph_summary(resolved);
  const auto universe = graph::nikkei_companies(resolved);
  const auto first = graph::extract_first_order(resolved, universe);
  const auto second = graph::extract_second_order(resolved, universe);

  nlohmann::json summary = {
      {"nodes", after.node_count},
      {"edges", after.edge_count},
      {"average_node_degree", after.avg_degree},
      {"nodes_before_resolution", before.node_count},
      {"edges_before_resolution", before.edge_count},
      {"universe_size", universe.size()},
  };
  nlohmann::json counts = nlohmann::json::array();
  for (auto r : graph::kAllRelations) {
    const auto& sets = graph::order_of(r) == graph::RelationOrder::kFirst ? first : second;
    counts.push_back({{"relation", std::string(graph::to_string(r))},
                      {"edges", sets.at(r).size()}});
  }
  summary["relations"] = counts;

  OutputSet files(config.out);
  files.add("relations.json", render([&](std::ostream& s) {
              graph::write_relation_file(s, universe, first, second);
            }));
  files.add("graph_summary.json", summary.dump(1) + "\n");
  files.add("config.echo", config.echo());
  files.commit();

  out << "# of nodes          " << after.node_count << '\n';
  out << "# of edges          " << after.edge_count << '\n';
  out << "average node degree " << fixed(after.avg_degree, 2) << '\n';
  out << "universe            " << universe.size() << " companies\n\n";
  out << std::left << std::setw(18) << "relation" << "edges\n";
  for (const auto& c : counts) {
    out << std::setw(18) << c["relation"].get<std::string>() << c["edges"].get<std::size_t>()
        << '\n';
  }
  out << std::right;
}

void cmd_backtest(const RunConfig& config, std::ostream& out) {
  const backtest::BacktestConfig bt = config.backtest_config();
  if (config.prices.empty()) throw Error(ErrorKind::kConfiguration, "backtest needs 'prices'");
  const auto series = market::ingest_prices(config.prices);
  const auto panel = market::align_universe(series, config.min_length);
  const auto relations = relations_for(config, panel);
  const auto report = backtest::run_backtest(panel, relations, bt);

  OutputSet files(config.out);
  files.add("report.csv", render([&](std::ostream& s) { backtest::write_report_csv(s, report.rows); }));
  files.add("summary.json", render([&](std::ostream& s) { backtest::write_summary_json(s, report); }));
  files.add("edges.csv", render([&](std::ostream& s) { backtest::write_edges_csv(s, report.edges); }));
  files.add("config.echo", config.echo());
  files.commit();

  out << panel.n() << " stocks, " << panel.t() << " steps, " << report.window_count << ' '
      << backtest::to_string(bt.window_mode) << " windows, horizon " << bt.horizon << "\n\n";
  out << std::left << std::setw(18) << "row" << std::right << std::setw(14) << "return %/yr"
      << std::setw(10) << "sharpe" << std::setw(14) << "test mse" << '\n';
  for (const auto& row : report.summary) {
    out << std::left << std::setw(18) << row.name << std::right << std::setw(14)
        << fixed(row.annualized_return_pct, 2) << std::setw(10) << fixed(row.sharpe, 4)
        << std::setw(14);
    if (std::isnan(row.test_mse)) {
      out << "-";
    } else {
      out << std::scientific << std::setprecision(4) << row.test_mse << std::defaultfloat;
    }
    out << '\n';
  }
}

void cmd_synth(const RunConfig& config, std::ostream& out) {
  const auto spec = config.synth_spec();
  const auto m = synth::generate_market(spec);
  OutputSet files(config.out);
  files.add("prices.csv", render([&](std::ostream& s) { market::write_prices(s, m.series); }));
  files.add("graph.jsonl", render([&](std::ostream& s) { graph::write_graph(s, m.graph); }));
  files.add("config.echo", config.echo());
  files.commit();
  out << "wrote " << spec.n << " stocks x " << spec.steps << " steps ("
      << synth::to_string(spec.structure) << ") to " << config.out << '\n';
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "json") return ReportFormat::kJson;
  if (s == "text") return ReportFormat::kText;
  throw Error(ErrorKind::kConfiguration, "unknown report format '" + std::string(s) + "'");
}

namespace {

void write_comparison_text(std::ostream& out, std::span<const backtest::ReportRow> rows) {
  std::vector<backtest::ReportRow> aggregate;
  std::vector<std::string> models;  // "strategy/relation" in first-seen order
  std::map<std::size_t, std::map<std::string, double>> per_window;
  for (const auto& r : rows) {
    if (r.segment != "test") continue;
    const std::string name = r.strategy == "buy-hold" ? "benchmark"
                             : r.relation == "none"   ? r.strategy
                                                      : r.relation;
    if (r.window_index == backtest::kAggregateWindow) {
      auto copy = r;
      copy.relation = name;
      aggregate.push_back(copy);
      continue;
    }
    if (std::find(models.begin(), models.end(), name) == models.end()) models.push_back(name);
    per_window[r.window_index][name] = r.annualized_return_pct;
  }

  out << "comparison (all test windows):\n";
  if (aggregate.empty()) {
    out << "  none\n";
  } else {
    out << "  " << std::left << std::setw(18) << "row" << std::right << std::setw(14)
        << "return %/yr" << std::setw(10) << "sharpe" << std::setw(8) << "steps" << '\n';
    for (const auto& r : aggregate) {
      out << "  " << std::left << std::setw(18) << r.relation << std::right << std::setw(14)
          << fixed(r.annualized_return_pct, 2) << std::setw(10) << fixed(r.sharpe, 4)
          << std::setw(8) << r.n_steps << '\n';
    }
  }

  out << "\nper-window test return %/yr:\n";
  if (per_window.empty()) {
    out << "  none\n";
    return;
  }
  std::size_t width = 10;
  for (const auto& m : models) width = std::max(width, m.size() + 2);
  out << "  " << std::setw(6) << "window";
  for (const auto& m : models) out << std::setw(static_cast<int>(width)) << m;
  out << '\n';
  for (const auto& [w, values] : per_window) {
    out << "  " << std::setw(6) << w;
    for (const auto& m : models) {
      const auto it = values.find(m);
      out << std::setw(static_cast<int>(width)) << (it == values.end() ? "-" : fixed(it->second, 2));
    }
    out << '\n';
  }
}

}  // namespace

void cmd_report(const fs::path& path, ReportFormat format, std::ostream& out) {
  std::vector<backtest::ReportRow> rows;
  std::vector<backtest::EdgeStrength> edges;
  const auto open = [](const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorKind::kFileNotFound, p.string());
    return in;
  };
  if (fs::is_directory(path)) {
    auto in = open(path / "report.csv");
    rows = backtest::read_report_csv(in);
    if (fs::exists(path / "edges.csv")) {
      auto e = open(path / "edges.csv");
      edges = backtest::read_edges_csv(e);
    }
  } else if (path.extension() == ".json") {
    auto in = open(path);
    rows = backtest::read_report_json(in);
  } else {
    auto in = open(path);
    rows = backtest::read_report_csv(in);
  }

  switch (format) {
    case ReportFormat::kCsv:
      backtest::write_report_csv(out, rows);
      break;
    case ReportFormat::kJson:
      backtest::write_report_json(out, rows);
      break;
    case ReportFormat::kText:
      write_comparison_text(out, rows);
      out << '\n';
      backtest::write_edges_text(out, edges);
      break;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge-graph stock prediction: relation extraction, training, backtesting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "relstock 0.1.0");

  std::string config_path;
  std::vector<std::string> overrides;
  std::map<std::string, std::string> flags;
  const auto flag = [&flags](CLI::App* a, const std::string& name, const std::string& key,
                             const std::string& help) {
    a->add_option_function<std::string>(
        name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
  };

  app.add_option("--config", config_path, "Config file (key = value lines)");
  flag(&app, "--seed", "seed", "Root random seed");
  flag(&app, "--out", "out", "Output directory");
  flag(&app, "--workers", "workers", "Parallel window workers");
  app.add_option("--set", overrides, "Override any config key: key=value");

  auto* extract = app.add_subcommand("extract", "Extract relations from a knowledge graph");
  extract->fallthrough();
  flag(extract, "--graph", "graph", "Graph file (JSON lines)");

  auto* bt = app.add_subcommand("backtest", "Rolling-window training and evaluation");
  bt->fallthrough();
  flag(bt, "--prices", "prices", "Price CSV");
  flag(bt, "--graph", "graph", "Graph file (JSON lines)");
  flag(bt, "--relations", "relations", "Relation file from `extract`");
  flag(bt, "--relation", "relation", "Relation name or 'all'");
  flag(bt, "--horizon", "horizon", "Prediction horizon: 1, 5, 10 or 20");
  flag(bt, "--window-mode", "window_mode", "rolling or growing");
  flag(bt, "--epochs", "epochs", "Training epochs per window");
  flag(bt, "--train-len", "train_len", "Training anchors per window");
  flag(bt, "--test-len", "test_len", "Test anchors per window");
  bt->add_flag_callback("--sweep-relations", [&flags] { flags["sweep_relations"] = "true"; },
                        "Run every relation plus 'all'");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic market and graph");
  synth_cmd->fallthrough();
  flag(synth_cmd, "--structure", "structure",
       "independent-random-walk, lead-lag or constant-growth");
  flag(synth_cmd, "--stocks", "stocks", "Number of stocks");
  flag(synth_cmd, "--steps", "steps", "Number of timesteps");
  flag(synth_cmd, "--leaders", "leaders", "Leader stocks (lead-lag)");
  flag(synth_cmd, "--lag", "lag", "Lag in steps (lead-lag)");
  flag(synth_cmd, "--signal-sigma", "signal_sigma", "Leader return stddev");
  flag(synth_cmd, "--noise-sigma", "noise_sigma", "Follower noise stddev");
  flag(synth_cmd, "--growth-rate", "growth_rate", "Per-step growth (constant-growth)");
  synth_cmd->add_flag_callback("--shuffle-graph", [&flags] { flags["shuffle_graph"] = "true"; },
                               "Wire followers to the wrong leader in the graph");

  auto* report = app.add_subcommand("report", "Render a backtest report");
  std::string report_path;
  std::string report_format = "text";
  report->add_option("path", report_path, "Output directory, report csv or report json")
      ->required();
  report->add_option("--format", report_format, "csv, json or text")
      ->check(CLI::IsMember({"csv", "json", "text"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*report) {
      cmd_report(report_path, parse_report_format(report_format), out);
      return kExitOk;
    }
    RunConfig config;
    if (!config_path.empty()) config.load_file(config_path);
    for (const auto& [key, value] : flags) config.set(key, value);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::kConfiguration, "--set expects key=value, got '" + kv + "'");
      }
      config.set(detail::trim(std::string_view(kv).substr(0, eq)),
                 std::string_view(kv).substr(eq + 1));
    }
    if (*extract) cmd_extract(config, out);
    if (*bt) cmd_backtest(config, out);
    if (*synth_cmd) cmd_synth(config, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::kFileNotFound ? kExitFileNotFound : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"relstock"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace relstock::cli
