#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "relstock/backtest.hpp"
#include "relstock/commands.hpp"
#include "relstock/error.hpp"
#include "relstock/relation_graph.hpp"
#include "relstock/synth.hpp"

namespace py = pybind11;
using namespace relstock;

namespace {

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli::run_cli(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

py::dict generate_market(std::size_t n, std::size_t steps, std::uint64_t seed,
                         const std::string& structure, std::size_t leaders, std::size_t lag,
                         double signal_sigma, double noise_sigma, double growth_rate,
                         bool shuffle_graph) {
  synth::SyntheticMarketSpec spec;
  spec.n = n;
  spec.steps = steps;
  spec.seed = seed;
  spec.structure = synth::parse_structure(structure);
  spec.leaders = leaders;
  spec.lag = lag;
  spec.signal_sigma = signal_sigma;
  spec.noise_sigma = noise_sigma;
  spec.growth_rate = growth_rate;
  spec.shuffle_graph = shuffle_graph;
  const auto m = synth::generate_market(spec);

  py::list tickers;
  py::list closes;
  for (const auto& s : m.series) {
    tickers.append(s.ticker);
    closes.append(py::cast(s.closes));
  }
  py::list dates;
  for (const auto& d : m.series.front().dates) dates.append(d.to_string());
  const auto leader = [](const std::vector<std::size_t>& v) {
    py::list out;
    for (auto l : v) out.append(l == synth::kNoLeader ? py::object(py::none()) : py::int_(l));
    return out;
  };
  py::dict d;
  d["tickers"] = tickers;
  d["dates"] = dates;
  d["closes"] = closes;
  d["returns"] = py::cast(m.returns);
  d["leader_of"] = leader(m.leader_of);
  d["graph_leader_of"] = leader(m.graph_leader_of);
  return d;
}

py::dict extract_relations(const std::string& graph_path) {
  const auto g = graph::resolve_entities(graph::load_graph(graph_path));
  const auto universe = graph::nikkei_companies(g);
  const auto first = graph::extract_first_order(g, universe);
  const auto second = graph::extract_second_order(g, universe);
  py::dict relations;
  for (auto r : graph::kAllRelations) {
    const auto& sets = graph::order_of(r) == graph::RelationOrder::kFirst ? first : second;
    py::list pairs;
    for (const auto& [a, b] : sets.at(r)) pairs.append(py::make_tuple(a, b));
    relations[py::str(std::string(graph::to_string(r)))] = pairs;
  }
  py::dict d;
  d["tickers"] = universe;
  d["relations"] = relations;
  return d;
}

py::list plan_windows(std::size_t usable, std::size_t train_len, std::size_t test_len,
                      const std::string& mode) {
  const auto plan = backtest::plan_windows(usable, train_len, test_len, backtest::parse_window_mode(mode));
  py::list out;
  for (const auto& w : plan.windows) {
    out.append(py::make_tuple(py::make_tuple(w.train.begin, w.train.end),
                              py::make_tuple(w.test.begin, w.test.end)));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Relation extraction, graph-network backtesting and synthetic markets.";

  // Instances carry the error category as `kind`, e.g. "file not found".
  static PyObject* error_type = PyErr_NewException("relstock._core.RelstockError", PyExc_RuntimeError, nullptr);
  m.add_object("RelstockError", py::handle(error_type));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("kind") = to_string(e.kind());
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.def("run_cli", &run_cli, py::arg("args"),
        "Runs the command-line interface in-process; returns (exit_code, stdout, stderr).");
  m.def("generate_market", &generate_market, py::arg("n") = 20, py::arg("steps") = 2600,
        py::arg("seed") = 0, py::arg("structure") = "lead-lag", py::arg("leaders") = 5,
        py::arg("lag") = 1, py::arg("signal_sigma") = 0.02, py::arg("noise_sigma") = 0.01,
        py::arg("growth_rate") = 0.01, py::arg("shuffle_graph") = false);
  m.def("extract_relations", &extract_relations, py::arg("graph_path"),
        "Resolves a graph file and returns the index universe with its relation pairs.");
  m.def("plan_windows", &plan_windows, py::arg("usable"), py::arg("train_len") = 2000,
        py::arg("test_len") = 200, py::arg("mode") = "rolling");
  m.def(
      "annualized_return",
      [](const std::vector<double>& r, double ppy) { return backtest::annualized_return(r, ppy); },
      py::arg("returns"), py::arg("periods_per_year") = 252.0);
  m.def(
      "sharpe_ratio",
      [](const std::vector<double>& r, double rf) { return backtest::sharpe_ratio(r, rf); },
      py::arg("returns"), py::arg("risk_free") = 0.0);
}
