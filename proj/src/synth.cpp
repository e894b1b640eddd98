#include "relstock/synth.hpp"

#include <cmath>
#include <cstdio>

#include "relstock/error.hpp"
#include "relstock/rng.hpp"

namespace relstock::synth {

std::string_view to_string(Structure s) {
  switch (s) {
    case Structure::kRandomWalk: return "independent-random-walk";
    case Structure::kLeadLag: return "lead-lag";
    case Structure::kConstantGrowth: return "constant-growth";
  }
  return "?";
}

Structure parse_structure(std::string_view s) {
  if (s == "independent-random-walk") return Structure::kRandomWalk;
  if (s == "lead-lag") return Structure::kLeadLag;
  if (s == "constant-growth") return Structure::kConstantGrowth;
  throw Error(ErrorKind::kConfiguration, "unknown market structure '" + std::string(s) + "'");
}

void validate(const SyntheticMarketSpec& spec) {
  if (spec.n < 1 || spec.steps < 2) {
    throw Error(ErrorKind::kValidation, "synthetic market needs n >= 1 and steps >= 2");
  }
  if (spec.signal_sigma < 0.0 || spec.noise_sigma < 0.0) {
    throw Error(ErrorKind::kValidation, "sigma must be >= 0");
  }
  if (!(spec.start_price > 0.0) || !(spec.growth_rate > -1.0)) {
    throw Error(ErrorKind::kValidation, "start price must be positive and growth rate > -1");
  }
  if (spec.structure == Structure::kLeadLag) {
    if (spec.lag < 1) throw Error(ErrorKind::kValidation, "lead-lag needs lag >= 1");
    if (spec.leaders < 1 || spec.leaders >= spec.n) {
      throw Error(ErrorKind::kValidation, "lead-lag needs 1 <= leaders < n");
    }
    if (spec.shuffle_graph && spec.leaders < 2) {
      throw Error(ErrorKind::kValidation, "a shuffled graph needs at least 2 leaders");
    }
  }
}

std::vector<market::Date> business_days(std::size_t count) {
  std::vector<market::Date> out;
  out.reserve(count);
  auto day = market::Date::from_ymd(2000, 1, 3).value;
  while (out.size() < count) {
    const std::chrono::weekday wd{day};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(market::Date{day});
    day += std::chrono::days{1};
  }
  return out;
}

namespace {

std::string ticker_name(std::size_t i, std::size_t n) {
  int width = 1;
  for (std::size_t m = n - 1; m >= 10; m /= 10) ++width;
  width = std::max(width, 3);
  std::string digits = std::to_string(i);
  if (digits.size() < static_cast<std::size_t>(width)) digits.insert(0, width - digits.size(), '0');
  return "S" + digits;
}

// Keeps a draw away from a -100% return.
double bounded(double r) { return std::max(r, -0.95); }

}  // namespace

SyntheticMarket generate_market(const SyntheticMarketSpec& spec) {
  validate(spec);
  Rng rng(derive_seed(spec.seed, streams::kSynthetic));
  const std::size_t n = spec.n;
  const std::size_t steps = spec.steps;

  SyntheticMarket m;
  m.returns.assign(n, std::vector<double>(steps, 0.0));
  m.leader_of.assign(n, kNoLeader);

  switch (spec.structure) {
    case Structure::kRandomWalk:
      for (std::size_t t = 1; t < steps; ++t) {
        for (std::size_t i = 0; i < n; ++i) m.returns[i][t] = bounded(spec.signal_sigma * rng.normal());
      }
      break;
    case Structure::kConstantGrowth:
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 1; t < steps; ++t) m.returns[i][t] = spec.growth_rate;
      }
      break;
    case Structure::kLeadLag:
      for (std::size_t i = spec.leaders; i < n; ++i) m.leader_of[i] = (i - spec.leaders) % spec.leaders;
      for (std::size_t t = 1; t < steps; ++t) {
        for (std::size_t i = 0; i < spec.leaders; ++i) {
          m.returns[i][t] = bounded(spec.signal_sigma * rng.normal());
        }
        for (std::size_t i = spec.leaders; i < n; ++i) {
          const double lead = t >= spec.lag ? m.returns[m.leader_of[i]][t - spec.lag] : 0.0;
          const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.normal() : 0.0;
          m.returns[i][t] = bounded(lead + noise);
        }
      }
      break;
  }

  const auto dates = business_days(steps);
  for (std::size_t i = 0; i < n; ++i) {
    market::PriceSeries s{ticker_name(i, n), dates, std::vector<double>(steps)};
    s.closes[0] = spec.start_price;
    for (std::size_t t = 1; t < steps; ++t) {
      s.closes[t] = spec.structure == Structure::kConstantGrowth
                        ? spec.start_price * std::pow(1.0 + spec.growth_rate, static_cast<double>(t))
                        : s.closes[t - 1] * (1.0 + m.returns[i][t]);
    }
    m.series.push_back(std::move(s));
  }

  // Knowledge graph: every stock is an in-universe company in one country.
  m.graph_leader_of = m.leader_of;
  if (spec.structure == Structure::kLeadLag && spec.shuffle_graph) {
    Rng graph_rng(derive_seed(spec.seed, streams::kGraphShuffle));
    for (std::size_t i = spec.leaders; i < n; ++i) {
      const auto offset = 1 + static_cast<std::size_t>(graph_rng.below(spec.leaders - 1));
      m.graph_leader_of[i] = (m.leader_of[i] + offset) % spec.leaders;
    }
  }
  graph::KnowledgeGraph& g = m.graph;
  g.nodes.emplace("JPN", graph::Node{"JPN", graph::NodeType::kCountry, false});
  for (const auto& s : m.series) {
    g.nodes.emplace(s.ticker, graph::Node{s.ticker, graph::NodeType::kCompany, true});
    graph::add_edge(g, {s.ticker, "JPN", graph::EdgeType::kInCountry});
  }
  if (spec.structure == Structure::kLeadLag) {
    for (std::size_t l = 0; l < spec.leaders; ++l) {
      const std::string industry = "IND" + std::to_string(l);
      g.nodes.emplace(industry, graph::Node{industry, graph::NodeType::kIndustry, false});
      graph::add_edge(g, {m.series[l].ticker, industry, graph::EdgeType::kInIndustry});
    }
    for (std::size_t i = spec.leaders; i < n; ++i) {
      const std::size_t leader = m.graph_leader_of[i];
      graph::add_edge(g, {m.series[i].ticker, m.series[leader].ticker, graph::EdgeType::kCustomer});
      graph::add_edge(g, {m.series[i].ticker, "IND" + std::to_string(leader),
                          graph::EdgeType::kInIndustry});
    }
  }
  return m;
}

}  // namespace relstock::synth
