#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "relstock/synth.hpp"
#include "test_support.hpp"

using namespace relstock;
using namespace relstock::synth;
using relstock::test::throws_kind;

namespace {

SyntheticMarketSpec lead_lag(std::uint64_t seed, double noise = 0.01) {
  SyntheticMarketSpec s;
  s.n = 8;
  s.steps = 300;
  s.seed = seed;
  s.leaders = 3;
  s.noise_sigma = noise;
  return s;
}

double corr(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    ma += a[t] / n;
    mb += b[t] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    sab += (a[t] - ma) * (b[t] - mb);
    saa += (a[t] - ma) * (a[t] - ma);
    sbb += (b[t] - mb) * (b[t] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("noiseless followers copy their leader one step later") {
  const auto m = generate_market(lead_lag(1, 0.0));
  for (std::size_t i = 3; i < 8; ++i) {
    const std::size_t l = m.leader_of[i];
    REQUIRE(l < 3);
    for (std::size_t t = 2; t < 300; ++t) {
      CHECK(m.returns[i][t] == m.returns[l][t - 1]);
      const double from_prices = m.series[i].closes[t] / m.series[i].closes[t - 1] - 1.0;
      CHECK(std::abs(from_prices - m.returns[l][t - 1]) < 1e-12);
    }
  }
  for (std::size_t i = 0; i < 3; ++i) CHECK(m.leader_of[i] == kNoLeader);
}

TEST_CASE("lead-lag followers track the lagged leader") {
  const auto m = generate_market(lead_lag(2));
  for (std::size_t i = 3; i < 8; ++i) {
    const auto& f = m.returns[i];
    const auto& l = m.returns[m.leader_of[i]];
    std::vector<double> now(f.begin() + 2, f.end());
    std::vector<double> lagged(l.begin() + 1, l.end() - 1);
    // signal 0.02, noise 0.01: correlation 0.02 / sqrt(0.0005) ~ 0.89
    CHECK(corr(now, lagged) > 0.8);
    std::vector<double> same(l.begin() + 2, l.end());
    CHECK(std::abs(corr(now, same)) < 0.25);
  }
}

TEST_CASE("longer lags shift the copy further") {
  auto spec = lead_lag(3, 0.0);
  spec.lag = 3;
  const auto m = generate_market(spec);
  for (std::size_t t = 4; t < 300; ++t) CHECK(m.returns[5][t] == m.returns[m.leader_of[5]][t - 3]);
}

TEST_CASE("graph wires each follower to its leader") {
  const auto m = generate_market(lead_lag(4));
  for (std::size_t i = 3; i < 8; ++i) {
    const graph::Edge e{m.series[i].ticker, m.series[m.leader_of[i]].ticker, graph::EdgeType::kCustomer};
    CHECK(m.graph.edges.contains(e));
  }
  const auto companies = graph::nikkei_companies(m.graph);
  CHECK(companies.size() == 8);
  const auto first = graph::extract_first_order(m.graph, companies);
  CHECK(first.at(graph::Relation::kCustomerOf).size() == 5);
}

TEST_CASE("shuffled graph keeps prices and rewires every follower") {
  auto spec = lead_lag(5);
  const auto plain = generate_market(spec);
  spec.shuffle_graph = true;
  const auto shuffled = generate_market(spec);
  CHECK(shuffled.returns == plain.returns);
  CHECK(shuffled.leader_of == plain.leader_of);
  for (std::size_t i = 3; i < 8; ++i) {
    CHECK(shuffled.graph_leader_of[i] != shuffled.leader_of[i]);
    CHECK(shuffled.graph_leader_of[i] < 3);
  }
  CHECK_FALSE(shuffled.graph == plain.graph);
}

TEST_CASE("constant growth follows the closed form") {
  SyntheticMarketSpec s;
  s.structure = Structure::kConstantGrowth;
  s.n = 3;
  s.steps = 500;
  s.growth_rate = 0.01;
  const auto m = generate_market(s);
  for (const auto& series : m.series) {
    for (std::size_t t = 0; t < 500; ++t) {
      const double expect = 100.0 * std::pow(1.01, static_cast<double>(t));
      CHECK(std::abs(series.closes[t] - expect) / expect < 1e-12);
    }
  }
}

TEST_CASE("random walks are independent across stocks") {
  SyntheticMarketSpec s;
  s.structure = Structure::kRandomWalk;
  s.n = 4;
  s.steps = 2000;
  s.seed = 7;
  const auto m = generate_market(s);
  CHECK(std::abs(corr(m.returns[0], m.returns[1])) < 0.1);
  CHECK(m.graph.edges.size() == 4);  // country membership only
}

TEST_CASE("generation is seeded") {
  CHECK(generate_market(lead_lag(9)).returns == generate_market(lead_lag(9)).returns);
  CHECK(generate_market(lead_lag(9)).returns != generate_market(lead_lag(10)).returns);
}

TEST_CASE("business calendar skips weekends") {
  const auto d = business_days(10);
  CHECK(d[0].to_string() == "2000-01-03");
  CHECK(d[4].to_string() == "2000-01-07");
  CHECK(d[5].to_string() == "2000-01-10");
}

TEST_CASE("invalid specs are rejected") {
  auto s = lead_lag(1);
  s.lag = 0;
  CHECK(throws_kind([&] { validate(s); }, ErrorKind::kValidation));
  s = lead_lag(1);
  s.leaders = 8;
  CHECK(throws_kind([&] { validate(s); }, ErrorKind::kValidation));
  s = lead_lag(1);
  s.noise_sigma = -1.0;
  CHECK(throws_kind([&] { validate(s); }, ErrorKind::kValidation));
  CHECK(throws_kind([] { parse_structure("sideways"); }, ErrorKind::kConfiguration));
  for (auto st : {Structure::kRandomWalk, Structure::kLeadLag, Structure::kConstantGrowth})
    CHECK(parse_structure(to_string(st)) == st);
}

TEST_CASE("generated files pass ingest and graph validation") {
  const auto m = generate_market(lead_lag(11));
  test::TempDir dir("synth");
  {
    std::ofstream prices(dir / "prices.csv");
    market::write_prices(prices, m.series);
    std::ofstream g(dir / "graph.jsonl");
    graph::write_graph(g, m.graph);
  }
  const auto back = market::ingest_prices(dir / "prices.csv");
  REQUIRE(back.size() == m.series.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].ticker == m.series[i].ticker);
    CHECK(back[i].dates == m.series[i].dates);
    CHECK(back[i].closes == m.series[i].closes);
  }
  CHECK(graph::load_graph(dir / "graph.jsonl") == m.graph);
}
