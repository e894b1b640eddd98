#include <doctest.h>

#include <fstream>
#include <numeric>
#include <sstream>

#include "graph_oracle.hpp"
#include "relstock/relation_graph.hpp"
#include "test_support.hpp"

using namespace relstock;
using namespace relstock::graph;
using relstock::test::throws_kind;

namespace {

KnowledgeGraph parse(const std::string& text) {
  std::istringstream in(text);
  return parse_graph(in);
}

std::string node(const std::string& id, const std::string& type = "company", bool nikkei = true) {
  return R"({"kind":"node","id":")" + id + R"(","node_type":")" + type +
         R"(","in_nikkei":)" + (nikkei ? "true" : "false") + "}\n";
}

std::string edge(const std::string& s, const std::string& d, const std::string& type) {
  return R"({"kind":"edge","src":")" + s + R"(","dst":")" + d + R"(","edge_type":")" + type +
         "\"}\n";
}

void check_tensor_invariants(const RelationTensor& t) {
  for (std::size_t i = 0; i < t.n(); ++i) {
    CHECK(t.degree(i) >= 1);
    std::size_t degree = 0;
    for (std::size_t j = 0; j < t.n(); ++j) {
      if (t.connected(j, i)) ++degree;
      for (std::size_t k = 0; k < t.k(); ++k) {
        const double v = t.at(i, j, k);
        CHECK((v == 0.0 || v == 1.0));
        CHECK(v == t.at(j, i, k));
        if (i == j) CHECK(v == 1.0);
      }
    }
    CHECK(t.degree(i) == degree);
  }
}

}  // namespace

TEST_CASE("load reads nodes and edges back") {
  const auto g = parse(node("A") + node("B") + edge("A", "B", "supplier"));
  CHECK(g.nodes.size() == 2);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges.begin()->edge_type == EdgeType::kSupplier);
  CHECK(g.nodes.at("A").in_nikkei);
}

TEST_CASE("load rejects dangling edges and unknown types") {
  CHECK(throws_kind([] { parse(node("A") + edge("A", "Z", "supplier")); }, ErrorKind::kIntegrity));
  CHECK(throws_kind([] { parse(node("A", "planet")); }, ErrorKind::kSchema));
  CHECK(throws_kind([] { parse(node("A") + node("B") + edge("A", "B", "friend")); },
                    ErrorKind::kSchema));
  CHECK(throws_kind([] { parse(R"({"kind":"node","id":"A","node_type":"company","in_nikkei":true,"x":1})"); },
                    ErrorKind::kSchema));
  CHECK(throws_kind([] { parse(node("I", "industry", true)); }, ErrorKind::kSchema));
  CHECK(throws_kind([] { parse(node("A") + node("A")); }, ErrorKind::kIntegrity));
  CHECK(throws_kind([] { parse("{not json\n"); }, ErrorKind::kParse));
  CHECK(throws_kind([] { load_graph("/nonexistent/graph.jsonl"); }, ErrorKind::kFileNotFound));
}

TEST_CASE("graph file round trip") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = test::random_graph(seed, 25);
    std::ostringstream out;
    write_graph(out, g);
    CHECK(parse(out.str()) == g);
  }
}

TEST_CASE("resolve merges same-company components into the smallest id") {
  const auto g = parse(node("A") + node("B", "company", false) + node("C") +
                       edge("A", "B", "same-company") + edge("C", "B", "supplier"));
  const auto r = resolve_entities(g);
  CHECK(r.nodes.size() == 2);
  CHECK(r.nodes.contains("A"));
  CHECK_FALSE(r.nodes.contains("B"));
  CHECK(r.edges == std::set<Edge>{{"C", "A", EdgeType::kSupplier}});
}

TEST_CASE("resolve ORs the universe flag and drops self edges") {
  const auto g = parse(node("B") + node("A", "company", false) + edge("A", "B", "same-company") +
                       edge("A", "B", "supplier"));
  const auto r = resolve_entities(g);
  REQUIRE(r.nodes.size() == 1);
  CHECK(r.nodes.at("A").in_nikkei);
  CHECK(r.edges.empty());
}

TEST_CASE("resolve leaves graphs without same-company edges unchanged") {
  const auto g = parse(node("A") + node("B") + edge("A", "B", "partner"));
  CHECK(resolve_entities(g) == g);
}

TEST_CASE("resolve merges chains transitively") {
  const auto g = parse(node("A") + node("B") + node("C") + edge("A", "B", "same-company") +
                       edge("C", "B", "same-company"));
  const auto r = resolve_entities(g);
  CHECK(r.nodes.size() == 1);
  CHECK(r == test::brute_resolve(g));
}

TEST_CASE("resolve rejects merging different node types") {
  const auto g = parse(node("A") + node("I", "industry", false) + edge("A", "I", "same-company"));
  CHECK(throws_kind([&] { resolve_entities(g); }, ErrorKind::kResolutionConflict));
}

TEST_CASE("resolve matches brute-force closure, is idempotent and ignores input order") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto g = test::random_graph(seed, 25);
    const auto r = resolve_entities(g);
    CHECK(r == test::brute_resolve(g));
    CHECK(resolve_entities(r) == r);
    for (const auto& e : r.edges) CHECK(e.edge_type != EdgeType::kSameCompany);
    for (std::uint64_t p = 0; p < 3; ++p) {
      CHECK(resolve_entities(parse(test::shuffled_lines(g, seed * 7 + p))) == r);
    }
  }
}

TEST_CASE("first-order extraction examples") {
  const auto g = parse(node("X") + node("Y") + node("Z", "company", false) +
                       edge("X", "Y", "supplier") + edge("X", "Z", "customer") +
                       edge("X", "Y", "partner-with") + edge("Y", "X", "partner-with"));
  const std::vector<std::string> u{"X", "Y"};
  const auto f = extract_first_order(g, u);
  CHECK(f.at(Relation::kSuppliesFrom) == std::set<IndexPair>{{0, 1}});
  CHECK(f.at(Relation::kCustomerOf).empty());
  CHECK(f.at(Relation::kPartnerWith) == std::set<IndexPair>{{0, 1}});
  CHECK(f.at(Relation::kSharesOwnedBy).empty());
  CHECK(f.size() == 4);
}

TEST_CASE("extraction rejects tickers outside the graph universe") {
  const auto g = parse(node("X") + node("Y", "company", false));
  const std::vector<std::string> missing{"X", "Q"};
  const std::vector<std::string> outside{"X", "Y"};
  CHECK(throws_kind([&] { extract_first_order(g, missing); }, ErrorKind::kUnknownTicker));
  CHECK(throws_kind([&] { extract_second_order(g, outside); }, ErrorKind::kUnknownTicker));
}

TEST_CASE("second-order extraction examples") {
  const auto shared = parse(node("X") + node("Y") + node("I", "industry", false) +
                            edge("X", "I", "in-industry") + edge("Y", "I", "in-industry"));
  const std::vector<std::string> u{"X", "Y"};
  CHECK(extract_second_order(shared, u).at(Relation::kCommonIndustry) ==
        std::set<IndexPair>{{0, 1}});

  const auto apart = parse(node("X") + node("Y") + node("I1", "industry", false) +
                           node("I2", "industry", false) + edge("X", "I1", "in-industry") +
                           edge("Y", "I2", "in-industry"));
  CHECK(extract_second_order(apart, u).at(Relation::kCommonIndustry).empty());

  // Two shared customers still give one pair; the counterparty may be outside the universe.
  const auto customers = parse(node("X") + node("Y") + node("C1", "company", false) +
                               node("C2", "company", false) + edge("X", "C1", "customer") +
                               edge("Y", "C1", "customer") + edge("X", "C2", "customer") +
                               edge("Y", "C2", "customer"));
  const auto s = extract_second_order(customers, u);
  CHECK(s.at(Relation::kCommonCustomer) == std::set<IndexPair>{{0, 1}});
  CHECK(s.at(Relation::kCommonSupplier).empty());
}

TEST_CASE("extraction matches brute-force enumeration on random graphs") {
  for (std::uint64_t seed = 1; seed <= 80; ++seed) {
    const auto g = resolve_entities(test::random_graph(seed, 25));
    const auto u = nikkei_companies(g);
    if (u.empty()) continue;
    CHECK(extract_first_order(g, u) == test::brute_first(g, u));
    CHECK(extract_second_order(g, u) == test::brute_second(g, u));
  }
}

TEST_CASE("second-order extraction restricts monotonically") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto g = resolve_entities(test::random_graph(seed, 25));
    const auto u = nikkei_companies(g);
    if (u.size() < 3) continue;
    Rng rng(seed);
    std::vector<std::string> sub;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (rng.uniform() < 0.6) {
        sub.push_back(u[i]);
        kept.push_back(i);
      }
    }
    const auto full = extract_second_order(g, u);
    const auto direct = extract_second_order(g, sub);
    for (const auto& [r, pairs] : full) {
      std::set<IndexPair> restricted;
      for (std::size_t a = 0; a < kept.size(); ++a)
        for (std::size_t b = a + 1; b < kept.size(); ++b)
          if (pairs.contains({kept[a], kept[b]})) restricted.insert({a, b});
      CHECK(direct.at(r) == restricted);
    }
  }
}

TEST_CASE("single relation tensor") {
  EdgeSets first;
  first[Relation::kCustomerOf] = {{0, 2}};
  const std::vector<std::string> u{"X", "Y", "Z"};
  const auto t = build_relation_tensor(first, {}, u, "customer-of");
  REQUIRE(t.k() == 1);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const bool one = i == j || (i == 0 && j == 2) || (i == 2 && j == 0);
      CHECK(t.at(i, j, 0) == (one ? 1.0 : 0.0));
    }
  CHECK(t.degree(0) == 2);
  CHECK(t.degree(1) == 1);
  CHECK(t.edge_count(0) == 1);
}

TEST_CASE("all-relation tensor with no edges is seven identity slices") {
  const std::vector<std::string> u{"X", "Y", "Z", "W"};
  const auto t = build_relation_tensor({}, {}, u, "all");
  REQUIRE(t.k() == 7);
  for (std::size_t k = 0; k < 7; ++k) CHECK(t.relations()[k] == to_string(kAllRelations[k]));
  check_tensor_invariants(t);
  for (std::size_t i = 0; i < 4; ++i) CHECK(t.degree(i) == 1);
  CHECK(throws_kind([&] { build_relation_tensor({}, {}, u, "friends-with"); },
                    ErrorKind::kConfiguration));
}

TEST_CASE("tensors from random graphs keep their invariants") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto g = resolve_entities(test::random_graph(seed, 25));
    const auto u = nikkei_companies(g);
    if (u.empty()) continue;
    const auto first = extract_first_order(g, u);
    const auto second = extract_second_order(g, u);
    const auto all = build_relation_tensor(first, second, u, "all");
    check_tensor_invariants(all);
    for (std::size_t k = 0; k < kRelationCount; ++k) {
      const Relation r = kAllRelations[k];
      const auto& pairs = (order_of(r) == RelationOrder::kFirst ? first : second).at(r);
      CHECK(all.edge_count(k) == pairs.size());
      const auto single = build_relation_tensor(first, second, u, to_string(r));
      check_tensor_invariants(single);
      for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < u.size(); ++j) CHECK(single.at(i, j, 0) == all.at(i, j, k));
    }

    std::vector<std::size_t> perm(u.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    rng.shuffle(std::span(perm));
    const auto p = all.permuted(perm);
    check_tensor_invariants(p);
    for (std::size_t i = 0; i < u.size(); ++i) {
      CHECK(p.tickers()[i] == u[perm[i]]);
      CHECK(p.degree(i) == all.degree(perm[i]));
    }
  }
}

TEST_CASE("relation file round trip and restriction") {
  std::uint64_t seed = 1;
  while (nikkei_companies(resolve_entities(test::random_graph(seed, 25))).size() < 4) ++seed;
  const auto g = resolve_entities(test::random_graph(seed, 25));
  const auto u = nikkei_companies(g);
  const auto first = extract_first_order(g, u);
  const auto second = extract_second_order(g, u);
  test::TempDir dir("relations");
  {
    std::ofstream out(dir / "r.json");
    write_relation_file(out, u, first, second);
  }
  const auto file = read_relation_file(dir / "r.json");
  CHECK(file.tickers == u);
  CHECK(file.first == first);
  CHECK(file.second == second);

  const std::vector<std::string> sub{u[0], u[2]};
  const auto r = restrict_relations(file, sub);
  CHECK(r.first == extract_first_order(g, sub));
  CHECK(r.second == extract_second_order(g, sub));
  const std::vector<std::string> unknown{"nope"};
  CHECK(throws_kind([&] { restrict_relations(file, unknown); }, ErrorKind::kUnknownTicker));

  {
    std::ofstream out(dir / "bad.json");
    out << R"({"format":"relstock-relations","version":1,"tickers":["A"],"relations":{"x":[]}})";
  }
  CHECK(throws_kind([&] { read_relation_file(dir / "bad.json"); }, ErrorKind::kSchema));
  {
    std::ofstream out(dir / "pair.json");
    out << R"({"format":"relstock-relations","version":1,"tickers":["A","B"],)"
        << R"("relations":{"customer-of":[[0,5]]}})";
  }
  CHECK(throws_kind([&] { read_relation_file(dir / "pair.json"); }, ErrorKind::kSchema));
}

TEST_CASE("graph summary") {
  const auto two = parse(node("A") + node("B") + edge("A", "B", "supplier"));
  CHECK(graph_summary(two).avg_degree == 1.0);
  const auto triangle = parse(node("A") + node("B") + node("C") + edge("A", "B", "partner") +
                              edge("B", "C", "partner") + edge("C", "A", "partner"));
  const auto s = graph_summary(triangle);
  CHECK(s.node_count == 3);
  CHECK(s.edge_count == 3);
  CHECK(s.avg_degree == 2.0);
  CHECK(throws_kind([] { graph_summary(KnowledgeGraph{}); }, ErrorKind::kEmptyGraph));
}
