#include "relstock/relation_graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "relstock/error.hpp"
#include "text_util.hpp"

namespace relstock::graph {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<NodeType, std::string_view>, 4> kNodeNames{{
    {NodeType::kCompany, "company"},
    {NodeType::kSector, "sector"},
    {NodeType::kIndustry, "industry"},
    {NodeType::kCountry, "country"},
}};

constexpr std::array<std::pair<EdgeType, std::string_view>, 11> kEdgeNames{{
    {EdgeType::kInCountry, "in-country"},
    {EdgeType::kInIndustry, "in-industry"},
    {EdgeType::kInSector, "in-sector"},
    {EdgeType::kParentCompanyOf, "parent-company-of"},
    {EdgeType::kPartnerWith, "partner-with"},
    {EdgeType::kRelatedTo, "related-to"},
    {EdgeType::kSameCompany, "same-company"},
    {EdgeType::kShareholder, "shareholder"},
    {EdgeType::kSupplier, "supplier"},
    {EdgeType::kCustomer, "customer"},
    {EdgeType::kPartner, "partner"},
}};

constexpr std::array<std::string_view, kRelationCount> kRelationNames{
    "supplies-from",   "customer-of",     "partner-with",   "shares-owned-by",
    "common-industry", "common-customer", "common-supplier",
};

// Graph edge types feeding each first-order relation.
bool feeds(Relation r, EdgeType t) {
  switch (r) {
    case Relation::kSuppliesFrom: return t == EdgeType::kSupplier;
    case Relation::kCustomerOf: return t == EdgeType::kCustomer;
    case Relation::kPartnerWith: return t == EdgeType::kPartnerWith || t == EdgeType::kPartner;
    case Relation::kSharesOwnedBy: return t == EdgeType::kShareholder;
    default: return false;
  }
}

const json& require(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorKind::kSchema,
                "line " + std::to_string(line) + ": missing key '" + key + "'");
  }
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_string()) {
    throw Error(ErrorKind::kSchema,
                "line " + std::to_string(line) + ": '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::size_t line) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorKind::kSchema, "line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::unordered_map<std::string, std::size_t> index_universe(const KnowledgeGraph& g,
                                                            std::span<const std::string> universe) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < universe.size(); ++i) {
    const auto it = g.nodes.find(universe[i]);
    if (it == g.nodes.end()) {
      throw Error(ErrorKind::kUnknownTicker, universe[i] + " is not a graph node");
    }
    if (it->second.node_type != NodeType::kCompany || !it->second.in_nikkei) {
      throw Error(ErrorKind::kUnknownTicker, universe[i] + " is not an in-universe company");
    }
    if (!index.emplace(universe[i], i).second) {
      throw Error(ErrorKind::kConfiguration, "ticker " + universe[i] + " listed twice");
    }
  }
  return index;
}

IndexPair make_pair_sorted(std::size_t a, std::size_t b) {
  return a < b ? IndexPair{a, b} : IndexPair{b, a};
}

}  // namespace

std::string_view to_string(NodeType t) {
  for (const auto& [v, name] : kNodeNames) {
    if (v == t) return name;
  }
  return "?";
}

std::string_view to_string(EdgeType t) {
  for (const auto& [v, name] : kEdgeNames) {
    if (v == t) return name;
  }
  return "?";
}

std::optional<NodeType> parse_node_type(std::string_view s) {
  for (const auto& [v, name] : kNodeNames) {
    if (name == s) return v;
  }
  return std::nullopt;
}

std::optional<EdgeType> parse_edge_type(std::string_view s) {
  for (const auto& [v, name] : kEdgeNames) {
    if (name == s) return v;
  }
  return std::nullopt;
}

std::string_view to_string(Relation r) { return kRelationNames[static_cast<std::size_t>(r)]; }

std::optional<Relation> parse_relation(std::string_view s) {
  for (std::size_t k = 0; k < kRelationCount; ++k) {
    if (kRelationNames[k] == s) return kAllRelations[k];
  }
  return std::nullopt;
}

RelationOrder order_of(Relation r) {
  return static_cast<std::size_t>(r) < 4 ? RelationOrder::kFirst : RelationOrder::kSecond;
}

void add_edge(KnowledgeGraph& g, Edge e) {
  if (!g.nodes.contains(e.src) || !g.nodes.contains(e.dst)) {
    throw Error(ErrorKind::kIntegrity, "edge " + e.src + " -> " + e.dst + " (" +
                                           std::string(to_string(e.edge_type)) +
                                           ") references a missing node");
  }
  g.edges.insert(std::move(e));
}

KnowledgeGraph parse_graph(std::istream& in) {
  KnowledgeGraph g;
  std::vector<std::pair<Edge, std::size_t>> pending;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw Error(ErrorKind::kSchema, "line " + std::to_string(line_no) + ": expected an object");
    }
    const std::string kind = require_string(obj, "kind", line_no);
    if (kind == "node") {
      check_keys(obj, {"kind", "id", "node_type", "in_nikkei"}, line_no);
      Node node;
      node.id = require_string(obj, "id", line_no);
      const std::string type = require_string(obj, "node_type", line_no);
      const auto parsed = parse_node_type(type);
      if (!parsed) {
        throw Error(ErrorKind::kSchema,
                    "line " + std::to_string(line_no) + ": unknown node_type '" + type + "'");
      }
      node.node_type = *parsed;
      const json& flag = require(obj, "in_nikkei", line_no);
      if (!flag.is_boolean()) {
        throw Error(ErrorKind::kSchema,
                    "line " + std::to_string(line_no) + ": 'in_nikkei' must be a boolean");
      }
      node.in_nikkei = flag.get<bool>();
      if (node.in_nikkei && node.node_type != NodeType::kCompany) {
        throw Error(ErrorKind::kSchema, "line " + std::to_string(line_no) +
                                            ": in_nikkei is only valid on company nodes");
      }
      if (g.nodes.contains(node.id)) {
        throw Error(ErrorKind::kIntegrity,
                    "line " + std::to_string(line_no) + ": duplicate node id '" + node.id + "'");
      }
      g.nodes.emplace(node.id, node);
    } else if (kind == "edge") {
      check_keys(obj, {"kind", "src", "dst", "edge_type"}, line_no);
      Edge e;
      e.src = require_string(obj, "src", line_no);
      e.dst = require_string(obj, "dst", line_no);
      const std::string type = require_string(obj, "edge_type", line_no);
      const auto parsed = parse_edge_type(type);
      if (!parsed) {
        throw Error(ErrorKind::kSchema,
                    "line " + std::to_string(line_no) + ": unknown edge_type '" + type + "'");
      }
      e.edge_type = *parsed;
      pending.emplace_back(std::move(e), line_no);
    } else {
      throw Error(ErrorKind::kSchema,
                  "line " + std::to_string(line_no) + ": unknown kind '" + kind + "'");
    }
  }
  for (auto& [e, at] : pending) {
    if (!g.nodes.contains(e.src) || !g.nodes.contains(e.dst)) {
      throw Error(ErrorKind::kIntegrity, "line " + std::to_string(at) + ": edge " + e.src +
                                             " -> " + e.dst + " references a missing node");
    }
    g.edges.insert(std::move(e));
  }
  return g;
}

KnowledgeGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kFileNotFound, path.string());
  return parse_graph(in);
}

void write_graph(std::ostream& out, const KnowledgeGraph& g) {
  for (const auto& [id, node] : g.nodes) {
    json obj = {{"kind", "node"},
                {"id", id},
                {"node_type", std::string(to_string(node.node_type))},
                {"in_nikkei", node.in_nikkei}};
    out << obj.dump() << '\n';
  }
  for (const auto& e : g.edges) {
    json obj = {{"kind", "edge"},
                {"src", e.src},
                {"dst", e.dst},
                {"edge_type", std::string(to_string(e.edge_type))}};
    out << obj.dump() << '\n';
  }
}

KnowledgeGraph resolve_entities(const KnowledgeGraph& g) {
  // Node ids in map order, so index order is lexicographic and the union-find
  // root (smallest index) is the lexicographically smallest member.
  std::vector<const Node*> nodes;
  std::unordered_map<std::string, std::size_t> index;
  nodes.reserve(g.nodes.size());
  for (const auto& [id, node] : g.nodes) {
    index.emplace(id, nodes.size());
    nodes.push_back(&node);
  }

  UnionFind uf(nodes.size());
  for (const auto& e : g.edges) {
    if (e.edge_type != EdgeType::kSameCompany) continue;
    const std::size_t a = index.at(e.src);
    const std::size_t b = index.at(e.dst);
    if (nodes[a]->node_type != nodes[b]->node_type) {
      throw Error(ErrorKind::kResolutionConflict,
                  "same-company edge joins " + e.src + " (" +
                      std::string(to_string(nodes[a]->node_type)) + ") and " + e.dst + " (" +
                      std::string(to_string(nodes[b]->node_type)) + ")");
    }
    uf.unite(a, b);
  }

  KnowledgeGraph out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& canonical = *nodes[uf.find(i)];
    auto [it, inserted] = out.nodes.try_emplace(canonical.id, canonical);
    it->second.in_nikkei = it->second.in_nikkei || nodes[i]->in_nikkei;
  }
  for (const auto& e : g.edges) {
    if (e.edge_type == EdgeType::kSameCompany) continue;
    const std::string& src = nodes[uf.find(index.at(e.src))]->id;
    const std::string& dst = nodes[uf.find(index.at(e.dst))]->id;
    if (src == dst) continue;
    out.edges.insert(Edge{src, dst, e.edge_type});
  }
  return out;
}

EdgeSets extract_first_order(const KnowledgeGraph& g, std::span<const std::string> universe) {
  const auto index = index_universe(g, universe);
  EdgeSets out;
  for (Relation r : kAllRelations) {
    if (order_of(r) == RelationOrder::kFirst) out[r];
  }
  for (const auto& e : g.edges) {
    const auto a = index.find(e.src);
    const auto b = index.find(e.dst);
    if (a == index.end() || b == index.end() || a->second == b->second) continue;
    for (auto& [r, pairs] : out) {
      if (feeds(r, e.edge_type)) pairs.insert(make_pair_sorted(a->second, b->second));
    }
  }
  return out;
}

EdgeSets extract_second_order(const KnowledgeGraph& g, std::span<const std::string> universe) {
  const auto index = index_universe(g, universe);

  // intermediate node id -> universe members attached to it, per relation.
  std::map<Relation, std::map<std::string, std::vector<std::size_t>>> shared;
  shared[Relation::kCommonIndustry];
  shared[Relation::kCommonCustomer];
  shared[Relation::kCommonSupplier];

  for (const auto& e : g.edges) {
    switch (e.edge_type) {
      case EdgeType::kInIndustry: {
        // Either orientation counts as long as the other end is an industry node.
        for (const auto& [member, other] : {std::pair{&e.src, &e.dst}, std::pair{&e.dst, &e.src}}) {
          const auto it = index.find(*member);
          if (it != index.end() && g.nodes.at(*other).node_type == NodeType::kIndustry) {
            shared[Relation::kCommonIndustry][*other].push_back(it->second);
          }
        }
        break;
      }
      case EdgeType::kCustomer:
      case EdgeType::kSupplier: {
        const auto it = index.find(e.src);
        if (it == index.end()) break;
        const Relation r = e.edge_type == EdgeType::kCustomer ? Relation::kCommonCustomer
                                                              : Relation::kCommonSupplier;
        shared[r][e.dst].push_back(it->second);
        break;
      }
      default:
        break;
    }
  }

  EdgeSets out;
  for (auto& [r, by_intermediate] : shared) {
    auto& pairs = out[r];
    for (auto& [_, members] : by_intermediate) {
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          pairs.insert({members[a], members[b]});
        }
      }
    }
  }
  return out;
}

RelationTensor::RelationTensor(std::vector<std::string> tickers, std::vector<std::string> relations)
    : tickers_(std::move(tickers)), relations_(std::move(relations)) {
  if (relations_.empty()) throw Error(ErrorKind::kConfiguration, "relation tensor needs K >= 1");
  const std::size_t n = tickers_.size();
  adjacency_.assign(n * n * relations_.size(), 0.0);
  degrees_.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < relations_.size(); ++k) adjacency_[(i * n + i) * k_stride() + k] = 1.0;
  }
}

RelationTensor RelationTensor::identity(std::vector<std::string> tickers) {
  return RelationTensor(std::move(tickers), {"identity"});
}

void RelationTensor::connect(std::size_t i, std::size_t j, std::size_t k) {
  if (i >= n() || j >= n() || k >= this->k()) {
    throw Error(ErrorKind::kContract, "relation index out of range");
  }
  if (i == j) return;
  if (!connected(i, j)) {
    ++degrees_[i];
    ++degrees_[j];
  }
  adjacency_[(i * n() + j) * k_stride() + k] = 1.0;
  adjacency_[(j * n() + i) * k_stride() + k] = 1.0;
}

bool RelationTensor::connected(std::size_t i, std::size_t j) const {
  for (double v : slices(i, j)) {
    if (v != 0.0) return true;
  }
  return false;
}

std::size_t RelationTensor::edge_count(std::size_t k) const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n(); ++i) {
    for (std::size_t j = i + 1; j < n(); ++j) count += at(i, j, k) != 0.0 ? 1 : 0;
  }
  return count;
}

RelationTensor RelationTensor::permuted(std::span<const std::size_t> perm) const {
  std::vector<std::string> tickers(n());
  for (std::size_t p = 0; p < n(); ++p) tickers[p] = tickers_[perm[p]];
  RelationTensor out(std::move(tickers), relations_);
  for (std::size_t p = 0; p < n(); ++p) {
    for (std::size_t q = 0; q < n(); ++q) {
      for (std::size_t k = 0; k < this->k(); ++k) {
        if (p != q && at(perm[p], perm[q], k) != 0.0) out.connect(p, q, k);
      }
    }
  }
  return out;
}

RelationTensor build_relation_tensor(const EdgeSets& first, const EdgeSets& second,
                                     std::span<const std::string> universe,
                                     std::string_view selection) {
  std::vector<Relation> chosen;
  if (selection == kAllSelection) {
    chosen.assign(kAllRelations.begin(), kAllRelations.end());
  } else if (const auto r = parse_relation(selection)) {
    chosen.push_back(*r);
  } else {
    throw Error(ErrorKind::kConfiguration, "unknown relation selection '" +
                                               std::string(selection) + "'");
  }
  std::vector<std::string> names;
  for (Relation r : chosen) names.emplace_back(to_string(r));
  RelationTensor tensor({universe.begin(), universe.end()}, std::move(names));
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const EdgeSets& source = order_of(chosen[k]) == RelationOrder::kFirst ? first : second;
    const auto it = source.find(chosen[k]);
    if (it == source.end()) continue;
    for (const auto& [a, b] : it->second) {
      if (a >= universe.size() || b >= universe.size()) {
        throw Error(ErrorKind::kContract, "edge set references an index outside the universe");
      }
      tensor.connect(a, b, k);
    }
  }
  return tensor;
}

GraphSummary graph_summary(const KnowledgeGraph& g) {
  if (g.nodes.empty()) throw Error(ErrorKind::kEmptyGraph, "graph has no nodes");
  GraphSummary s;
  s.node_count = g.nodes.size();
  s.edge_count = g.edges.size();
  s.avg_degree = 2.0 * static_cast<double>(s.edge_count) / static_cast<double>(s.node_count);
  return s;
}

std::vector<std::string> nikkei_companies(const KnowledgeGraph& g) {
  std::vector<std::string> out;
  for (const auto& [id, node] : g.nodes) {
    if (node.node_type == NodeType::kCompany && node.in_nikkei) out.push_back(id);
  }
  return out;
}

void write_relation_file(std::ostream& out, std::span<const std::string> universe,
                         const EdgeSets& first, const EdgeSets& second) {
  json doc;
  doc["format"] = "relstock-relations";
  doc["version"] = 1;
  doc["tickers"] = std::vector<std::string>(universe.begin(), universe.end());
  json rels = json::object();
  for (Relation r : kAllRelations) {
    const EdgeSets& source = order_of(r) == RelationOrder::kFirst ? first : second;
    json pairs = json::array();
    if (const auto it = source.find(r); it != source.end()) {
      for (const auto& [a, b] : it->second) pairs.push_back({a, b});
    }
    rels[std::string(to_string(r))] = std::move(pairs);
  }
  doc["relations"] = std::move(rels);
  out << doc.dump(1) << '\n';
}

RelationFile read_relation_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kFileNotFound, path.string());
  RelationFile file;
  try {
    const json doc = json::parse(in);
    if (doc.at("format") != "relstock-relations" || doc.at("version") != 1) {
      throw Error(ErrorKind::kSchema, path.string() + ": not a version 1 relation file");
    }
    file.tickers = doc.at("tickers").get<std::vector<std::string>>();
    for (const auto& [name, pairs] : doc.at("relations").items()) {
      const auto r = parse_relation(name);
      if (!r) throw Error(ErrorKind::kSchema, "unknown relation '" + name + "'");
      auto& target = (order_of(*r) == RelationOrder::kFirst ? file.first : file.second)[*r];
      for (const auto& p : pairs) {
        const auto a = p.at(0).get<std::size_t>();
        const auto b = p.at(1).get<std::size_t>();
        if (a >= file.tickers.size() || b >= file.tickers.size() || a == b) {
          throw Error(ErrorKind::kSchema, "relation '" + name + "' has an invalid pair");
        }
        target.insert(make_pair_sorted(a, b));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, path.string() + ": " + e.what());
  }
  return file;
}

RelationFile restrict_relations(const RelationFile& file, std::span<const std::string> universe) {
  std::unordered_map<std::string, std::size_t> source_index;
  for (std::size_t i = 0; i < file.tickers.size(); ++i) source_index.emplace(file.tickers[i], i);
  std::vector<std::optional<std::size_t>> remap(file.tickers.size());
  for (std::size_t i = 0; i < universe.size(); ++i) {
    const auto it = source_index.find(universe[i]);
    if (it == source_index.end()) {
      throw Error(ErrorKind::kUnknownTicker, universe[i] + " is missing from the relation file");
    }
    remap[it->second] = i;
  }
  RelationFile out;
  out.tickers.assign(universe.begin(), universe.end());
  const auto copy = [&](const EdgeSets& from, EdgeSets& to) {
    for (const auto& [r, pairs] : from) {
      auto& target = to[r];
      for (const auto& [a, b] : pairs) {
        if (remap[a] && remap[b]) target.insert(make_pair_sorted(*remap[a], *remap[b]));
      }
    }
  };
  copy(file.first, out.first);
  copy(file.second, out.second);
  return out;
}

}  // namespace relstock::graph
