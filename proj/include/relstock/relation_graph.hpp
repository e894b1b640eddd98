#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace relstock::graph {

enum class NodeType { kCompany, kSector, kIndustry, kCountry };

enum class EdgeType {
  kInCountry,
  kInIndustry,
  kInSector,
  kParentCompanyOf,
  kPartnerWith,
  kRelatedTo,
  kSameCompany,
  kShareholder,
  kSupplier,
  kCustomer,
  kPartner,
};

std::string_view to_string(NodeType t);
std::string_view to_string(EdgeType t);
std::optional<NodeType> parse_node_type(std::string_view s);
std::optional<EdgeType> parse_edge_type(std::string_view s);

struct Node {
  std::string id;
  NodeType node_type = NodeType::kCompany;
  bool in_nikkei = false;

  bool operator==(const Node&) const = default;
};

struct Edge {
  std::string src;
  std::string dst;
  EdgeType edge_type = EdgeType::kSupplier;

  auto operator<=>(const Edge&) const = default;
};

/// Typed knowledge graph. Nodes are keyed by id; edges are kept as a sorted
/// set so two graphs with the same content compare equal regardless of the
/// order they were read in.
struct KnowledgeGraph {
  std::map<std::string, Node> nodes;
  std::set<Edge> edges;

  bool operator==(const KnowledgeGraph&) const = default;
};

KnowledgeGraph parse_graph(std::istream& in);
KnowledgeGraph load_graph(const std::filesystem::path& path);
void write_graph(std::ostream& out, const KnowledgeGraph& g);

/// Adds an edge after checking both endpoints exist.
void add_edge(KnowledgeGraph& g, Edge e);

/// Merges every connected component of same-company edges into its
/// lexicographically smallest member.
KnowledgeGraph resolve_entities(const KnowledgeGraph& g);

// Relations in canonical order; the stacked "all" tensor uses this slice order.
enum class Relation {
  kSuppliesFrom,
  kCustomerOf,
  kPartnerWith,
  kSharesOwnedBy,
  kCommonIndustry,
  kCommonCustomer,
  kCommonSupplier,
};

inline constexpr std::size_t kRelationCount = 7;
inline constexpr std::array<Relation, kRelationCount> kAllRelations{
    Relation::kSuppliesFrom,   Relation::kCustomerOf,     Relation::kPartnerWith,
    Relation::kSharesOwnedBy,  Relation::kCommonIndustry, Relation::kCommonCustomer,
    Relation::kCommonSupplier,
};
inline constexpr std::string_view kAllSelection = "all";

enum class RelationOrder { kFirst, kSecond };

std::string_view to_string(Relation r);
std::optional<Relation> parse_relation(std::string_view s);
RelationOrder order_of(Relation r);

/// Unordered pair of universe indices, stored with first < second.
using IndexPair = std::pair<std::size_t, std::size_t>;
using EdgeSets = std::map<Relation, std::set<IndexPair>>;

EdgeSets extract_first_order(const KnowledgeGraph& g, std::span<const std::string> universe);
EdgeSets extract_second_order(const KnowledgeGraph& g, std::span<const std::string> universe);

/// N x N x K binary adjacency with unit diagonal, symmetric per slice.
class RelationTensor {
 public:
  RelationTensor() = default;
  RelationTensor(std::vector<std::string> tickers, std::vector<std::string> relations);

  /// Identity slices only (K = 1). Used for the graph-free baseline.
  static RelationTensor identity(std::vector<std::string> tickers);

  std::size_t n() const { return tickers_.size(); }
  std::size_t k() const { return relations_.size(); }
  const std::vector<std::string>& tickers() const { return tickers_; }
  const std::vector<std::string>& relations() const { return relations_; }

  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return adjacency_[(i * n() + j) * k_stride() + k];
  }
  /// Sets (i,j,k) and (j,i,k). Diagonal entries stay at 1.
  void connect(std::size_t i, std::size_t j, std::size_t k);

  bool connected(std::size_t i, std::size_t j) const;
  /// Number of i with any nonzero slice at (i, j), self included.
  std::size_t degree(std::size_t j) const { return degrees_[j]; }
  std::span<const double> slices(std::size_t i, std::size_t j) const {
    return {adjacency_.data() + (i * n() + j) * k_stride(), k_stride()};
  }
  std::size_t edge_count(std::size_t k) const;

  /// Copy with rows and columns reordered: result(p, q) = this(perm[p], perm[q]).
  RelationTensor permuted(std::span<const std::size_t> perm) const;

  bool operator==(const RelationTensor&) const = default;

 private:
  std::size_t k_stride() const { return relations_.size(); }

  std::vector<std::string> tickers_;
  std::vector<std::string> relations_;
  std::vector<double> adjacency_;
  std::vector<std::size_t> degrees_;
};

/// `selection` is one relation name or "all".
RelationTensor build_relation_tensor(const EdgeSets& first, const EdgeSets& second,
                                     std::span<const std::string> universe,
                                     std::string_view selection);

struct GraphSummary {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  double avg_degree = 0.0;
};

GraphSummary graph_summary(const KnowledgeGraph& g);

/// In-universe companies in id order.
std::vector<std::string> nikkei_companies(const KnowledgeGraph& g);

// Relation tensor file: JSON with the universe and the edge sets of all seven
// relations, so any selection can be built from it later.
void write_relation_file(std::ostream& out, std::span<const std::string> universe,
                         const EdgeSets& first, const EdgeSets& second);
struct RelationFile {
  std::vector<std::string> tickers;
  EdgeSets first;
  EdgeSets second;
};
RelationFile read_relation_file(const std::filesystem::path& path);

/// Restricts a relation file to a (sorted) sub-universe, reindexing pairs.
RelationFile restrict_relations(const RelationFile& file, std::span<const std::string> universe);

}  // namespace relstock::graph
