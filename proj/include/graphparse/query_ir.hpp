#ifndef GRAPHPARSE_QUERY_IR_HPP_
#define GRAPHPARSE_QUERY_IR_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace graphparse {

enum class NodeKind : std::uint8_t { Entity, Variable };

// An entity slot (M<index>) or an existential variable (x<index>).
struct NodeRef {
  NodeKind kind = NodeKind::Variable;
  std::uint32_t index = 0;

  static NodeRef entity(std::uint32_t i) { return {NodeKind::Entity, i}; }
  static NodeRef variable(std::uint32_t i) { return {NodeKind::Variable, i}; }
  bool is_variable() const { return kind == NodeKind::Variable; }

  auto operator<=>(const NodeRef&) const = default;
};

std::string to_string(NodeRef n);

struct Edge {
  NodeRef subject;
  std::uint32_t relation = 0;
  NodeRef object;

  auto operator<=>(const Edge&) const = default;
};

enum class QueryKind : std::uint8_t { Select, Ask };

// Frozen mapping between relation names and dense ids.
class RelationVocab {
 public:
  RelationVocab() = default;
  explicit RelationVocab(std::vector<std::string> names);

  std::uint32_t add(const std::string& name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const RelationVocab& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

struct QueryOptions {
  bool allow_self_loops = false;
  std::size_t max_variables = 8;
};

// A conjunction of relational predicates viewed as a directed multigraph.
// Edges are kept sorted and unique, so two queries built from permuted edge
// lists compare equal.
class ConjunctiveQuery {
 public:
  ConjunctiveQuery() = default;
  ConjunctiveQuery(std::vector<Edge> edges, QueryKind kind);

  const std::vector<Edge>& edges() const { return edges_; }
  QueryKind kind() const { return kind_; }
  bool empty() const { return edges_.empty(); }

  // Number of distinct variables mentioned by the edges.
  std::size_t variable_count() const;
  // Largest variable index + 1 (0 when there are no variables).
  std::size_t variable_span() const;

  // Renumbers variables to 0..n-1 keeping their relative index order.
  ConjunctiveQuery compact_variables() const;

  bool operator==(const ConjunctiveQuery& other) const = default;

 private:
  std::vector<Edge> edges_;
  QueryKind kind_ = QueryKind::Select;
};

// Parses `("SELECT" var | "ASK") "WHERE" "{" clause ("." clause)* "}"`.
// Throws ParseError naming the offending span.
ConjunctiveQuery parse_query(std::string_view text, const RelationVocab& relations,
                             const QueryOptions& options = {});

// Relation tokens appearing in well-formed clause positions; used to build a
// corpus vocabulary before strict parsing. Throws ParseError on bad syntax.
std::vector<std::string> scan_relations(std::string_view text);

// Query text with clauses in sorted order. Select queries name the lowest
// variable in the head.
std::string serialize(const ConjunctiveQuery& q, const RelationVocab& relations);

// Minimum, over all variable renumberings, of the sorted clause list
// serialization (relations written by id). Throws CapacityError beyond
// options.max_variables.
std::string canonical_form(const ConjunctiveQuery& q, const QueryOptions& options = {});

// The renumbering of `q` that realizes canonical_form.
ConjunctiveQuery canonicalize(const ConjunctiveQuery& q, const QueryOptions& options = {});

// Isomorphism with entities fixed and variables freely renamed; kinds must match.
bool iso_equal(const ConjunctiveQuery& a, const ConjunctiveQuery& b,
               const QueryOptions& options = {});

}  // namespace graphparse

#endif  // GRAPHPARSE_QUERY_IR_HPP_
