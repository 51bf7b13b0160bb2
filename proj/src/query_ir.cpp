#include "graphparse/query_ir.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "graphparse/errors.hpp"

namespace graphparse {

std::string to_string(NodeRef n) {
  return (n.is_variable() ? "x" : "M") + std::to_string(n.index);
}

RelationVocab::RelationVocab(std::vector<std::string> names) {
  for (const auto& n : names) add(n);
}

std::uint32_t RelationVocab::add(const std::string& name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.push_back(name);
  ids_.emplace(name, id);
  return id;
}

std::optional<std::uint32_t> RelationVocab::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

ConjunctiveQuery::ConjunctiveQuery(std::vector<Edge> edges, QueryKind kind)
    : edges_(std::move(edges)), kind_(kind) {
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

namespace {

std::vector<std::uint32_t> variables_of(const std::vector<Edge>& edges) {
  std::set<std::uint32_t> vars;
  for (const auto& e : edges) {
    if (e.subject.is_variable()) vars.insert(e.subject.index);
    if (e.object.is_variable()) vars.insert(e.object.index);
  }
  return {vars.begin(), vars.end()};
}

}  // namespace

std::size_t ConjunctiveQuery::variable_count() const { return variables_of(edges_).size(); }

std::size_t ConjunctiveQuery::variable_span() const {
  auto vars = variables_of(edges_);
  return vars.empty() ? 0 : vars.back() + 1;
}

ConjunctiveQuery ConjunctiveQuery::compact_variables() const {
  const auto vars = variables_of(edges_);
  std::map<std::uint32_t, std::uint32_t> remap;
  for (std::uint32_t i = 0; i < vars.size(); ++i) remap[vars[i]] = i;
  auto fix = [&](NodeRef n) {
    return n.is_variable() ? NodeRef::variable(remap.at(n.index)) : n;
  };
  std::vector<Edge> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_) out.push_back({fix(e.subject), e.relation, fix(e.object)});
  return {std::move(out), kind_};
}

// ---- parsing ---------------------------------------------------------------

namespace {

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<NodeRef> parse_term(std::string_view tok) {
  if (tok.size() < 2 || (tok[0] != 'x' && tok[0] != 'M')) return std::nullopt;
  std::uint64_t v = 0;
  for (std::size_t i = 1; i < tok.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(tok[i]))) return std::nullopt;
    v = v * 10 + static_cast<std::uint64_t>(tok[i] - '0');
    if (v > 1'000'000) return std::nullopt;
  }
  const auto idx = static_cast<std::uint32_t>(v);
  return tok[0] == 'x' ? NodeRef::variable(idx) : NodeRef::entity(idx);
}

bool is_relation_token(std::string_view tok) {
  if (tok.empty()) return false;
  return std::all_of(tok.begin(), tok.end(), [](char c) { return (c >= 'a' && c <= 'z') || c == '_'; });
}

std::string join(const std::vector<std::string_view>& toks, std::size_t b, std::size_t e) {
  std::string s;
  for (std::size_t i = b; i < e && i < toks.size(); ++i) {
    if (!s.empty()) s += ' ';
    s += toks[i];
  }
  return s;
}

struct RawClause {
  NodeRef subject;
  std::string_view relation;
  NodeRef object;
  std::size_t first_token;
};

struct RawQuery {
  QueryKind kind;
  std::optional<NodeRef> head;
  std::vector<RawClause> clauses;
  std::vector<std::string_view> tokens;
};

RawQuery parse_raw(std::string_view text) {
  RawQuery q;
  q.tokens = split_ws(text);
  const auto& t = q.tokens;
  std::size_t i = 0;
  auto expect = [&](std::string_view word) {
    if (i >= t.size() || t[i] != word)
      throw ParseError("expected '" + std::string(word) + "'", join(t, i, i + 1));
    ++i;
  };
  if (i < t.size() && t[i] == "SELECT") {
    q.kind = QueryKind::Select;
    ++i;
    auto head = i < t.size() ? parse_term(t[i]) : std::nullopt;
    if (!head || !head->is_variable()) throw ParseError("SELECT must name a variable", join(t, i, i + 1));
    q.head = head;
    ++i;
  } else if (i < t.size() && t[i] == "ASK") {
    q.kind = QueryKind::Ask;
    ++i;
  } else {
    throw ParseError("query must start with SELECT or ASK", join(t, 0, 1));
  }
  expect("WHERE");
  expect("{");
  while (true) {
    const std::size_t start = i;
    if (i + 3 > t.size()) throw ParseError("truncated clause", join(t, start, t.size()));
    auto s = parse_term(t[i]);
    auto o = parse_term(t[i + 2]);
    if (!s || !is_relation_token(t[i + 1]) || !o)
      throw ParseError("malformed clause", join(t, start, start + 3));
    q.clauses.push_back({*s, t[i + 1], *o, start});
    i += 3;
    if (i < t.size() && t[i] == ".") {
      ++i;
      continue;
    }
    break;
  }
  expect("}");
  if (i != t.size()) throw ParseError("trailing tokens", join(t, i, t.size()));
  return q;
}

}  // namespace

std::vector<std::string> scan_relations(std::string_view text) {
  auto raw = parse_raw(text);
  std::vector<std::string> out;
  for (const auto& c : raw.clauses) out.emplace_back(c.relation);
  return out;
}

ConjunctiveQuery parse_query(std::string_view text, const RelationVocab& relations,
                             const QueryOptions& options) {
  auto raw = parse_raw(text);
  std::vector<Edge> edges;
  edges.reserve(raw.clauses.size());
  for (const auto& c : raw.clauses) {
    auto rel = relations.find(c.relation);
    if (!rel) throw ParseError("unknown relation", std::string(c.relation));
    if (!options.allow_self_loops && c.subject == c.object)
      throw ParseError("self-loop not allowed", join(raw.tokens, c.first_token, c.first_token + 3));
    edges.push_back({c.subject, *rel, c.object});
  }
  if (raw.head) {
    const bool used = std::any_of(raw.clauses.begin(), raw.clauses.end(), [&](const RawClause& c) {
      return c.subject == *raw.head || c.object == *raw.head;
    });
    if (!used) throw ParseError("dangling variable", to_string(*raw.head));
  }
  return ConjunctiveQuery(std::move(edges), raw.kind).compact_variables();
}

std::string serialize(const ConjunctiveQuery& q, const RelationVocab& relations) {
  std::vector<std::string> clauses;
  clauses.reserve(q.edges().size());
  std::optional<std::uint32_t> lowest_var;
  for (const auto& e : q.edges()) {
    clauses.push_back(to_string(e.subject) + " " + relations.name(e.relation) + " " + to_string(e.object));
    for (NodeRef n : {e.subject, e.object})
      if (n.is_variable() && (!lowest_var || n.index < *lowest_var)) lowest_var = n.index;
  }
  std::sort(clauses.begin(), clauses.end());
  std::string out = q.kind() == QueryKind::Ask
                        ? "ASK"
                        : "SELECT " + to_string(NodeRef::variable(lowest_var.value_or(0)));
  out += " WHERE {";
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    out += i == 0 ? " " : " . ";
    out += clauses[i];
  }
  out += " }";
  return out;
}

// ---- canonicalization ------------------------------------------------------

namespace {

std::string clause_key(const Edge& e) {
  return to_string(e.subject) + " r" + std::to_string(e.relation) + " " + to_string(e.object);
}

struct CanonicalResult {
  std::string form;
  std::vector<std::uint32_t> perm;  // compact variable i -> canonical index
};

CanonicalResult canonical_search(const ConjunctiveQuery& compact, const QueryOptions& options) {
  const std::size_t n = compact.variable_count();
  if (n > options.max_variables)
    throw CapacityError("query has " + std::to_string(n) + " variables; limit is " +
                        std::to_string(options.max_variables));
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  CanonicalResult best;
  bool have = false;
  std::vector<std::string> keys(compact.edges().size());
  do {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      Edge e = compact.edges()[i];
      if (e.subject.is_variable()) e.subject.index = perm[e.subject.index];
      if (e.object.is_variable()) e.object.index = perm[e.object.index];
      keys[i] = clause_key(e);
    }
    std::sort(keys.begin(), keys.end());
    std::string form;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (i) form += " . ";
      form += keys[i];
    }
    if (!have || form < best.form) {
      best.form = std::move(form);
      best.perm = perm;
      have = true;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

std::string canonical_form(const ConjunctiveQuery& q, const QueryOptions& options) {
  return canonical_search(q.compact_variables(), options).form;
}

ConjunctiveQuery canonicalize(const ConjunctiveQuery& q, const QueryOptions& options) {
  const auto compact = q.compact_variables();
  const auto best = canonical_search(compact, options);
  std::vector<Edge> out;
  out.reserve(compact.edges().size());
  for (Edge e : compact.edges()) {
    if (e.subject.is_variable()) e.subject.index = best.perm[e.subject.index];
    if (e.object.is_variable()) e.object.index = best.perm[e.object.index];
    out.push_back(e);
  }
  return {std::move(out), q.kind()};
}

bool iso_equal(const ConjunctiveQuery& a, const ConjunctiveQuery& b, const QueryOptions& options) {
  if (a.kind() != b.kind()) return false;
  if (a.edges().size() != b.edges().size()) return false;
  if (a.variable_count() != b.variable_count()) return false;
  return canonical_form(a, options) == canonical_form(b, options);
}

}  // namespace graphparse
