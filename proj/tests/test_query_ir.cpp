#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "graphparse/errors.hpp"
#include "graphparse/query_ir.hpp"
#include "graphparse/rng.hpp"

using namespace graphparse;

namespace {

RelationVocab rels() { return RelationVocab({"direct", "produce", "marry", "edit"}); }

Edge e(NodeRef s, std::uint32_t r, NodeRef o) { return {s, r, o}; }
NodeRef x(std::uint32_t i) { return NodeRef::variable(i); }
NodeRef m(std::uint32_t i) { return NodeRef::entity(i); }

ConjunctiveQuery random_query(Rng& rng, std::size_t max_vars = 4) {
  const std::size_t nv = 1 + rng.below(max_vars);
  const std::size_t ne = 1 + rng.below(3);
  std::vector<NodeRef> nodes;
  for (std::size_t i = 0; i < nv; ++i) nodes.push_back(x(static_cast<std::uint32_t>(i)));
  for (std::size_t i = 0; i < ne; ++i) nodes.push_back(m(static_cast<std::uint32_t>(i)));
  std::vector<Edge> edges{e(x(0), static_cast<std::uint32_t>(rng.below(3)), m(0))};
  const std::size_t n_edges = 1 + rng.below(5);
  while (edges.size() < n_edges) {
    NodeRef s = nodes[rng.below(nodes.size())], o = nodes[rng.below(nodes.size())];
    if (s == o) continue;
    edges.push_back(e(s, static_cast<std::uint32_t>(rng.below(3)), o));
  }
  return ConjunctiveQuery(edges, rng.below(4) == 0 ? QueryKind::Ask : QueryKind::Select);
}

std::vector<std::uint32_t> vars_of(const ConjunctiveQuery& q) {
  std::vector<std::uint32_t> v;
  for (const auto& ed : q.edges())
    for (NodeRef n : {ed.subject, ed.object})
      if (n.is_variable()) v.push_back(n.index);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

ConjunctiveQuery rename(const ConjunctiveQuery& q, const std::vector<std::uint32_t>& from,
                        const std::vector<std::uint32_t>& to) {
  auto map = [&](NodeRef n) {
    if (!n.is_variable()) return n;
    const auto it = std::find(from.begin(), from.end(), n.index);
    return x(to[static_cast<std::size_t>(it - from.begin())]);
  };
  std::vector<Edge> out;
  for (const auto& ed : q.edges()) out.push_back(e(map(ed.subject), ed.relation, map(ed.object)));
  return ConjunctiveQuery(out, q.kind());
}

// Independent isomorphism check: try every bijection between variable sets.
bool brute_iso(const ConjunctiveQuery& a, const ConjunctiveQuery& b) {
  if (a.kind() != b.kind() || a.edges().size() != b.edges().size()) return false;
  const auto va = vars_of(a), vb = vars_of(b);
  if (va.size() != vb.size()) return false;
  auto perm = vb;
  do {
    auto ra = rename(a, va, perm);
    auto ea = ra.edges(), eb = b.edges();
    std::sort(ea.begin(), ea.end());
    std::sort(eb.begin(), eb.end());
    if (ea == eb) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

ConjunctiveQuery random_renaming(const ConjunctiveQuery& q, Rng& rng) {
  const auto v = vars_of(q);
  std::vector<std::uint32_t> pool(8);
  std::iota(pool.begin(), pool.end(), 0u);
  rng.shuffle(pool);
  pool.resize(v.size());
  return rename(q, v, pool);
}

}  // namespace

TEST(ParseQuery, SelectWithTwoClauses) {
  auto q = parse_query("SELECT x0 WHERE { x0 direct M0 . x0 produce M0 }", rels());
  EXPECT_EQ(q.kind(), QueryKind::Select);
  ASSERT_EQ(q.edges().size(), 2u);
  EXPECT_EQ(q.edges()[0], e(x(0), 0, m(0)));
  EXPECT_EQ(q.edges()[1], e(x(0), 1, m(0)));
}

TEST(ParseQuery, AskForm) {
  auto q = parse_query("ASK WHERE { M0 marry M1 }", rels());
  EXPECT_EQ(q.kind(), QueryKind::Ask);
  ASSERT_EQ(q.edges().size(), 1u);
  EXPECT_EQ(q.edges()[0], e(m(0), 2, m(1)));
}

TEST(ParseQuery, DuplicatesCollapse) {
  auto q = parse_query("SELECT x0 WHERE { x0 direct M0 . x0 direct M0 }", rels());
  EXPECT_EQ(q.edges().size(), 1u);
}

TEST(ParseQuery, ErrorsNameTheSpan) {
  const auto r = rels();
  try {
    parse_query("SELECT x0 WHERE { x0 dance M0 }", r);
    FAIL();
  } catch (const ParseError& err) {
    EXPECT_EQ(err.span(), "dance");
  }
  EXPECT_THROW(parse_query("SELECT x0 WHERE { x0 direct }", r), ParseError);
  EXPECT_THROW(parse_query("SELECT x3 WHERE { x0 direct M0 }", r), ParseError);
  EXPECT_THROW(parse_query("SELECT x0 WHERE { x0 direct x0 }", r), ParseError);
  EXPECT_THROW(parse_query("FIND x0 WHERE { x0 direct M0 }", r), ParseError);
  EXPECT_THROW(parse_query("SELECT x0 WHERE { x0 direct M0 } extra", r), ParseError);
  QueryOptions loops;
  loops.allow_self_loops = true;
  EXPECT_NO_THROW(parse_query("SELECT x0 WHERE { x0 direct x0 }", r, loops));
}

TEST(ParseQuery, SerializeRoundTrip) {
  const auto r = rels();
  Rng rng(11);
  for (int t = 0; t < 300; ++t) {
    auto q = random_query(rng);
    auto back = parse_query(serialize(q, r), r);
    EXPECT_TRUE(iso_equal(q, back)) << serialize(q, r);
  }
}

TEST(ParseQuery, EdgeListOrderIsIrrelevant) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    auto q = random_query(rng);
    auto edges = q.edges();
    rng.shuffle(edges);
    EXPECT_EQ(ConjunctiveQuery(edges, q.kind()), q);
  }
}

TEST(CanonicalForm, Examples) {
  ConjunctiveQuery a({e(x(0), 1, m(0)), e(x(0), 0, m(0))}, QueryKind::Select);
  ConjunctiveQuery b({e(x(0), 0, m(0)), e(x(0), 1, m(0))}, QueryKind::Select);
  EXPECT_EQ(canonical_form(a), canonical_form(b));

  ConjunctiveQuery lone({e(x(1), 0, m(0))}, QueryKind::Select);
  EXPECT_EQ(canonicalize(lone).edges()[0].subject, x(0));

  ConjunctiveQuery c({e(x(0), 0, m(0)), e(x(1), 1, m(0))}, QueryKind::Select);
  ConjunctiveQuery d({e(x(0), 1, m(0)), e(x(1), 0, m(0))}, QueryKind::Select);
  EXPECT_EQ(canonical_form(c), canonical_form(d));
}

TEST(CanonicalForm, CapacityLimit) {
  std::vector<Edge> edges;
  for (std::uint32_t i = 0; i < 9; ++i) edges.push_back(e(x(i), 0, m(0)));
  ConjunctiveQuery q(edges, QueryKind::Select);
  EXPECT_THROW(canonical_form(q), CapacityError);
  edges.pop_back();
  EXPECT_NO_THROW(canonical_form(ConjunctiveQuery(edges, QueryKind::Select)));
}

TEST(CanonicalForm, AgreesWithBruteForceIsomorphism) {
  Rng rng(2024);
  int iso_pairs = 0;
  for (int t = 0; t < 1500; ++t) {
    auto a = random_query(rng);
    // Half the time compare against a renamed copy, otherwise a fresh query
    // drawn with the same edge count so near misses are common.
    ConjunctiveQuery b = rng.below(2) ? random_renaming(a, rng) : random_query(rng);
    const bool expect = brute_iso(a, b);
    iso_pairs += expect;
    EXPECT_EQ(canonical_form(a) == canonical_form(b) && a.kind() == b.kind(), expect);
    EXPECT_EQ(iso_equal(a, b), expect);
  }
  EXPECT_GT(iso_pairs, 500);
}

TEST(CanonicalForm, Idempotent) {
  Rng rng(8);
  for (int t = 0; t < 300; ++t) {
    auto c = canonicalize(random_query(rng));
    EXPECT_EQ(canonicalize(c), c);
    const auto v = vars_of(c);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], i);  // contiguous from 0
  }
}

TEST(IsoEqual, Examples) {
  const auto r = rels();
  auto a = parse_query("SELECT x0 WHERE { x0 direct M0 . x0 produce M0 }", r);
  auto b = parse_query("SELECT x0 WHERE { x0 produce M0 . x0 direct M0 }", r);
  EXPECT_TRUE(iso_equal(a, b));
  EXPECT_FALSE(iso_equal(ConjunctiveQuery({e(x(0), 0, m(0))}, QueryKind::Select),
                         ConjunctiveQuery({e(x(0), 0, m(1))}, QueryKind::Select)));
  EXPECT_FALSE(iso_equal(ConjunctiveQuery({e(x(0), 0, m(0))}, QueryKind::Select),
                         ConjunctiveQuery({e(x(0), 0, m(0))}, QueryKind::Ask)));
}

TEST(IsoEqual, InvariantUnderRenaming) {
  Rng rng(77);
  for (int t = 0; t < 1000; ++t) {
    auto q = random_query(rng, 6);
    EXPECT_TRUE(iso_equal(q, random_renaming(q, rng)));
  }
}
