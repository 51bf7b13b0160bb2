#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>

#include "fixtures.hpp"
#include "graphparse/evaluator.hpp"

using namespace graphparse;

namespace {

const RelationVocab& rels() {
  static const RelationVocab r({"direct", "produce", "edit"});
  return r;
}

ConjunctiveQuery q(const std::string& text) { return parse_query(text, rels()); }

std::vector<ConjunctiveQuery> golds() {
  return {q("SELECT x0 WHERE { x0 direct M0 . x0 produce M0 }"), q("ASK WHERE { M0 edit M1 }"),
          q("SELECT x0 WHERE { x0 direct x1 . x1 produce M0 }")};
}

}  // namespace

TEST(Summarize, PerfectPredictions) {
  auto r = summarize(golds(), golds(), "test");
  EXPECT_EQ(r.n, 3u);
  EXPECT_EQ(r.exact_match, 1.0);
  EXPECT_EQ(r.edge_precision, 1.0);
  EXPECT_EQ(r.edge_recall, 1.0);
  EXPECT_EQ(r.edge_f1, 1.0);
  EXPECT_EQ(r.kind_accuracy, 1.0);
  EXPECT_EQ(r.failure_count, 0u);
}

TEST(Summarize, RenamedVariablesStillMatch) {
  std::vector<ConjunctiveQuery> renamed{q("SELECT x3 WHERE { x3 produce M0 . x3 direct M0 }"),
                                        q("ASK WHERE { M0 edit M1 }"),
                                        q("SELECT x2 WHERE { x2 direct x0 . x0 produce M0 }")};
  auto r = summarize(renamed, golds(), "test");
  EXPECT_EQ(r.exact_match, 1.0);
  EXPECT_EQ(r.edge_precision, 1.0);
}

TEST(Summarize, EmptyPredictions) {
  std::vector<ConjunctiveQuery> empty(3);
  auto r = summarize(empty, golds(), "test");
  EXPECT_EQ(r.exact_match, 0.0);
  EXPECT_EQ(r.edge_recall, 0.0);
  EXPECT_EQ(r.edge_precision, 0.0);
  EXPECT_TRUE(r.precision_undefined);
  EXPECT_EQ(r.to_json()["precision_undefined"], true);
}

TEST(Summarize, KindMismatchIsNotExact) {
  auto g = golds();
  auto p = g;
  p[1] = ConjunctiveQuery(g[1].edges(), QueryKind::Select);
  auto r = summarize(p, g, "test");
  EXPECT_NEAR(r.exact_match, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(r.edge_precision, 1.0);
  EXPECT_NEAR(r.kind_accuracy, 2.0 / 3.0, 1e-12);
  EXPECT_THROW(summarize(p, {}, "x"), ContractViolation);
}

TEST(AlignEdges, MicroCounts) {
  auto m = align_edges(q("SELECT x0 WHERE { x0 direct M0 . x0 edit M1 }"),
                       q("SELECT x1 WHERE { x1 direct M0 . x1 produce M0 }"));
  EXPECT_EQ(m.predicted, 2u);
  EXPECT_EQ(m.gold, 2u);
  EXPECT_EQ(m.correct, 1u);
  // Alignment is a single renaming, not a per-edge choice.
  auto n = align_edges(q("SELECT x0 WHERE { x0 direct M0 . x1 produce M0 }"),
                       q("SELECT x0 WHERE { x0 direct M0 . x0 produce M0 }"));
  EXPECT_EQ(n.correct, 1u);
}

TEST(AlignEdges, ExactImpliesFullOverlap) {
  Rng rng(3);
  const auto corpus = fixtures::corpus();
  std::vector<std::size_t> all(corpus.size());
  std::iota(all.begin(), all.end(), 0);
  const auto r = collect_relations(corpus, all);
  for (const auto& ex : corpus) {
    auto g = parse_query(ex.query, r);
    auto m = align_edges(canonicalize(g), g);
    EXPECT_EQ(m.correct, m.gold);
    EXPECT_EQ(m.correct, m.predicted);
  }
}

TEST(Evaluate, RefusesConfigHashMismatch) {
  auto m = fixtures::model<float>(Mode::Grounded, 8);
  std::vector<std::size_t> idx{0, 1, 2};
  EvalOptions opt;
  opt.expected_config_hash = "0000000000000000";
  EXPECT_THROW(evaluate(m, fixtures::corpus(), idx, "test", opt), DataError);
  opt.expected_config_hash = m.assets().config_hash();
  EXPECT_NO_THROW(evaluate(m, fixtures::corpus(), idx, "test", opt));
}

TEST(Evaluate, DeterministicAndGoldOrderInvariant) {
  auto m = fixtures::model<float>(Mode::Grounded, 8, 7);
  auto data = fixtures::corpus();
  std::vector<std::size_t> idx(40);
  std::iota(idx.begin(), idx.end(), 0);
  auto a = evaluate(m, data, idx, "test");
  auto b = evaluate(m, data, idx, "test");
  EXPECT_EQ(a.to_json(), b.to_json());
  // Rewrite the gold files with renamed variables in reverse clause order.
  for (auto& ex : data) {
    auto g = parse_query(ex.query, m.assets().relations);
    auto edges = g.edges();
    std::reverse(edges.begin(), edges.end());
    std::string text = g.kind() == QueryKind::Ask ? "ASK WHERE {" : "SELECT x5 WHERE {";
    auto name = [](NodeRef n) { return n.is_variable() ? "x" + std::to_string(5 - n.index) : to_string(n); };
    for (std::size_t i = 0; i < edges.size(); ++i)
      text += (i ? " . " : " ") + name(edges[i].subject) + " " + m.assets().relations.name(edges[i].relation) +
              " " + name(edges[i].object);
    ex.query = text + " }";
  }
  auto c = evaluate(m, data, idx, "test");
  EXPECT_EQ(c.exact_match, a.exact_match);
  EXPECT_EQ(c.edge_precision, a.edge_precision);
  EXPECT_EQ(c.edge_recall, a.edge_recall);
}

TEST(Failures, JsonlRoundTrip) {
  std::vector<Failure> f{{3, "who directed M0 ?", "SELECT x0 WHERE { x0 direct M0 }", "ASK WHERE { M0 direct M1 }"}};
  const auto path = (std::filesystem::temp_directory_path() / "graphparse_failures.jsonl").string();
  write_failures(path, f);
  auto back = read_failures(path);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].index, 3u);
  EXPECT_EQ(back[0].predicted, f[0].predicted);
  std::filesystem::remove(path);
}

TEST(PredictionRecord, OptionalFields) {
  auto m = fixtures::model<float>(Mode::Grounded, 8);
  const std::string gold = "SELECT x0 WHERE { x0 direct M0 }";
  auto plain = prediction_record(m, "who directed M0 ?", &gold, 0.5, false, false);
  EXPECT_TRUE(plain.contains("predicted"));
  EXPECT_EQ(plain["gold"], gold);
  EXPECT_FALSE(plain.contains("attention"));
  auto full = prediction_record(m, "who directed M0 ?", nullptr, 0.5, true, true);
  EXPECT_TRUE(full.contains("edge_probs"));
  EXPECT_TRUE(full.contains("attention"));
}
