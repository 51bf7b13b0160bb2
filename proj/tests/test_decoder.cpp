#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "graphparse/graph_decoder.hpp"
#include "oracle.hpp"

using namespace graphparse;

namespace {

Tensor<double> rand_t(Rng& rng, std::size_t r, std::size_t c) {
  Tensor<double> t(r, c);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1, 1);
  return t;
}

oracle::Mat to_mat(const Tensor<double>& t) {
  oracle::Mat m(t.rows(), oracle::Vec(t.cols()));
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) m[r][c] = t(r, c);
  return m;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

EdgeScores blank_scores(std::size_t relations) {
  EdgeScores s;
  s.nodes = {NodeRef::entity(0), NodeRef::variable(0), NodeRef::variable(1)};
  for (std::uint32_t a = 0; a < 3; ++a)
    for (std::uint32_t b = 0; b < 3; ++b)
      if (a != b) s.pairs.push_back({a, b});
  s.relations = relations;
  s.probs = Tensor<double>(s.pairs.size(), relations, 0.0);
  return s;
}

std::size_t pair_index(const EdgeScores& s, std::uint32_t a, std::uint32_t b) {
  for (std::size_t i = 0; i < s.pairs.size(); ++i)
    if (s.pairs[i][0] == a && s.pairs[i][1] == b) return i;
  return SIZE_MAX;
}

}  // namespace

TEST(ScorePlain, ZeroWeightsGiveOneHalf) {
  ParamSet<double> ps;
  auto dp = DecoderParams<double>::add_to(ps, 3, 4, false, false);
  Rng rng(1);
  Tape<double> tape;
  Var nodes = tape.constant(rand_t(rng, 3, 4));
  std::vector<std::array<std::uint32_t, 2>> pairs{{0, 1}, {1, 0}, {2, 0}};
  auto logits = tape.value(tape.sigmoid(score_plain(tape, pair_features(tape, nodes, pairs), dp, false)));
  for (std::size_t i = 0; i < logits.size(); ++i) EXPECT_EQ(logits[i], 0.5);
}

TEST(ScorePlain, HandExample) {
  ParamSet<double> ps;
  auto dp = DecoderParams<double>::add_to(ps, 1, 2, false, false);
  dp.relation->value = Tensor<double>(1, 4, {1, -1, 2, 0});
  Tape<double> tape;
  Var nodes = tape.constant(Tensor<double>(2, 2, {1, 0, 0, 1}));
  auto p = tape.value(tape.sigmoid(score_plain(tape, pair_features(tape, nodes, {{0, 1}, {1, 0}}), dp, false)));
  EXPECT_NEAR(p[0], sigmoid(1.0), 1e-12);
  EXPECT_NEAR(p[0], 0.73106, 1e-5);
  // Reverse direction: w . [0,1,1,0] = -1 + 2.
  EXPECT_NEAR(p[1], sigmoid(1.0), 1e-12);
  dp.relation->value = Tensor<double>(1, 4, {1, 0, 0, 0});
  Tape<double> t2;
  Var n2 = t2.constant(Tensor<double>(2, 2, {1, 0, 0, 1}));
  auto q = t2.value(score_plain(t2, pair_features(t2, n2, {{0, 1}, {1, 0}}), dp, false));
  EXPECT_NE(q[0], q[1]);
}

TEST(ScorePlain, DimensionMismatch) {
  ParamSet<double> ps;
  auto dp = DecoderParams<double>::add_to(ps, 1, 3, false, false);
  Tape<double> tape;
  Var nodes = tape.constant(Tensor<double>(2, 2));
  EXPECT_THROW(score_plain(tape, pair_features(tape, nodes, {{0, 1}}), dp, false), ContractViolation);
}

TEST(ScoreGrounded, ZeroKeysGiveUniformAttention) {
  const std::size_t d = 4;
  ParamSet<double> ps;
  auto dp = DecoderParams<double>::add_to(ps, 2, d, true, false);
  Rng rng(2);
  dp.query->value = rand_t(rng, d, 2 * d);
  dp.relation->value = rand_t(rng, 2, 3 * d);
  Tape<double> tape;
  Var nodes = tape.constant(rand_t(rng, 3, d));
  const auto values = rand_t(rng, 4, d);
  auto g = score_grounded(tape, pair_features(tape, nodes, {{0, 1}, {2, 1}}), tape.constant(rand_t(rng, 4, d)),
                          tape.constant(values), dp, false);
  const auto& alpha = tape.value(g.alpha);
  const auto& z = tape.value(g.grounded);
  for (std::size_t i = 0; i < alpha.size(); ++i) EXPECT_NEAR(alpha[i], 0.25, 1e-15);
  for (std::size_t j = 0; j < d; ++j) {
    const double mean = (values(0, j) + values(1, j) + values(2, j) + values(3, j)) / 4;
    EXPECT_NEAR(z(0, j), mean, 1e-12);
  }
}

TEST(ScoreGrounded, MatchesStraightLineOracle) {
  const std::size_t d = 4;
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    ParamSet<double> ps;
    auto dp = DecoderParams<double>::add_to(ps, 2, d, true, false);
    dp.query->value = rand_t(rng, d, 2 * d);
    dp.key->value = rand_t(rng, d, d);
    dp.relation->value = rand_t(rng, 2, 3 * d);
    const auto h = rand_t(rng, 2, d);
    const auto keys = rand_t(rng, 2, d);  // one group + NIL
    const auto values = rand_t(rng, 2, d);
    std::vector<std::array<std::uint32_t, 2>> pairs{{0, 1}, {1, 0}};
    Tape<double> tape;
    auto g = score_grounded(tape, pair_features(tape, tape.constant(h), pairs), tape.constant(keys),
                            tape.constant(values), dp, false);
    const auto p = tape.value(tape.sigmoid(g.logits));
    const auto ref = oracle::grounded(to_mat(h), pairs, to_mat(keys), to_mat(values), to_mat(dp.query->value),
                                      to_mat(dp.key->value), to_mat(dp.relation->value));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      for (std::size_t r = 0; r < 2; ++r) EXPECT_NEAR(p(i, r), ref.prob[i][r], 1e-6);
      for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(tape.value(g.grounded)(i, j), ref.z[i][j], 1e-6);
      for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(tape.value(g.alpha)(i, k), ref.alpha[i][k], 1e-6);
    }
  }
}

TEST(ScoreGrounded, ReducesToPlainWhenGroundingIsSilenced) {
  const std::size_t d = 6;
  Rng rng(4);
  ParamSet<double> pg, pp;
  auto g = DecoderParams<double>::add_to(pg, 3, d, true, false);
  auto p = DecoderParams<double>::add_to(pp, 3, d, false, false);
  g.key->value = rand_t(rng, d, d);
  p.relation->value = rand_t(rng, 3, 2 * d);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 2 * d; ++c) g.relation->value(r, c) = p.relation->value(r, c);
  const auto h = rand_t(rng, 4, d);
  std::vector<std::array<std::uint32_t, 2>> pairs{{0, 1}, {1, 2}, {3, 0}, {2, 3}};
  Tape<double> tape;
  const Var feats = pair_features(tape, tape.constant(h), pairs);
  auto gs = score_grounded(tape, feats, tape.constant(rand_t(rng, 3, d)), tape.constant(rand_t(rng, 3, d)), g, false);
  Var ps = score_plain(tape, feats, p, false);
  EXPECT_EQ(tape.value(tape.sigmoid(gs.logits)), tape.value(tape.sigmoid(ps)));
}

TEST(ScoreGrounded, AttentionRowsSumToOne) {
  auto m = fixtures::model<double>(Mode::Grounded, 8);
  for (std::size_t i = 0; i < 50; ++i) {
    auto in = m.prepare(fixtures::corpus()[i].question);
    Tape<double> tape;
    auto f = m.forward(tape, in, false);
    const auto& a = tape.value(f.alpha);
    ASSERT_EQ(a.cols(), in.group_count() + 1);
    for (std::size_t r = 0; r < a.rows(); ++r) {
      double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(r, k);
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
  }
}

TEST(ScoreGrounded, MemberOrderInvariance) {
  auto m = fixtures::model<double>(Mode::Grounded, 8);
  Rng rng(5);
  for (const auto& ex : fixtures::corpus()) {
    auto e = m.encoder_input(ex.question);
    auto logits = [&](const EncoderInput& input) {
      Tape<double> tape;
      auto f = m.forward(tape, m.prepare(input), false);
      return std::pair{tape.value(f.logits), tape.value(f.alpha)};
    };
    const auto base = logits(e);
    for (auto& g : e.groups) {
      std::reverse(g.members.begin(), g.members.end());
      std::reverse(g.positions.begin(), g.positions.end());
    }
    EXPECT_EQ(logits(e), base);
  }
}

TEST(Decode, ThresholdRule) {
  RelationVocab rels({"direct", "produce"});
  auto s = blank_scores(2);
  EXPECT_TRUE(decode(s).empty());
  s.probs(pair_index(s, 1, 0), 0) = 0.9;
  auto q = decode(s);
  EXPECT_EQ(serialize(q, rels), "SELECT x0 WHERE { x0 direct M0 }");

  s.probs(pair_index(s, 1, 0), 0) = 0.7;
  s.probs(pair_index(s, 1, 0), 1) = 0.7;
  EXPECT_EQ(decode(s).edges().size(), 2u);
  EXPECT_EQ(decode(s, 0.8).edges().size(), 0u);

  // The surviving variable is x1; decoding renumbers it to x0.
  auto t = blank_scores(2);
  t.probs(pair_index(t, 2, 0), 1) = 0.6;
  EXPECT_EQ(serialize(decode(t), rels), "SELECT x0 WHERE { x0 produce M0 }");
  EXPECT_THROW(decode(t, 1.0), ContractViolation);
}

TEST(Decode, GoldAdjacencyRoundTrips) {
  auto m = fixtures::model<double>(Mode::Grounded, 8);
  for (const auto& ex : fixtures::corpus()) {
    auto in = m.prepare(ex.question);
    auto gold = parse_query(ex.query, m.assets().relations, m.assets().query_options());
    const auto targets = m.edge_targets(in, gold);
    EdgeScores s;
    s.nodes = in.nodes;
    s.pairs = in.pairs;
    s.relations = m.assets().relations.size();
    s.probs = targets;
    s.has_kind = true;
    s.kind_prob = gold.kind() == QueryKind::Ask ? 1.0 : 0.0;
    EXPECT_TRUE(iso_equal(decode(s), gold)) << ex.query;
  }
}

TEST(ClassifyKind, TieAndDisabledHead) {
  auto s = blank_scores(1);
  EXPECT_EQ(classify_kind(s), QueryKind::Select);
  s.kind_prob = 0.99;
  EXPECT_EQ(classify_kind(s), QueryKind::Select);  // head disabled
  s.has_kind = true;
  EXPECT_EQ(classify_kind(s), QueryKind::Ask);
  s.kind_prob = 0.5;
  EXPECT_EQ(classify_kind(s), QueryKind::Select);

  // Zero weights give exactly 0.5 through the model's own head.
  auto a = fixtures::assets(Mode::Grounded, 8);
  Model<double> zero(a);
  auto scored = zero.score(zero.prepare("did M0 direct M1 ?"));
  EXPECT_TRUE(scored.has_kind);
  EXPECT_EQ(scored.kind_prob, 0.5);
  EXPECT_EQ(classify_kind(scored), QueryKind::Select);
}

TEST(EdgeScores, SelfPairsMasked) {
  auto s = blank_scores(1);
  s.probs.fill(0.9);
  EXPECT_EQ(s.prob(1, 1, 0), 0.0);
  EXPECT_EQ(s.prob(1, 0, 0), 0.9);
}
