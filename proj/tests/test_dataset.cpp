#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "graphparse/dataset.hpp"
#include "graphparse/errors.hpp"
#include "graphparse/rng.hpp"

using namespace graphparse;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
  const auto p = std::filesystem::temp_directory_path() / ("graphparse_" + name);
  std::ofstream(p) << content;
  return p.string();
}

GrammarConfig only(std::vector<std::string> templates, std::vector<VerbSpec> verbs = {}) {
  auto g = GrammarConfig::defaults();
  g.templates = std::move(templates);
  if (!verbs.empty()) g.verbs = std::move(verbs);
  return g;
}

FrequencyMap random_map(Rng& rng, std::size_t keys) {
  FrequencyMap m;
  for (std::size_t i = 0; i < keys; ++i)
    if (rng.below(3)) m["k" + std::to_string(i)] = rng.uniform(0.1, 5);
  if (m.empty()) m["k0"] = 1;
  return m;
}

}  // namespace

TEST(Generate, SingleVerbTemplate) {
  auto ex = generate(only({"who_v_e"}, {{"direct", "directed", "direct"}}), 1, 0);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].question, "who directed M0 ?");
  EXPECT_EQ(ex[0].query, "SELECT x0 WHERE { x0 direct M0 }");
  EXPECT_EQ(ex[0].derivation, (std::vector<std::string>{"who_v_e", "v:direct"}));
}

TEST(Generate, CrossProductOfVerbsAndEntities) {
  auto ex = generate(only({"who_vv_ee"}), 20, 3);
  RelationVocab rels = collect_relations(ex, {});
  for (const auto& e : ex) {
    for (const auto& r : scan_relations(e.query)) rels.add(r);
    auto q = parse_query(e.query, rels);
    EXPECT_EQ(q.edges().size(), 4u) << e.query;
    std::set<std::uint32_t> relations, objects;
    for (const auto& edge : q.edges()) {
      relations.insert(edge.relation);
      objects.insert(edge.object.index);
    }
    EXPECT_EQ(relations.size(), 2u);
    EXPECT_EQ(objects.size(), 2u);
  }
}

TEST(Generate, DeterministicAndRoundTrips) {
  const auto g = GrammarConfig::defaults();
  auto a = generate(g, 500, 17);
  auto b = generate(g, 500, 17);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].question, b[i].question);
    EXPECT_EQ(a[i].query, b[i].query);
    EXPECT_EQ(a[i].derivation, b[i].derivation);
  }
  std::vector<std::size_t> all(a.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto rels = collect_relations(a, all);
  std::set<std::string> templates;
  for (const auto& e : a) {
    auto q = parse_query(e.query, rels);
    EXPECT_TRUE(iso_equal(parse_query(serialize(q, rels), rels), q));
    EXPECT_LE(q.variable_count(), g.n_vars);
    templates.insert(e.derivation.front());
  }
  EXPECT_EQ(templates.size(), builtin_templates().size());
  auto c = generate(g, 500, 18);
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i].question == c[i].question;
  EXPECT_LT(same, a.size());
}

TEST(Generate, ConfigErrors) {
  auto g = only({"who_v_x_v_e"});
  g.n_vars = 1;
  EXPECT_THROW(generate(g, 5, 0), std::invalid_argument);
  EXPECT_THROW(generate(only({"no_such_template"}), 5, 0), std::invalid_argument);
  auto few = only({"who_vvv_e"}, {{"direct", "directed", "direct"}});
  EXPECT_THROW(generate(few, 5, 0), std::invalid_argument);
  auto back = GrammarConfig::from_json(GrammarConfig::defaults().to_json());
  EXPECT_EQ(back.to_json(), GrammarConfig::defaults().to_json());
}

TEST(Generate, LexiconTagsEveryToken) {
  const auto g = GrammarConfig::defaults();
  const auto lex = grammar_lexicon(g);
  for (const auto& e : generate(g, 300, 2))
    for (const auto& t : tokenize(e.question)) EXPECT_NE(lex.tag(t), kOtherTag) << t;
}

TEST(Divergence, Examples) {
  FrequencyMap p{{"a", 1}, {"b", 3}};
  EXPECT_NEAR(divergence(p, p), 0.0, 1e-12);
  EXPECT_NEAR(divergence({{"a", 1}}, {{"b", 1}}), 1.0, 1e-12);
  EXPECT_NEAR(divergence({{"a", 0.5}, {"b", 0.5}}, {{"a", 1}}), 1 - std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(divergence({{"a", 0.5}, {"b", 0.5}}, {{"a", 1}}), 0.29289, 1e-5);
  EXPECT_THROW(divergence({}, p), ContractViolation);
  EXPECT_THROW(divergence(p, {{"a", 0}}), ContractViolation);
}

TEST(Divergence, Properties) {
  Rng rng(31);
  for (int t = 0; t < 500; ++t) {
    auto p = random_map(rng, 6), q = random_map(rng, 6);
    const double d = divergence(p, q);
    EXPECT_NEAR(d, divergence(q, p), 1e-12);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
    auto scaled = p;
    for (auto& [k, v] : scaled) v *= 7.5;
    EXPECT_NEAR(divergence(p, scaled), 0.0, 1e-12);
    // Unequal normalized distributions have strictly positive divergence.
    double tp = 0, tq = 0;
    for (auto& [k, v] : p) tp += v;
    for (auto& [k, v] : q) tq += v;
    bool equal = p.size() == q.size();
    for (auto& [k, v] : p) equal = equal && q.count(k) && std::abs(v / tp - q.at(k) / tq) < 1e-12;
    if (!equal) EXPECT_GT(d, 0.0);
  }
}

TEST(Compounds, RootChildPairs) {
  std::vector<Example> ex{{"q", "SELECT x0 WHERE { x0 direct M0 }", {"who_vv_e", "v:direct", "v:edit"}}};
  auto atoms = atom_counts(ex, {0});
  auto comps = compound_counts(ex, {0});
  EXPECT_EQ(atoms.size(), 3u);
  EXPECT_EQ(comps.size(), 2u);
  EXPECT_EQ(comps.count("who_vv_e>v:direct"), 1u);
}

TEST(McdSplit, IdenticalCompoundsStayAtZero) {
  auto corpus = generate(only({"who_v_e"}, {{"direct", "directed", "direct"}}), 60, 1);
  auto s = mcd_split(corpus, 4);
  EXPECT_NEAR(s.compound_divergence, 0.0, 1e-12);
  EXPECT_TRUE(s.converged);
  EXPECT_EQ(s.accepted_swaps, 0u);
}

TEST(McdSplit, PartitionAndMonotoneTrajectory) {
  auto corpus = generate(GrammarConfig::defaults(), 400, 8);
  SplitOptions opt;
  opt.swap_budget = 5000;
  auto s = mcd_split(corpus, 2, opt);
  std::vector<int> seen(corpus.size(), 0);
  for (auto i : s.train) ++seen[i];
  for (auto i : s.test) ++seen[i];
  for (int c : seen) EXPECT_EQ(c, 1);
  EXPECT_EQ(s.test.size(), 80u);
  ASSERT_GE(s.trajectory.size(), 2u);
  for (std::size_t i = 1; i < s.trajectory.size(); ++i) EXPECT_GE(s.trajectory[i], s.trajectory[i - 1]);
  EXPECT_NEAR(s.trajectory.back(), s.compound_divergence, 1e-9);

  // Recorded divergences are the measured ones.
  auto copy = s;
  measure_split(corpus, copy);
  EXPECT_NEAR(copy.compound_divergence, s.compound_divergence, 1e-9);
  EXPECT_NEAR(copy.atom_divergence, s.atom_divergence, 1e-9);
  if (!s.warning) EXPECT_LE(s.atom_divergence, 0.02);

  auto r = random_split(corpus, 2);
  EXPECT_GT(s.compound_divergence, r.compound_divergence);
  EXPECT_EQ(mcd_split(corpus, 2, opt).test, s.test);
}

TEST(SplitSpec, JsonRoundTrip) {
  auto corpus = generate(GrammarConfig::defaults(), 100, 1);
  auto s = random_split(corpus, 5);
  const auto path = temp_file("split.json", "");
  s.save(path);
  auto back = SplitSpec::load(path);
  EXPECT_EQ(back.train, s.train);
  EXPECT_EQ(back.test, s.test);
  EXPECT_DOUBLE_EQ(back.compound_divergence, s.compound_divergence);
  EXPECT_EQ(back.method, s.method);
  std::filesystem::remove(path);
}

TEST(Corpus, SaveLoadAndLineNumbers) {
  auto corpus = generate(GrammarConfig::defaults(), 20, 1);
  const auto path = temp_file("corpus.jsonl", "");
  save_corpus(path, corpus);
  auto back = load_corpus(path);
  ASSERT_EQ(back.size(), corpus.size());
  EXPECT_EQ(back[7].derivation, corpus[7].derivation);

  const auto bad = temp_file("bad.jsonl", "{\"question\": \"q\", \"query\": \"ASK WHERE { M0 r M1 }\"}\n{oops\n");
  try {
    load_corpus(bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
  std::filesystem::remove(bad);
}

TEST(Cfq, Normalizer) {
  EXPECT_EQ(normalize_sparql("SELECT DISTINCT ?x0 WHERE { ?x0 ns:film.director.film M0 }").value(),
            "SELECT x0 WHERE { x0 film_director_film M0 }");
  auto ask = normalize_sparql("SELECT count(*) WHERE { M0 ns:people.person.spouse_s M1 }");
  ASSERT_TRUE(ask);
  EXPECT_EQ(parse_query(*ask, RelationVocab({"people_person_spouse_s"})).kind(), QueryKind::Ask);
  EXPECT_FALSE(normalize_sparql("SELECT ?x0 WHERE { ?x0 ns:a.b M0 . FILTER ( ?x0 != M0 ) }"));
  EXPECT_FALSE(normalize_sparql("SELECT ?x0 WHERE { ?x0 a ns:film.film }"));
  CfqFormat f;
  f.types_as_self_loops = true;
  EXPECT_EQ(normalize_sparql("SELECT ?x0 WHERE { ?x0 a ns:film.film }", f).value(),
            "SELECT x0 WHERE { x0 is_film_film x0 }");
}

TEST(Cfq, LoaderSkipsAndReportsLines) {
  const auto path = temp_file("cfq.jsonl",
                              "{\"question\": \"Who directed M0\", \"query\": \"SELECT DISTINCT ?x0 WHERE { ?x0 "
                              "ns:film.director.film M0 }\"}\n"
                              "{\"question\": \"q\", \"query\": \"SELECT ?x0 WHERE { FILTER ( ?x0 != M0 ) }\"}\n"
                              "not json\n");
  try {
    load_cfq(path);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  const auto ok = temp_file("cfq2.jsonl",
                            "{\"question\": \"Who directed M0\", \"query\": \"SELECT DISTINCT ?x0 WHERE { ?x0 "
                            "ns:film.director.film M0 }\"}\n"
                            "{\"question\": \"q\", \"query\": \"SELECT ?x0 WHERE { FILTER ( ?x0 != M0 ) }\"}\n");
  auto r = load_cfq(ok);
  EXPECT_EQ(r.examples.size(), 1u);
  EXPECT_EQ(r.skipped, 1u);
  CfqFormat strict;
  strict.strict = true;
  EXPECT_THROW(load_cfq(ok, strict), DataError);
  std::filesystem::remove(path);
  std::filesystem::remove(ok);
}
