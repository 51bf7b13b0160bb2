#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "fixtures.hpp"
#include "graphparse/diagnostics.hpp"
#include "graphparse/trainer.hpp"

using namespace graphparse;

namespace {

ModelAssets tiny_assets(std::size_t n_vars, std::vector<std::string> relations) {
  ModelAssets a;
  a.config.d = 8;
  a.config.n_vars = n_vars;
  a.config.kind_head = false;
  a.words = WordVocab({"M0", "M1", "and", "directed", "produced", "who"});
  a.relations = RelationVocab(std::move(relations));
  a.pos.set("directed", "VBD");
  a.pos.set("produced", "VBD");
  return a;
}

double loss_of(Model<double>& m, const TrainingExample<double>& ex) {
  Tape<double> tape;
  return tape.value(m.loss(tape, ex, false))[0];
}

std::vector<Example> toy_set() {
  return {{"who directed M0", "SELECT x0 WHERE { x0 direct M0 }", {}},
          {"who produced M1", "SELECT x0 WHERE { x0 produce M1 }", {}},
          {"who directed and produced M0", "SELECT x0 WHERE { x0 direct M0 . x0 produce M0 }", {}},
          {"who directed M0 and M1", "SELECT x0 WHERE { x0 direct M0 . x0 direct M1 }", {}}};
}

TrainConfig small_config(Precision p, std::size_t epochs) {
  TrainConfig c;
  c.model.d = 8;
  c.model.n_vars = 2;
  c.precision = p;
  c.epochs = epochs;
  c.batch_size = 3;
  c.seed = 5;
  c.patience = 0;
  c.lr = 5e-3;
  return c;
}

}  // namespace

TEST(Loss, OnePositiveOneNegativeAtOneHalf) {
  for (Mode mode : {Mode::Plain, Mode::SyntaxAware, Mode::Grounded}) {
    auto a = tiny_assets(1, {"direct"});
    a.config.mode = mode;
    Model<double> m(a);  // all-zero parameters: every P is 0.5
    auto ex = m.make_example("who directed M0", parse_query("SELECT x0 WHERE { x0 direct M0 }", a.relations));
    ASSERT_EQ(ex.input.pairs.size(), 2u);
    EXPECT_NEAR(loss_of(m, ex), 2 * std::numbers::ln2, 1e-12);
    EXPECT_NEAR(loss_of(m, ex), 1.38629, 1e-5);
  }
}

TEST(Loss, EmptyGoldIsAllNegatives) {
  auto a = tiny_assets(2, {"direct", "produce"});
  Model<double> m(a);
  TrainingExample<double> ex;
  ex.input = m.prepare("who directed M0 and M1");
  const std::size_t pairs = ex.input.pairs.size();
  EXPECT_EQ(pairs, 4u * 3u);
  ex.targets = Tensor<double>(pairs, 2, 0.0);
  EXPECT_NEAR(loss_of(m, ex), static_cast<double>(pairs * 2) * std::numbers::ln2, 1e-10);
}

TEST(Loss, InvariantToEdgeOrderAndMemberOrder) {
  for (Mode mode : {Mode::Plain, Mode::SyntaxAware, Mode::Grounded}) {
    auto m = fixtures::model<double>(mode, 8, 3);
    const auto& rels = m.assets().relations;
    Rng rng(4);
    for (const auto& ex : fixtures::corpus()) {
      const auto gold = parse_query(ex.query, rels);
      const double base = loss_of(m, m.make_example(ex.question, gold));

      auto edges = gold.edges();
      rng.shuffle(edges);
      std::string text = gold.kind() == QueryKind::Ask ? "ASK WHERE {" : "SELECT x0 WHERE {";
      for (std::size_t i = 0; i < edges.size(); ++i)
        text += (i ? " . " : " ") + to_string(edges[i].subject) + " " + rels.name(edges[i].relation) + " " +
                to_string(edges[i].object);
      text += " }";
      EXPECT_EQ(loss_of(m, m.make_example(ex.question, parse_query(text, rels))), base) << text;

      auto e = m.encoder_input(ex.question);
      for (auto& g : e.groups) std::reverse(g.members.begin(), g.members.end());
      TrainingExample<double> t;
      t.input = m.prepare(e);
      t.gold = gold;
      t.targets = m.edge_targets(t.input, gold);
      EXPECT_EQ(loss_of(m, t), base);
    }
  }
}

TEST(Loss, TooManyVariablesIsADataError) {
  auto a = tiny_assets(1, {"direct"});
  Model<double> m(a);
  auto gold = parse_query("SELECT x0 WHERE { x0 direct x1 . x1 direct M0 }", a.relations);
  EXPECT_THROW(m.make_example("who directed M0", gold), DataError);
  auto other = parse_query("SELECT x0 WHERE { x0 direct M1 }", a.relations);
  EXPECT_THROW(m.make_example("who directed M0", other), DataError);
}

TEST(Trainer, FirstAdamStepMovesByLearningRate) {
  auto cfg = small_config(Precision::F64, 1);
  Trainer<double> t(cfg, build_assets(toy_set(), cfg.model, {}), toy_set());
  auto& p = t.model().params().at("rel.w");
  const auto before = p.value;
  const std::size_t batch[] = {0, 1, 2, 3};
  t.step(batch);
  // First bias-corrected update is lr * g / (|g| + eps).
  for (std::size_t k = 0; k < p.value.size(); ++k) {
    const double g = p.grad[k];
    EXPECT_NEAR(before[k] - p.value[k], cfg.lr * g / (std::abs(g) + cfg.eps), 1e-12);
  }
}

TEST(Trainer, LossDecreasesMonotonically) {
  for (Mode mode : {Mode::Plain, Mode::SyntaxAware, Mode::Grounded}) {
    auto cfg = small_config(Precision::F64, 1);
    cfg.lr = 1e-3;
    cfg.model.mode = mode;
    Trainer<double> t(cfg, build_assets(toy_set(), cfg.model, {}), toy_set());
    const std::size_t batch[] = {0, 1, 2, 3};
    double prev = t.dataset_loss();
    for (int s = 0; s < 10; ++s) {
      t.step(batch);
      const double now = t.dataset_loss();
      EXPECT_LT(now, prev) << to_string(mode) << " step " << s;
      prev = now;
    }
  }
}

TEST(Trainer, DeterministicForFixedSeed) {
  auto cfg = small_config(Precision::F64, 5);
  auto run = [&] {
    Trainer<double> t(cfg, build_assets(toy_set(), cfg.model, {}), toy_set());
    t.run();
    std::vector<double> losses;
    for (const auto& r : t.state().history) losses.push_back(r.loss);
    return std::pair{losses, t.model().params().at("rel.w").value};
  };
  EXPECT_EQ(run(), run());
}

TEST(Trainer, ResumeIsBitExact) {
  const auto dir = std::filesystem::temp_directory_path() / "graphparse_resume_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "mid.ckpt").string();
  auto cfg = small_config(Precision::F64, 6);
  Trainer<double> full(cfg, build_assets(toy_set(), cfg.model, {}), toy_set());
  full.run([&](const TrainState<double>& s) {
    if (s.epoch == 3) full.checkpoint().save(path);
  });

  auto resumed = Trainer<double>::resume(Checkpoint::load(path), toy_set());
  EXPECT_EQ(resumed.state().epoch, 3u);
  resumed.run();
  ASSERT_EQ(resumed.state().history.size(), full.state().history.size());
  for (std::size_t i = 0; i < full.state().history.size(); ++i)
    EXPECT_EQ(resumed.state().history[i].loss, full.state().history[i].loss);
  for (std::size_t i = 0; i < full.model().params().count(); ++i)
    EXPECT_EQ(resumed.model().params()[i].value, full.model().params()[i].value) << full.model().params()[i].name;
  EXPECT_EQ(resumed.state().step, full.state().step);
  std::filesystem::remove_all(dir);
}

TEST(Trainer, NonFiniteParametersAbort) {
  auto cfg = small_config(Precision::F64, 1);
  Trainer<double> t(cfg, build_assets(toy_set(), cfg.model, {}), toy_set());
  t.model().params().at("rel.w").value[0] = std::nan("");
  const std::size_t batch[] = {0};
  EXPECT_THROW(t.step(batch), NumericError);
}

TEST(Trainer, PlateauStopsEarly) {
  auto cfg = small_config(Precision::F64, 500);
  cfg.patience = 3;
  cfg.min_delta = 0.5;  // no epoch can halve the loss of the previous reference forever
  Trainer<double> t(cfg, build_assets(toy_set(), cfg.model, {}), toy_set());
  t.run();
  EXPECT_TRUE(t.state().finished);
  EXPECT_EQ(t.state().stop_reason, "patience exhausted");
  EXPECT_LT(t.state().epoch, 500u);
}

TEST(Trainer, ConfigValidation) {
  TrainConfig c;
  c.lr = -1;
  EXPECT_THROW(c.validate(), std::exception);
  TrainConfig d;
  d.model.n_vars = 9;
  EXPECT_THROW(d.validate(), std::exception);
  TrainConfig e;
  auto back = TrainConfig::from_json(e.to_json());
  EXPECT_EQ(back.to_json(), e.to_json());
}

TEST(Trainer, ModeSelectsPreprocessing) {
  auto a = fixtures::assets(Mode::Plain, 8);
  Model<double> plain(a);
  EXPECT_EQ(plain.encoder_input("who directed and produced M0 and M1 ?").groups.size(), 8u);
  a.config.mode = Mode::SyntaxAware;
  Model<double> grouped(a);
  EXPECT_EQ(grouped.encoder_input("who directed and produced M0 and M1 ?").groups.size(), 4u);
}

TEST(ParameterBudget, ReferenceConfig) {
  ModelConfig cfg;  // d = 128, grounded
  const auto n = parameter_count(cfg, 100, 60);
  EXPECT_GE(n, 200000u);
  EXPECT_LE(n, 600000u);
  auto synthetic = fixtures::assets(Mode::Grounded, 128);
  const auto m = Model<float>(synthetic).parameter_count();
  EXPECT_GE(m, 100000u);
  EXPECT_LE(m, 1000000u);
}

TEST(GradCheck, AllModes) {
  for (Mode mode : {Mode::Plain, Mode::SyntaxAware, Mode::Grounded}) {
    auto r = model_gradcheck(mode);
    EXPECT_TRUE(r.report.pass) << to_string(mode) << " " << r.report.max_rel_error;
  }
}

TEST(CarveDev, DisjointAndDeterministic) {
  std::vector<std::size_t> train(50), dev;
  for (std::size_t i = 0; i < 50; ++i) train[i] = i * 2;
  auto t2 = train;
  std::vector<std::size_t> d2;
  carve_dev(train, dev, 0.2, 3);
  carve_dev(t2, d2, 0.2, 3);
  EXPECT_EQ(train, t2);
  EXPECT_EQ(dev, d2);
  EXPECT_EQ(dev.size(), 10u);
  for (auto i : dev) EXPECT_EQ(std::count(train.begin(), train.end(), i), 0);
}
