#include "graphparse/ablation.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

namespace graphparse {

namespace {

template <typename T>
void train_and_score(const AblationConfig& cfg, Mode mode, std::uint64_t seed, const std::vector<Example>& corpus,
                     const SplitSpec& split, const PosLexicon& pos, AblationRow& row) {
  TrainConfig tc = cfg.base;
  tc.model.mode = mode;
  tc.seed = seed;
  std::vector<std::size_t> train_idx = split.train, dev_idx;
  if (tc.dev_tuning) carve_dev(train_idx, dev_idx, tc.dev_fraction, seed);
  std::vector<Example> train, dev;
  for (auto i : train_idx) train.push_back(corpus.at(i));
  for (auto i : dev_idx) dev.push_back(corpus.at(i));
  auto assets = build_assets(train, tc.model, pos);
  Trainer<T> trainer(tc, std::move(assets), train, dev);
  trainer.run();
  trainer.restore_best();
  std::vector<std::size_t> all(train.size());
  std::iota(all.begin(), all.end(), 0);
  EvalOptions opt;
  opt.threshold = tc.threshold;
  opt.compute_loss = false;
  opt.max_failures = 0;
  row.train_exact.push_back(evaluate(trainer.model(), train, all, "train", opt).exact_match);
  row.test_exact.push_back(evaluate(trainer.model(), corpus, split.test, "test", opt).exact_match);
  row.epochs.push_back(trainer.state().epoch);
}

}  // namespace

const AblationRow* AblationResult::find(Mode m) const {
  for (const auto& r : rows)
    if (r.mode == m) return &r;
  return nullptr;
}

nlohmann::json AblationResult::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows)
    rows_j.push_back({{"mode", to_string(r.mode)},
                      {"seeds", r.seeds},
                      {"test_exact_match", r.test_exact},
                      {"train_exact_match", r.train_exact},
                      {"epochs", r.epochs},
                      {"mean", r.mean},
                      {"stddev", r.stddev}});
  return {{"rows", rows_j}, {"ordering_holds", ordering_holds}, {"grounded_minus_plain", grounded_minus_plain}};
}

std::string AblationResult::table() const {
  std::string s = "mode            test exact match (mean +- sd)   seeds\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-15s %6.2f%% +- %5.2f                 %zu\n", to_string(r.mode).c_str(),
                  100.0 * r.mean, 100.0 * r.stddev, r.seeds.size());
    s += buf;
  }
  std::snprintf(buf, sizeof buf, "ordering grounded > syntax_aware > plain: %s; grounded - plain = %.2f points\n",
                ordering_holds ? "yes" : "no", 100.0 * grounded_minus_plain);
  return s + buf;
}

AblationResult run_ablation(const AblationConfig& config, const std::vector<Example>& corpus, const SplitSpec& split,
                            const PosLexicon& pos, const AblationProgress& progress) {
  if (config.seeds.empty()) throw std::invalid_argument("ablation needs at least one seed");
  AblationResult res;
  for (Mode mode : config.modes) {
    AblationRow row;
    row.mode = mode;
    for (auto seed : config.seeds) {
      row.seeds.push_back(seed);
      if (config.base.precision == Precision::F64)
        train_and_score<double>(config, mode, seed, corpus, split, pos, row);
      else
        train_and_score<float>(config, mode, seed, corpus, split, pos, row);
      if (progress) progress(mode, seed, row.test_exact.back());
    }
    const double n = static_cast<double>(row.test_exact.size());
    row.mean = std::accumulate(row.test_exact.begin(), row.test_exact.end(), 0.0) / n;
    if (row.test_exact.size() > 1) {
      double ss = 0;
      for (double v : row.test_exact) ss += (v - row.mean) * (v - row.mean);
      row.stddev = std::sqrt(ss / (n - 1));
    }
    res.rows.push_back(std::move(row));
  }
  const auto *g = res.find(Mode::Grounded), *s = res.find(Mode::SyntaxAware), *p = res.find(Mode::Plain);
  if (g && s && p) {
    res.ordering_holds = g->mean > s->mean && s->mean > p->mean;
    res.grounded_minus_plain = g->mean - p->mean;
  }
  return res;
}

}  // namespace graphparse
