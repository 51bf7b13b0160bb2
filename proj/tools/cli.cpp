#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "CLI11.hpp"
#include "graphparse/ablation.hpp"
#include "graphparse/dataset.hpp"
#include "graphparse/diagnostics.hpp"
#include "graphparse/errors.hpp"
#include "graphparse/evaluator.hpp"
#include "graphparse/trainer.hpp"

namespace fs = std::filesystem;

namespace graphparse::cli {

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory '" + dir + "': " + ec.message());
}

std::string sibling(const std::string& path, const std::string& suffix) { return path + suffix; }

// ---- shared data flags ------------------------------------------------------

struct DataFlags {
  std::string data;
  std::string split;
  bool cfq = false;
  bool strict = false;
  bool types_as_self_loops = false;

  void add(CLI::App* app, bool data_required) {
    auto* d = app->add_option("--data", data, "Corpus JSONL (question/query[/derivation])")->check(CLI::ExistingFile);
    if (data_required) d->required();
    app->add_option("--split", split, "Split JSON with train/test indices")->check(CLI::ExistingFile);
    app->add_flag("--cfq", cfq, "Read --data as CFQ-format JSONL and normalize SPARQL");
    app->add_flag("--strict", strict, "With --cfq: fail on queries outside the conjunctive fragment");
    app->add_flag("--types-as-self-loops", types_as_self_loops, "With --cfq: keep `?x a T` as self-loop edges");
  }

  std::vector<Example> load() const {
    if (!cfq) return load_corpus(data);
    CfqFormat f;
    f.strict = strict;
    f.types_as_self_loops = types_as_self_loops;
    auto r = load_cfq(data, f);
    if (r.skipped) std::cerr << "warning: skipped " << r.skipped << " examples outside the conjunctive fragment\n";
    return std::move(r.examples);
  }

  SplitSpec load_split(std::size_t n) const {
    SplitSpec s;
    if (split.empty()) {
      s.method = "all";
      s.train.resize(n);
      std::iota(s.train.begin(), s.train.end(), 0);
      return s;
    }
    s = SplitSpec::load(split);
    for (auto v : {&s.train, &s.test})
      for (auto i : *v)
        if (i >= n) throw DataError("split index " + std::to_string(i) + " out of range for corpus of " + std::to_string(n));
    return s;
  }

  nlohmann::json to_json() const {
    return {{"data", data}, {"split", split}, {"cfq", cfq}, {"strict", strict}, {"types_as_self_loops", types_as_self_loops}};
  }
};

std::vector<Example> pick(const std::vector<Example>& all, const std::vector<std::size_t>& idx) {
  std::vector<Example> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(all.at(i));
  return out;
}

// ---- training flags ---------------------------------------------------------

struct TrainFlags {
  TrainConfig tc;
  std::string mode = "grounded";
  std::string precision = "f32";
  std::string pos;
  bool no_kind_head = false;

  void add(CLI::App* app) {
    app->add_option("--mode", mode, "plain | syntax_aware | grounded")->capture_default_str();
    app->add_option("--d", tc.model.d, "Hidden size (even)")->capture_default_str();
    app->add_option("--n-vars", tc.model.n_vars, "Variable tokens appended to the input")->capture_default_str();
    app->add_option("--max-length", tc.model.max_length, "Maximum encoder positions")->capture_default_str();
    app->add_flag("--contextual-values", tc.model.contextual_values, "Ground on contextual h instead of word sums");
    app->add_flag("--allow-self-loops", tc.model.allow_self_loops, "Score (v, v) pairs");
    app->add_flag("--unk-for-oov", tc.model.unk_for_oov, "Map unseen words to UNK instead of failing");
    app->add_flag("--no-kind-head", no_kind_head, "Disable the Select/Ask classifier");
    app->add_option("--lr", tc.lr, "Adam learning rate")->capture_default_str();
    app->add_option("--warmup-steps", tc.warmup_steps, "Linear warmup steps (0 = off)")->capture_default_str();
    app->add_option("--batch-size", tc.batch_size, "Examples per update (gradients summed)")->capture_default_str();
    app->add_option("--epochs", tc.epochs, "Epoch budget")->capture_default_str();
    app->add_option("--seed", tc.seed, "Initialization and shuffling seed")->capture_default_str();
    app->add_option("--threshold", tc.threshold, "Edge decision threshold")->capture_default_str();
    app->add_option("--patience", tc.patience, "Epochs without improvement before stopping (0 = never)")
        ->capture_default_str();
    app->add_option("--min-delta", tc.min_delta, "Relative train-loss improvement that counts")->capture_default_str();
    app->add_option("--precision", precision, "f32 | f64")->capture_default_str();
    app->add_flag("--dev-tuning,!--no-dev-tuning", tc.dev_tuning,
                  "Select and early-stop on a validation split carved from train (default: off)");
    app->add_option("--dev-fraction", tc.dev_fraction, "Validation share of train with --dev-tuning")
        ->capture_default_str();
    app->add_option("--stop-at-train-em", tc.stop_at_train_em, "Stop once train exact match reaches this")
        ->capture_default_str();
    app->add_flag("--eval-train,!--no-eval-train", tc.eval_train, "Measure train exact match every epoch");
    app->add_option("--pos", pos, "POS lexicon TSV (default: the synthetic grammar's)")->check(CLI::ExistingFile);
  }

  TrainConfig resolve() {
    tc.model.mode = parse_mode(mode);
    tc.model.kind_head = !no_kind_head;
    tc.precision = parse_precision(precision);
    tc.validate();
    return tc;
  }

  PosLexicon lexicon() const { return pos.empty() ? grammar_lexicon(GrammarConfig::defaults()) : PosLexicon::load(pos); }
};

// ---- gen-data ---------------------------------------------------------------

int cmd_gen_data(const std::string& out, std::size_t n, std::uint64_t seed, const std::string& grammar_path,
                 std::size_t max_conjuncts, std::size_t n_vars, bool max_set, bool vars_set, std::string pos_out) {
  GrammarConfig g = GrammarConfig::defaults();
  if (!grammar_path.empty()) {
    std::ifstream in(grammar_path);
    if (!in) throw DataError("cannot open grammar '" + grammar_path + "'");
    try {
      g = GrammarConfig::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(grammar_path + ": " + e.what());
    }
  }
  if (max_set) g.max_conjuncts = max_conjuncts;
  if (vars_set) g.n_vars = n_vars;
  const auto corpus = generate(g, n, seed);
  save_corpus(out, corpus);
  if (pos_out.empty()) pos_out = sibling(out, ".pos.tsv");
  grammar_lexicon(g).save(pos_out);
  write_json(sibling(out, ".config.json"),
             {{"command", "gen-data"}, {"out", out}, {"n", n}, {"seed", seed}, {"grammar", g.to_json()}, {"pos_out", pos_out}});
  std::cout << "wrote " << corpus.size() << " examples to " << out << " (lexicon " << pos_out << ")\n";
  return kOk;
}

// ---- split ------------------------------------------------------------------

int cmd_split(const DataFlags& df, const std::string& out, const std::string& method, std::uint64_t seed,
              const SplitOptions& opt) {
  const auto corpus = df.load();
  const auto t0 = std::chrono::steady_clock::now();
  SplitSpec s;
  if (method == "mcd") {
    for (std::size_t i = 0; i < corpus.size(); ++i)
      if (corpus[i].derivation.empty())
        throw DataError("example " + std::to_string(i) + " has no derivation; mcd needs synthetic data");
    s = mcd_split(corpus, seed, opt);
  } else if (method == "random") {
    s = random_split(corpus, seed, opt);
  } else {
    throw std::invalid_argument("unknown split method '" + method + "' (mcd | random)");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s.save(out);
  write_json(sibling(out, ".config.json"),
             {{"command", "split"},
              {"input", df.to_json()},
              {"out", out},
              {"method", method},
              {"seed", seed},
              {"test_fraction", opt.test_fraction},
              {"atom_div_max", opt.atom_div_max},
              {"compound_alpha", opt.compound_alpha},
              {"atom_alpha", opt.atom_alpha},
              {"swap_budget", opt.swap_budget},
              {"proposals_per_step", opt.proposals_per_step},
              {"patience", opt.patience}});
  std::printf("%s split: train %zu, test %zu, compound divergence %.4f, atom divergence %.4f (%.2fs)%s\n",
              method.c_str(), s.train.size(), s.test.size(), s.compound_divergence, s.atom_divergence, secs,
              s.warning ? " WARNING: atom constraint not met" : "");
  return kOk;
}

// ---- train ------------------------------------------------------------------

template <typename T>
int train_impl(const DataFlags& df, TrainFlags& tf, const std::string& out_dir, const std::string& resume) {
  const auto corpus = df.load();
  const auto split = df.load_split(corpus.size());
  const TrainConfig tc = tf.resolve();
  std::vector<std::size_t> train_idx = split.train, dev_idx;
  if (tc.dev_tuning) carve_dev(train_idx, dev_idx, tc.dev_fraction, tc.seed);
  const auto train = pick(corpus, train_idx), dev = pick(corpus, dev_idx);
  ensure_dir(out_dir);

  std::optional<Trainer<T>> trainer;
  if (!resume.empty()) {
    trainer.emplace(Trainer<T>::resume(Checkpoint::load(resume), train, dev));
    std::cout << "resumed from " << resume << " at epoch " << trainer->state().epoch << "\n";
  } else {
    trainer.emplace(tc, build_assets(train, tc.model, tf.lexicon()), train, dev);
  }
  const auto& cfg = trainer->config();
  nlohmann::json resolved = {{"command", "train"},
                             {"input", df.to_json()},
                             {"out_dir", out_dir},
                             {"resume", resume},
                             {"train", cfg.to_json()},
                             {"config_hash", trainer->model().assets().config_hash()},
                             {"train_examples", train.size()},
                             {"dev_examples", dev.size()}};
  write_json(out_dir + "/config.json", resolved);
  std::cout << "parameters: " << trainer->model().parameter_count() << " (mode " << to_string(cfg.model.mode)
            << ", d " << cfg.model.d << ", " << trainer->model().assets().relations.size() << " relations, "
            << trainer->model().assets().words.size() << " embedding rows)\n";

  const std::string last = out_dir + "/last.ckpt", best = out_dir + "/best.ckpt", csv = out_dir + "/metrics.csv";
  const auto t0 = std::chrono::steady_clock::now();
  trainer->run([&](const TrainState<T>& st) {
    const auto& rows = st.history;
    for (auto it = rows.rbegin(); it != rows.rend() && it->epoch == st.epoch; ++it) {
      if (it->split != "train") continue;
      std::printf("epoch %4zu  loss %12.4f  train_em %6.2f%%  (%.1fs)\n", st.epoch, it->loss, 100 * it->exact_match,
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    if (cfg.dev_tuning && !rows.empty() && rows.back().split == "dev")
      std::printf("            dev_em %6.2f%%\n", 100 * rows.back().exact_match);
    std::fflush(stdout);
    trainer->checkpoint().save(last);
    write_metrics_csv(csv, st.history);
  });
  trainer->checkpoint().save(last);
  trainer->model_checkpoint(true).save(best);
  write_metrics_csv(csv, trainer->state().history);
  std::cout << "stopped after epoch " << trainer->state().epoch << ": " << trainer->state().stop_reason
            << "; best epoch " << trainer->state().best_epoch << "\nwrote " << best << ", " << last << ", " << csv
            << "\n";
  return kOk;
}

int cmd_train(const DataFlags& df, TrainFlags& tf, const std::string& out_dir, const std::string& resume) {
  Precision p = parse_precision(tf.precision);
  if (!resume.empty()) {
    const auto man = Checkpoint::load(resume).manifest;
    p = parse_precision(man.at("dtype").get<std::string>());
  }
  return p == Precision::F64 ? train_impl<double>(df, tf, out_dir, resume) : train_impl<float>(df, tf, out_dir, resume);
}

// ---- eval / predict ---------------------------------------------------------

bool is_f64(const Checkpoint& ck) { return ck.manifest.value("dtype", std::string("f32")) == "f64"; }

struct EvalFlags {
  std::string ckpt, part = "test", out, predictions, failures;
  bool edge_probs = false, attention = false;
  double threshold = 0.5;
};

template <typename T>
int eval_impl(const Checkpoint& ck, const DataFlags& df, const EvalFlags& ef) {
  auto model = load_model<T>(ck);
  const auto corpus = df.load();
  const auto split = df.load_split(corpus.size());
  EvalOptions opt;
  opt.threshold = ef.threshold;
  opt.predictions_path = ef.predictions;
  opt.dump_edge_probs = ef.edge_probs;
  opt.dump_attention = ef.attention;
  if (!df.split.empty()) {
    // Rebuild the vocabularies the checkpoint should have been trained with.
    auto train_idx = split.train, dev_idx = std::vector<std::size_t>{};
    const auto tc = TrainConfig::from_json(ck.manifest.at("train_config"));
    if (tc.dev_tuning) carve_dev(train_idx, dev_idx, tc.dev_fraction, tc.seed);
    opt.expected_config_hash =
        build_assets(pick(corpus, train_idx), model.config(), model.assets().pos).config_hash();
  } else {
    std::cerr << "note: no --split given; evaluating every example without the vocabulary hash check\n";
  }
  std::vector<std::size_t> idx;
  if (ef.part == "test")
    idx = df.split.empty() ? split.train : split.test;
  else if (ef.part == "train")
    idx = split.train;
  else if (ef.part == "all") {
    idx.resize(corpus.size());
    std::iota(idx.begin(), idx.end(), 0);
  } else {
    throw std::invalid_argument("--part must be test, train or all");
  }
  const auto rep = evaluate(model, corpus, idx, ef.part, opt);
  std::cout << rep.table();
  if (!ef.out.empty()) {
    auto j = rep.to_json();
    j["checkpoint"] = ef.ckpt;
    j["config_hash"] = model.assets().config_hash();
    write_json(ef.out, j);
    write_json(sibling(ef.out, ".config.json"), {{"command", "eval"},
                                                 {"ckpt", ef.ckpt},
                                                 {"input", df.to_json()},
                                                 {"part", ef.part},
                                                 {"threshold", ef.threshold},
                                                 {"predictions", ef.predictions}});
  }
  if (!ef.failures.empty()) write_failures(ef.failures, rep.failures);
  return kOk;
}

template <typename T>
int predict_impl(const Checkpoint& ck, const std::vector<std::string>& questions, const std::string& entities,
                 const EvalFlags& ef) {
  auto model = load_model<T>(ck);
  if (!entities.empty()) model.set_entity_lexicon(EntityLexicon::load(entities));
  std::ofstream file;
  if (!ef.out.empty()) {
    file.open(ef.out);
    if (!file) throw DataError("cannot write '" + ef.out + "'");
    write_json(sibling(ef.out, ".config.json"),
               {{"command", "predict"}, {"ckpt", ef.ckpt}, {"threshold", ef.threshold}, {"entities", entities}});
  }
  std::ostream& out = file.is_open() ? static_cast<std::ostream&>(file) : std::cout;
  for (const auto& q : questions)
    out << prediction_record(model, q, nullptr, ef.threshold, ef.edge_probs, ef.attention).dump() << '\n';
  return kOk;
}

// ---- gradcheck --------------------------------------------------------------

int cmd_gradcheck(const std::vector<std::string>& modes, std::size_t d, std::uint64_t seed, double tol, double eps,
                  const std::string& out) {
  bool ok = true;
  nlohmann::json rep = nlohmann::json::array();
  for (const auto& name : modes) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = model_gradcheck(parse_mode(name), d, seed, tol, eps);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ok = ok && r.report.pass;
    std::printf("%-4s %-13s d=%zu params=%zu max_rel_error=%.3e tol=%.0e (%.2fs)\n", r.report.pass ? "PASS" : "FAIL",
                to_string(r.mode).c_str(), d, r.parameter_count, r.report.max_rel_error, tol, secs);
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : r.report.entries) {
      if (!e.pass)
        std::printf("     %-12s rel %.3e at %zu (analytic %.6e, numeric %.6e)\n", e.name.c_str(), e.max_rel_error,
                    e.worst_index, e.analytic, e.numeric);
      entries.push_back({{"name", e.name}, {"max_rel_error", e.max_rel_error}, {"pass", e.pass}});
    }
    rep.push_back({{"mode", to_string(r.mode)}, {"pass", r.report.pass}, {"max_rel_error", r.report.max_rel_error},
                   {"seconds", secs}, {"parameters", entries}});
  }
  if (!out.empty()) {
    write_json(out, {{"pass", ok}, {"modes", rep}});
    write_json(sibling(out, ".config.json"), {{"command", "gradcheck"}, {"d", d}, {"seed", seed}, {"tol", tol}, {"eps", eps}, {"modes", modes}});
  }
  return ok ? kOk : kNumeric;
}

// ---- ablate -----------------------------------------------------------------

int cmd_ablate(const DataFlags& df, TrainFlags& tf, const std::vector<std::uint64_t>& seeds,
               const std::vector<std::string>& modes, const std::string& out_dir) {
  const auto corpus = df.load();
  const auto split = df.load_split(corpus.size());
  if (split.test.empty()) throw DataError("ablation needs a split with a test side (--split)");
  AblationConfig cfg;
  cfg.base = tf.resolve();
  cfg.seeds = seeds;
  cfg.modes.clear();
  for (const auto& m : modes) cfg.modes.push_back(parse_mode(m));
  ensure_dir(out_dir);
  nlohmann::json resolved = {{"command", "ablate"}, {"input", df.to_json()}, {"train", cfg.base.to_json()},
                             {"seeds", seeds}, {"modes", modes}, {"out_dir", out_dir}};
  write_json(out_dir + "/config.json", resolved);
  const auto res = run_ablation(cfg, corpus, split, tf.lexicon(), [](Mode m, std::uint64_t s, double em) {
    std::printf("%-13s seed %llu  test exact match %6.2f%%\n", to_string(m).c_str(), static_cast<unsigned long long>(s),
                100 * em);
    std::fflush(stdout);
  });
  std::cout << res.table();
  write_json(out_dir + "/ablation.json", res.to_json());
  return kOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Grounded graph decoding for conjunctive-query semantic parsing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "graphparse 0.1.0");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic question/query corpus");
  gen->set_config("--config");
  std::string gen_out, gen_grammar, gen_pos;
  std::size_t gen_n = 2000, gen_conj = 3, gen_vars = 4;
  std::uint64_t gen_seed = 0;
  gen->add_option("--out", gen_out, "Output corpus JSONL")->required();
  gen->add_option("--n", gen_n, "Number of examples")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  gen->add_option("--grammar", gen_grammar, "Grammar JSON (verbs, templates, max_conjuncts, n_vars)")
      ->check(CLI::ExistingFile);
  auto* conj_opt = gen->add_option("--max-conjuncts", gen_conj, "Largest conjunct count")->capture_default_str();
  auto* vars_opt = gen->add_option("--n-vars", gen_vars, "Variable budget the grammar must respect")->capture_default_str();
  gen->add_option("--pos-out", gen_pos, "POS lexicon TSV (default: <out>.pos.tsv)");

  // split
  auto* spl = app.add_subcommand("split", "Partition a corpus (maximum compound divergence or random)");
  spl->set_config("--config");
  DataFlags spl_data;
  spl_data.add(spl, true);
  std::string spl_out, spl_method = "mcd";
  std::uint64_t spl_seed = 0;
  SplitOptions spl_opt;
  spl->add_option("--out", spl_out, "Output split JSON")->required();
  spl->add_option("--method", spl_method, "mcd | random")->capture_default_str();
  spl->add_option("--seed", spl_seed, "Initial partition seed")->capture_default_str();
  spl->add_option("--test-fraction", spl_opt.test_fraction, "Test share")->capture_default_str();
  spl->add_option("--atom-div-max", spl_opt.atom_div_max, "Atom divergence ceiling")->capture_default_str();
  spl->add_option("--alpha", spl_opt.compound_alpha, "Chernoff alpha for compound divergence")->capture_default_str();
  spl->add_option("--atom-alpha", spl_opt.atom_alpha, "Chernoff alpha for atom divergence")->capture_default_str();
  spl->add_option("--swap-budget", spl_opt.swap_budget, "Swap proposals")->capture_default_str();
  spl->add_option("--proposals", spl_opt.proposals_per_step, "Proposals compared per accepted swap")
      ->capture_default_str();
  spl->add_option("--tournament", spl_opt.tournament, "Candidates compared per side when drawing a swap")
      ->capture_default_str();
  spl->add_option("--patience", spl_opt.patience, "Proposals without acceptance before declaring convergence")
      ->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "Train a model; writes checkpoints and a metrics CSV");
  tr->set_config("--config");
  DataFlags tr_data;
  tr_data.add(tr, true);
  TrainFlags tr_flags;
  tr_flags.add(tr);
  std::string tr_out = "run", tr_resume;
  tr->add_option("--out-dir", tr_out, "Output directory")->capture_default_str();
  tr->add_option("--resume", tr_resume, "Continue from a last.ckpt")->check(CLI::ExistingFile);

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  ev->set_config("--config");
  DataFlags ev_data;
  ev_data.add(ev, true);
  EvalFlags ev_flags;
  ev->add_option("--ckpt", ev_flags.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--part", ev_flags.part, "test | train | all")->capture_default_str();
  ev->add_option("--out", ev_flags.out, "Report JSON");
  ev->add_option("--predictions", ev_flags.predictions, "Prediction dump JSONL");
  ev->add_option("--failures", ev_flags.failures, "Failure list JSONL");
  ev->add_flag("--edge-probs", ev_flags.edge_probs, "Include edge probabilities in the dump");
  ev->add_flag("--attention", ev_flags.attention, "Include attention maps in the dump");
  ev->add_option("--threshold", ev_flags.threshold, "Edge decision threshold")->capture_default_str();

  // predict
  auto* pr = app.add_subcommand("predict", "Parse ad-hoc questions");
  pr->set_config("--config");
  EvalFlags pr_flags;
  std::vector<std::string> pr_questions;
  std::string pr_file, pr_entities;
  pr->add_option("--ckpt", pr_flags.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  pr->add_option("--question", pr_questions, "Question text (repeatable)");
  pr->add_option("--questions-file", pr_file, "One question per line")->check(CLI::ExistingFile);
  pr->add_option("--entities", pr_entities, "Entity lexicon TSV (surface, id)")->check(CLI::ExistingFile);
  pr->add_option("--out", pr_flags.out, "Output JSONL (default: stdout)");
  pr->add_flag("--edge-probs", pr_flags.edge_probs, "Include edge probabilities");
  pr->add_flag("--attention", pr_flags.attention, "Include attention maps");
  pr->add_option("--threshold", pr_flags.threshold, "Edge decision threshold")->capture_default_str();

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient check (64-bit)");
  gc->set_config("--config");
  std::size_t gc_d = 8;
  std::uint64_t gc_seed = 0;
  double gc_tol = 1e-4, gc_eps = 1e-5;
  std::vector<std::string> gc_modes = {"plain", "syntax_aware", "grounded"};
  std::string gc_out;
  gc->add_option("--d", gc_d, "Hidden size")->capture_default_str();
  gc->add_option("--seed", gc_seed, "Initialization seed")->capture_default_str();
  gc->add_option("--tol", gc_tol, "Relative error tolerance")->capture_default_str();
  gc->add_option("--eps", gc_eps, "Central difference step")->capture_default_str();
  gc->add_option("--modes", gc_modes, "Modes to check")->capture_default_str();
  gc->add_option("--out", gc_out, "Report JSON");

  // ablate
  auto* ab = app.add_subcommand("ablate", "Train all modes over several seeds and compare on the test split");
  ab->set_config("--config");
  DataFlags ab_data;
  ab_data.add(ab, true);
  TrainFlags ab_flags;
  ab_flags.add(ab);
  std::vector<std::uint64_t> ab_seeds = {1, 2, 3};
  std::vector<std::string> ab_modes = {"plain", "syntax_aware", "grounded"};
  std::string ab_out = "ablation";
  ab->add_option("--seeds", ab_seeds, "Training seeds")->capture_default_str();
  ab->add_option("--modes", ab_modes, "Modes to compare")->capture_default_str();
  ab->add_option("--out-dir", ab_out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // A missing input file is a data error, not a usage error.
    if (dynamic_cast<const CLI::ValidationError*>(&e) && std::string(e.what()).find("does not exist") != std::string::npos)
      return kData;
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen)
      return cmd_gen_data(gen_out, gen_n, gen_seed, gen_grammar, gen_conj, gen_vars, conj_opt->count() > 0,
                          vars_opt->count() > 0, gen_pos);
    if (*spl) return cmd_split(spl_data, spl_out, spl_method, spl_seed, spl_opt);
    if (*tr) return cmd_train(tr_data, tr_flags, tr_out, tr_resume);
    if (*ev) {
      const auto ck = Checkpoint::load(ev_flags.ckpt);
      return is_f64(ck) ? eval_impl<double>(ck, ev_data, ev_flags) : eval_impl<float>(ck, ev_data, ev_flags);
    }
    if (*pr) {
      if (!pr_file.empty()) {
        std::ifstream in(pr_file);
        std::string line;
        while (std::getline(in, line))
          if (line.find_first_not_of(" \t\r") != std::string::npos) pr_questions.push_back(line);
      }
      if (pr_questions.empty()) throw std::invalid_argument("predict needs --question or --questions-file");
      const auto ck = Checkpoint::load(pr_flags.ckpt);
      return is_f64(ck) ? predict_impl<double>(ck, pr_questions, pr_entities, pr_flags)
                        : predict_impl<float>(ck, pr_questions, pr_entities, pr_flags);
    }
    if (*gc) return cmd_gradcheck(gc_modes, gc_d, gc_seed, gc_tol, gc_eps, gc_out);
    if (*ab) return cmd_ablate(ab_data, ab_flags, ab_seeds, ab_modes, ab_out);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kData;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace graphparse::cli
