#include "graphparse/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "graphparse/errors.hpp"

namespace graphparse {

std::string to_string(Precision p) { return p == Precision::F64 ? "f64" : "f32"; }

Precision parse_precision(const std::string& s) {
  if (s == "f32" || s == "32" || s == "float32") return Precision::F32;
  if (s == "f64" || s == "64" || s == "float64") return Precision::F64;
  throw std::invalid_argument("unknown precision '" + s + "' (expected f32 or f64)");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"model", model.to_json()},
          {"lr", lr},
          {"beta1", beta1},
          {"beta2", beta2},
          {"eps", eps},
          {"warmup_steps", warmup_steps},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"seed", seed},
          {"threshold", threshold},
          {"patience", patience},
          {"min_delta", min_delta},
          {"precision", to_string(precision)},
          {"dev_tuning", dev_tuning},
          {"dev_fraction", dev_fraction},
          {"eval_train", eval_train},
          {"stop_at_train_em", stop_at_train_em}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (j.contains("model")) c.model = ModelConfig::from_json(j.at("model"));
  c.lr = j.value("lr", c.lr);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  c.threshold = j.value("threshold", c.threshold);
  c.patience = j.value("patience", c.patience);
  c.min_delta = j.value("min_delta", c.min_delta);
  if (j.contains("precision")) c.precision = parse_precision(j.at("precision").get<std::string>());
  c.dev_tuning = j.value("dev_tuning", c.dev_tuning);
  c.dev_fraction = j.value("dev_fraction", c.dev_fraction);
  c.eval_train = j.value("eval_train", c.eval_train);
  c.stop_at_train_em = j.value("stop_at_train_em", c.stop_at_train_em);
  return c;
}

void TrainConfig::validate() const {
  model.validate();
  if (!(lr > 0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(threshold > 0 && threshold < 1)) throw std::invalid_argument("threshold must lie in (0, 1)");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw std::invalid_argument("Adam betas must lie in [0, 1)");
  if (dev_tuning && !(dev_fraction > 0 && dev_fraction < 1))
    throw std::invalid_argument("dev_fraction must lie in (0, 1)");
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write metrics '" + path + "'");
  out << "epoch,split,loss,exact_match,edge_precision,edge_recall\n";
  out.precision(10);
  for (const auto& r : rows)
    out << r.epoch << ',' << r.split << ',' << r.loss << ',' << r.exact_match << ',' << r.edge_precision << ','
        << r.edge_recall << '\n';
}

ModelAssets build_assets(const std::vector<Example>& train, const ModelConfig& config, const PosLexicon& pos) {
  ModelAssets a;
  a.config = config;
  a.pos = pos;
  std::set<std::string> words, relations;
  for (std::size_t i = 0; i < train.size(); ++i) {
    for (auto& t : tokenize(train[i].question)) words.insert(std::move(t));
    try {
      for (auto& r : scan_relations(train[i].query)) relations.insert(std::move(r));
    } catch (const ParseError& e) {
      throw DataError("training example " + std::to_string(i) + ": " + e.what());
    }
  }
  a.words = WordVocab(std::vector<std::string>(words.begin(), words.end()));
  a.relations = RelationVocab(std::vector<std::string>(relations.begin(), relations.end()));
  return a;
}

void carve_dev(std::vector<std::size_t>& train, std::vector<std::size_t>& dev, double fraction, std::uint64_t seed) {
  Rng rng(seed ^ 0x5eed0fde7ULL);
  std::vector<std::size_t> order = train;
  std::sort(order.begin(), order.end());
  rng.shuffle(order);
  auto n_dev = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(order.size())));
  n_dev = std::min(std::max<std::size_t>(n_dev, 1), order.size() > 1 ? order.size() - 1 : 0);
  dev.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_dev));
  train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_dev), order.end());
  std::sort(dev.begin(), dev.end());
  std::sort(train.begin(), train.end());
}

template <typename T>
Trainer<T>::Trainer(TrainConfig config, ModelAssets assets, std::vector<Example> train, std::vector<Example> dev)
    : config_(std::move(config)),
      model_([&] {
        assets.config = config_.model;
        return std::move(assets);
      }()),
      train_raw_(std::move(train)),
      dev_raw_(std::move(dev)),
      rng_(config_.seed) {
  config_.validate();
  model_.initialize(rng_);
  const auto qopt = model_.assets().query_options();
  train_.reserve(train_raw_.size());
  for (std::size_t i = 0; i < train_raw_.size(); ++i) {
    try {
      const auto gold = parse_query(train_raw_[i].query, model_.assets().relations, qopt);
      train_.push_back(model_.make_example(train_raw_[i].question, gold));
    } catch (const std::exception& e) {
      throw DataError("training example " + std::to_string(i) + " (\"" + train_raw_[i].question + "\"): " + e.what());
    }
  }
  if (train_.empty()) throw DataError("no training examples");
  auto& p = model_.params();
  for (std::size_t i = 0; i < p.count(); ++i) {
    state_.m.emplace_back(p[i].value.rows(), p[i].value.cols());
    state_.v.emplace_back(p[i].value.rows(), p[i].value.cols());
  }
  state_.rng_state = rng_.state();
}

template <typename T>
double Trainer<T>::step(std::span<const std::size_t> batch) {
  auto& params = model_.params();
  params.zero_grad();
  double total = 0;
  Tape<T> tape;
  for (auto idx : batch) {
    tape.reset();
    const Var loss = model_.loss(tape, train_.at(idx));
    const double v = static_cast<double>(tape.value(loss)[0]);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "non-finite loss at step " << state_.step + 1 << " (epoch " << state_.epoch + 1 << ", example " << idx
          << "), lr " << config_.lr << "; parameter norms:";
      for (std::size_t i = 0; i < params.count(); ++i) {
        double n = 0;
        for (auto x : params[i].value.values()) n += static_cast<double>(x) * static_cast<double>(x);
        msg << ' ' << params[i].name << '=' << std::sqrt(n);
      }
      throw NumericError(msg.str());
    }
    tape.backward(loss);
    total += v;
  }
  adam_update();
  return total;
}

template <typename T>
void Trainer<T>::adam_update() {
  auto& params = model_.params();
  const std::size_t t = ++state_.step;
  double lr = config_.lr;
  if (config_.warmup_steps > 0)
    lr *= std::min(1.0, static_cast<double>(t) / static_cast<double>(config_.warmup_steps));
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.count(); ++i) {
    auto& p = params[i];
    auto& m = state_.m[i];
    auto& v = state_.v[i];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = static_cast<double>(p.grad[k]);
      const double mk = b1 * static_cast<double>(m[k]) + (1 - b1) * g;
      const double vk = b2 * static_cast<double>(v[k]) + (1 - b2) * g * g;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      p.value[k] = static_cast<T>(static_cast<double>(p.value[k]) -
                                  lr * (mk / c1) / (std::sqrt(vk / c2) + config_.eps));
    }
  }
}

template <typename T>
double Trainer<T>::dataset_loss() {
  double total = 0;
  Tape<T> tape;
  for (const auto& ex : train_) {
    tape.reset();
    total += static_cast<double>(tape.value(model_.loss(tape, ex, false))[0]);
  }
  return total;
}

template <typename T>
double Trainer<T>::run_epoch() {
  std::vector<std::size_t> order(train_.size());
  std::iota(order.begin(), order.end(), 0);
  rng_.shuffle(order);
  double total = 0;
  for (std::size_t b = 0; b < order.size(); b += config_.batch_size) {
    const std::size_t e = std::min(order.size(), b + config_.batch_size);
    total += step(std::span<const std::size_t>(order.data() + b, e - b));
  }
  state_.rng_state = rng_.state();
  return total;
}

template <typename T>
EvalReport Trainer<T>::eval_split(const std::vector<Example>& data, const std::string& name) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  EvalOptions opt;
  opt.threshold = config_.threshold;
  opt.max_failures = 0;
  opt.compute_loss = name != "train";
  return evaluate(model_, data, idx, name, opt);
}

template <typename T>
void Trainer<T>::run(const EpochHook& hook) {
  auto snapshot = [&] {
    auto& p = model_.params();
    state_.best.clear();
    for (std::size_t i = 0; i < p.count(); ++i) state_.best.push_back(p[i].value);
    state_.best_epoch = state_.epoch;
    state_.has_best = true;
  };
  while (!state_.finished && state_.epoch < config_.epochs) {
    const double loss = run_epoch();
    ++state_.epoch;
    MetricsRow tr{state_.epoch, "train", loss, 0, 0, 0};
    if (config_.eval_train) {
      const auto rep = eval_split(train_raw_, "train");
      tr.exact_match = rep.exact_match;
      tr.edge_precision = rep.edge_precision;
      tr.edge_recall = rep.edge_recall;
    }
    state_.history.push_back(tr);

    if (config_.dev_tuning && !dev_raw_.empty()) {
      const auto rep = eval_split(dev_raw_, "dev");
      state_.history.push_back({state_.epoch, "dev", rep.loss, rep.exact_match, rep.edge_precision, rep.edge_recall});
      if (!state_.has_best || rep.exact_match > state_.best_metric) {
        state_.best_metric = rep.exact_match;
        snapshot();
        state_.bad_epochs = 0;
      } else {
        ++state_.bad_epochs;
      }
    } else {
      if (!state_.has_best || loss < state_.best_metric) {
        state_.best_metric = loss;
        snapshot();
      }
      if (state_.epoch == 1 || loss < state_.plateau_ref * (1.0 - config_.min_delta)) {
        state_.plateau_ref = loss;
        state_.bad_epochs = 0;
      } else {
        ++state_.bad_epochs;
      }
    }

    if (config_.stop_at_train_em > 0 && config_.eval_train && tr.exact_match >= config_.stop_at_train_em) {
      if (!config_.dev_tuning) snapshot();
      state_.finished = true;
      state_.stop_reason = "train exact match target reached";
    } else if (config_.patience > 0 && state_.bad_epochs >= config_.patience) {
      state_.finished = true;
      state_.stop_reason = "patience exhausted";
    } else if (state_.epoch >= config_.epochs) {
      state_.finished = true;
      state_.stop_reason = "epoch budget";
    }
    if (hook) hook(state_);
  }
}

template <typename T>
void Trainer<T>::restore_best() {
  if (!state_.has_best) return;
  auto& p = model_.params();
  for (std::size_t i = 0; i < p.count(); ++i) p[i].value = state_.best[i];
}

namespace {

constexpr DType dtype_for(float) { return DType::F32; }
constexpr DType dtype_for(double) { return DType::F64; }

nlohmann::json history_json(const std::vector<MetricsRow>& rows) {
  nlohmann::json h = nlohmann::json::array();
  for (const auto& r : rows)
    h.push_back({r.epoch, r.split, r.loss, r.exact_match, r.edge_precision, r.edge_recall});
  return h;
}

std::vector<MetricsRow> history_from(const nlohmann::json& h) {
  std::vector<MetricsRow> rows;
  for (const auto& r : h)
    rows.push_back({r.at(0).get<std::size_t>(), r.at(1).get<std::string>(), r.at(2).get<double>(),
                    r.at(3).get<double>(), r.at(4).get<double>(), r.at(5).get<double>()});
  return rows;
}

}  // namespace

template <typename T>
Checkpoint Trainer<T>::model_checkpoint(bool best) const {
  Checkpoint ck;
  const auto& a = model_.assets();
  ck.manifest = {{"format", "graphparse"},
                 {"kind", "model"},
                 {"assets", a.to_json()},
                 {"config_hash", a.config_hash()},
                 {"seed", config_.seed},
                 {"train_config", config_.to_json()},
                 {"dtype", to_string(config_.precision)},
                 {"parameter_count", model_.parameter_count()}};
  const auto& p = model_.params();
  const DType dt = dtype_for(T{});
  for (std::size_t i = 0; i < p.count(); ++i)
    ck.records.push_back(
        make_record("param/" + p[i].name, best && state_.has_best ? state_.best[i] : p[i].value, dt));
  return ck;
}

template <typename T>
Checkpoint Trainer<T>::checkpoint() const {
  Checkpoint ck = model_checkpoint(false);
  ck.manifest["kind"] = "train_state";
  ck.manifest["state"] = {{"step", state_.step},
                          {"epoch", state_.epoch},
                          {"best_metric", state_.best_metric},
                          {"plateau_ref", state_.plateau_ref},
                          {"best_epoch", state_.best_epoch},
                          {"has_best", state_.has_best},
                          {"bad_epochs", state_.bad_epochs},
                          {"rng_state", state_.rng_state},
                          {"finished", state_.finished},
                          {"stop_reason", state_.stop_reason},
                          {"history", history_json(state_.history)}};
  const auto& p = model_.params();
  const DType dt = dtype_for(T{});
  for (std::size_t i = 0; i < p.count(); ++i) {
    ck.records.push_back(make_record("adam.m/" + p[i].name, state_.m[i], dt));
    ck.records.push_back(make_record("adam.v/" + p[i].name, state_.v[i], dt));
    if (state_.has_best) ck.records.push_back(make_record("best/" + p[i].name, state_.best[i], dt));
  }
  return ck;
}

template <typename T>
Trainer<T> Trainer<T>::resume(const Checkpoint& ck, std::vector<Example> train, std::vector<Example> dev) {
  const auto& man = ck.manifest;
  if (man.value("kind", std::string()) != "train_state")
    throw DataError("checkpoint does not carry a resumable training state");
  auto assets = ModelAssets::from_json(man.at("assets"));
  if (assets.config_hash() != man.at("config_hash").get<std::string>())
    throw DataError("checkpoint manifest is inconsistent (config hash)");
  Trainer t(TrainConfig::from_json(man.at("train_config")), std::move(assets), std::move(train), std::move(dev));
  auto& p = t.model_.params();
  load_params(ck, p, "param/");
  const auto& s = man.at("state");
  t.state_.step = s.at("step").get<std::size_t>();
  t.state_.epoch = s.at("epoch").get<std::size_t>();
  t.state_.best_metric = s.at("best_metric").get<double>();
  t.state_.plateau_ref = s.at("plateau_ref").get<double>();
  t.state_.best_epoch = s.at("best_epoch").get<std::size_t>();
  t.state_.has_best = s.at("has_best").get<bool>();
  t.state_.bad_epochs = s.at("bad_epochs").get<std::size_t>();
  t.state_.rng_state = s.at("rng_state").get<std::uint64_t>();
  t.state_.finished = s.at("finished").get<bool>();
  t.state_.stop_reason = s.at("stop_reason").get<std::string>();
  t.state_.history = history_from(s.at("history"));
  t.rng_.set_state(t.state_.rng_state);
  t.state_.best.clear();
  for (std::size_t i = 0; i < p.count(); ++i) {
    restore(ck.at("adam.m/" + p[i].name), t.state_.m[i]);
    restore(ck.at("adam.v/" + p[i].name), t.state_.v[i]);
    if (t.state_.has_best) {
      Tensor<T> b(p[i].value.rows(), p[i].value.cols());
      restore(ck.at("best/" + p[i].name), b);
      t.state_.best.push_back(std::move(b));
    }
  }
  return t;
}

template <typename T>
Model<T> load_model(const Checkpoint& ck) {
  auto assets = ModelAssets::from_json(ck.manifest.at("assets"));
  if (assets.config_hash() != ck.manifest.at("config_hash").get<std::string>())
    throw DataError("checkpoint manifest is inconsistent (config hash)");
  Model<T> m(std::move(assets));
  const bool has_best = ck.find("best/" + m.params()[0].name) != nullptr;
  load_params(ck, m.params(), has_best ? "best/" : "param/");
  return m;
}

template class Trainer<float>;
template class Trainer<double>;
template Model<float> load_model(const Checkpoint&);
template Model<double> load_model(const Checkpoint&);

}  // namespace graphparse
