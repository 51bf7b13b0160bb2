#ifndef GRAPHPARSE_TRAINER_HPP_
#define GRAPHPARSE_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphparse/checkpoint.hpp"
#include "graphparse/dataset.hpp"
#include "graphparse/evaluator.hpp"
#include "graphparse/model.hpp"

namespace graphparse {

enum class Precision : std::uint8_t { F32, F64 };

std::string to_string(Precision p);
Precision parse_precision(const std::string& s);

struct TrainConfig {
  ModelConfig model;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t warmup_steps = 0;  // linear warmup; 0 = constant lr
  std::size_t batch_size = 32;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  std::size_t patience = 10;  // epochs without improvement before stopping
  double min_delta = 1e-3;    // relative train-loss improvement that resets patience
  Precision precision = Precision::F32;
  bool dev_tuning = false;     // early-stop and select on a validation split carved from train
  double dev_fraction = 0.1;
  bool eval_train = true;      // exact match on train each epoch
  double stop_at_train_em = 0; // stop once train exact match reaches this (0 disables)

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  void validate() const;
};

struct MetricsRow {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0;
  double exact_match = 0;
  double edge_precision = 0;
  double edge_recall = 0;
};

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

template <typename T>
struct TrainState {
  std::vector<Tensor<T>> m, v;  // Adam moments, aligned with the model's params
  std::vector<Tensor<T>> best;  // best parameters so far
  std::size_t step = 0;
  std::size_t epoch = 0;
  double best_metric = 0;
  double plateau_ref = 0;  // train loss that last reset patience
  std::size_t best_epoch = 0;
  bool has_best = false;
  std::size_t bad_epochs = 0;
  std::uint64_t rng_state = 0;
  bool finished = false;
  std::string stop_reason;
  std::vector<MetricsRow> history;
};

// Vocabularies from the training examples: sorted words, sorted relations.
ModelAssets build_assets(const std::vector<Example>& train, const ModelConfig& config, const PosLexicon& pos);

// Carves a validation subset out of train indices; deterministic in seed.
void carve_dev(std::vector<std::size_t>& train, std::vector<std::size_t>& dev, double fraction, std::uint64_t seed);

template <typename T>
class Trainer {
 public:
  Trainer(TrainConfig config, ModelAssets assets, std::vector<Example> train, std::vector<Example> dev = {});
  static Trainer resume(const Checkpoint& ck, std::vector<Example> train, std::vector<Example> dev = {});

  Model<T>& model() { return model_; }
  const TrainConfig& config() const { return config_; }
  const TrainState<T>& state() const { return state_; }
  const std::vector<TrainingExample<T>>& examples() const { return train_; }

  // Summed loss of one minibatch with one Adam update.
  double step(std::span<const std::size_t> batch);
  // Summed loss over the training set, no update.
  double dataset_loss();
  // One shuffled pass; returns the summed loss.
  double run_epoch();

  using EpochHook = std::function<void(const TrainState<T>&)>;
  // Trains until the epoch budget, early stopping or the EM target.
  void run(const EpochHook& hook = {});

  void restore_best();
  // Full resumable state plus best parameters.
  Checkpoint checkpoint() const;
  // Best (or current) parameters only.
  Checkpoint model_checkpoint(bool best = true) const;

 private:
  void adam_update();
  EvalReport eval_split(const std::vector<Example>& data, const std::string& name);

  TrainConfig config_;
  Model<T> model_;
  std::vector<Example> train_raw_, dev_raw_;
  std::vector<TrainingExample<T>> train_;
  Rng rng_;
  TrainState<T> state_;
};

extern template class Trainer<float>;
extern template class Trainer<double>;

// Model with parameters restored from a checkpoint ("best/" records when
// present, else "param/").
template <typename T>
Model<T> load_model(const Checkpoint& ck);

}  // namespace graphparse

#endif  // GRAPHPARSE_TRAINER_HPP_
