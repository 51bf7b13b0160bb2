#ifndef GRAPHPARSE_EVALUATOR_HPP_
#define GRAPHPARSE_EVALUATOR_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "graphparse/dataset.hpp"
#include "graphparse/model.hpp"
#include "json.hpp"

namespace graphparse {

struct EdgeMatch {
  std::size_t predicted = 0;
  std::size_t gold = 0;
  std::size_t correct = 0;  // under the best variable alignment
};

// Edge overlap maximized over injective renamings of predicted variables.
EdgeMatch align_edges(const ConjunctiveQuery& predicted, const ConjunctiveQuery& gold);

struct Failure {
  std::size_t index = 0;
  std::string question;
  std::string gold;
  std::string predicted;
};

struct EvalReport {
  std::string split;
  std::size_t n = 0;
  double loss = 0.0;  // summed over examples
  double exact_match = 0.0;
  double edge_precision = 0.0;
  double edge_recall = 0.0;
  double edge_f1 = 0.0;
  double kind_accuracy = 0.0;
  bool precision_undefined = false;  // no predicted edges at all; precision reported as 0
  std::vector<Failure> failures;     // first `max_failures`
  std::size_t failure_count = 0;

  nlohmann::json to_json() const;
  std::string table() const;
};

// Scores aligned prediction/gold lists (no model involved).
EvalReport summarize(const std::vector<ConjunctiveQuery>& predicted, const std::vector<ConjunctiveQuery>& gold,
                     const std::string& split, const QueryOptions& options = {});

struct EvalOptions {
  double threshold = 0.5;
  std::size_t max_failures = 50;
  bool compute_loss = true;
  // When set, evaluation is refused unless it equals the model's hash.
  std::string expected_config_hash;
  // Prediction dump (JSONL); empty disables it.
  std::string predictions_path;
  bool dump_edge_probs = false;
  bool dump_attention = false;
};

template <typename T>
EvalReport evaluate(Model<T>& model, const std::vector<Example>& examples, const std::vector<std::size_t>& indices,
                    const std::string& split, const EvalOptions& options = {});

// Per-prediction record in the dump format; optional fields only when asked.
template <typename T>
nlohmann::json prediction_record(Model<T>& model, const std::string& question, const std::string* gold,
                                 double threshold, bool edge_probs, bool attention);

std::vector<Failure> read_failures(const std::string& path);
void write_failures(const std::string& path, const std::vector<Failure>& failures);

}  // namespace graphparse

#endif  // GRAPHPARSE_EVALUATOR_HPP_
