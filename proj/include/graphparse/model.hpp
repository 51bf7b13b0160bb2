#ifndef GRAPHPARSE_MODEL_HPP_
#define GRAPHPARSE_MODEL_HPP_

#include <cstdint>
#include <string>
#include <string_view>

#include "graphparse/encoder.hpp"
#include "graphparse/graph_decoder.hpp"
#include "json.hpp"

namespace graphparse {

// Everything besides tensors that a trained model needs to run: config and
// the frozen vocabularies.
struct ModelAssets {
  ModelConfig config;
  WordVocab words;
  RelationVocab relations;
  PosLexicon pos;

  nlohmann::json to_json() const;
  static ModelAssets from_json(const nlohmann::json& j);
  // Fingerprint of config + vocabularies; checked before evaluation.
  std::string config_hash() const;
  QueryOptions query_options() const;
};

template <typename T>
struct TrainingExample {
  PreparedInput input;
  ConjunctiveQuery gold;
  Tensor<T> targets;  // P x R, 1 on gold edges
};

template <typename T>
class Model {
 public:
  explicit Model(ModelAssets assets);

  // Uniform(-1/sqrt(d), 1/sqrt(d)) weights and embeddings; zero biases.
  void initialize(Rng& rng);

  const ModelAssets& assets() const { return assets_; }
  const ModelConfig& config() const { return assets_.config; }
  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }
  std::size_t parameter_count() const { return params_.total_size(); }

  void set_entity_lexicon(EntityLexicon lex) { entities_ = std::move(lex); }

  // Anonymize, group (degrouped again in plain mode).
  EncoderInput encoder_input(std::string_view question) const;
  PreparedInput prepare(std::string_view question) const;
  PreparedInput prepare(const EncoderInput& input) const;

  // Throws DataError when the gold query names entities missing from the
  // question or needs more than n_vars variables.
  Tensor<T> edge_targets(const PreparedInput& in, const ConjunctiveQuery& gold) const;
  TrainingExample<T> make_example(std::string_view question, const ConjunctiveQuery& gold) const;

  struct Forward {
    EncoderOutput<T> enc;
    Var logits;
    Var alpha;
    Var kind;
  };
  Forward forward(Tape<T>& tape, const PreparedInput& in, bool trainable);

  // Negative joint log-likelihood over all candidate edges (plus the kind
  // head term when enabled).
  Var loss(Tape<T>& tape, const TrainingExample<T>& ex, bool trainable = true);

  EdgeScores score(const PreparedInput& in);
  ConjunctiveQuery predict(const PreparedInput& in, double threshold = 0.5);

 private:
  ModelAssets assets_;
  EntityLexicon entities_;
  ParamSet<T> params_;
  EncoderParams<T> enc_;
  DecoderParams<T> dec_;
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace graphparse

#endif  // GRAPHPARSE_MODEL_HPP_
