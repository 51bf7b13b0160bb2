#include "graphparse/model.hpp"

#include <algorithm>
#include <cmath>

#include "graphparse/errors.hpp"

namespace graphparse {

nlohmann::json ModelAssets::to_json() const {
  std::vector<std::pair<std::string, std::string>> tags(pos.entries().begin(), pos.entries().end());
  std::sort(tags.begin(), tags.end());
  nlohmann::json lex = nlohmann::json::array();
  for (const auto& [k, v] : tags) lex.push_back({k, v});
  return {{"config", config.to_json()},
          {"words", words.words()},
          {"relations", relations.names()},
          {"pos_lexicon", lex}};
}

ModelAssets ModelAssets::from_json(const nlohmann::json& j) {
  ModelAssets a;
  a.config = ModelConfig::from_json(j.at("config"));
  a.words = WordVocab(j.at("words").get<std::vector<std::string>>());
  a.relations = RelationVocab(j.at("relations").get<std::vector<std::string>>());
  for (const auto& e : j.at("pos_lexicon")) a.pos.set(e.at(0).get<std::string>(), e.at(1).get<std::string>());
  return a;
}

std::string ModelAssets::config_hash() const { return hex64(fingerprint(to_json())); }

QueryOptions ModelAssets::query_options() const {
  QueryOptions o;
  o.allow_self_loops = config.allow_self_loops;
  return o;
}

template <typename T>
Model<T>::Model(ModelAssets assets) : assets_(std::move(assets)) {
  assets_.config.validate();
  const auto& c = assets_.config;
  enc_ = EncoderParams<T>::add_to(params_, assets_.words.size(), c.d);
  dec_ = DecoderParams<T>::add_to(params_, assets_.relations.size(), c.d, c.mode == Mode::Grounded,
                                  c.kind_head);
}

template <typename T>
void Model<T>::initialize(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(assets_.config.d));
  for (std::size_t i = 0; i < params_.count(); ++i) {
    auto& p = params_[i];
    const bool is_bias = p.name.size() >= 2 && p.name.compare(p.name.size() - 2, 2, ".b") == 0;
    for (auto& v : p.value.values()) v = is_bias ? T(0) : static_cast<T>(rng.uniform(-bound, bound));
    p.grad.fill(T(0));
  }
}

template <typename T>
EncoderInput Model<T>::encoder_input(std::string_view question) const {
  auto grouped = merge_groups(anonymize(question, entities_), assets_.pos, assets_.config.n_vars);
  return assets_.config.mode == Mode::Plain ? degroup(grouped) : grouped;
}

template <typename T>
PreparedInput Model<T>::prepare(std::string_view question) const {
  return prepare(encoder_input(question));
}

template <typename T>
PreparedInput Model<T>::prepare(const EncoderInput& input) const {
  return prepare_input(input, assets_.words, assets_.config);
}

template <typename T>
Tensor<T> Model<T>::edge_targets(const PreparedInput& in, const ConjunctiveQuery& gold) const {
  const std::size_t vars = gold.variable_span();
  if (vars > assets_.config.n_vars)
    throw DataError("gold query needs " + std::to_string(vars) + " variables; n_vars is " +
                    std::to_string(assets_.config.n_vars));
  auto node_index = [&](NodeRef n) -> std::uint32_t {
    for (std::size_t i = 0; i < in.nodes.size(); ++i)
      if (in.nodes[i] == n) return static_cast<std::uint32_t>(i);
    throw DataError("gold query mentions " + to_string(n) + " which the question does not");
  };
  Tensor<T> y(in.pairs.size(), assets_.relations.size());
  for (const auto& e : gold.edges()) {
    if (e.relation >= assets_.relations.size()) throw DataError("gold relation id out of range");
    const auto s = node_index(e.subject), o = node_index(e.object);
    bool found = false;
    for (std::size_t i = 0; i < in.pairs.size(); ++i) {
      if (in.pairs[i][0] == s && in.pairs[i][1] == o) {
        y(i, e.relation) = T(1);
        found = true;
        break;
      }
    }
    if (!found) throw DataError("gold edge on a masked self-pair " + to_string(e.subject));
  }
  return y;
}

template <typename T>
TrainingExample<T> Model<T>::make_example(std::string_view question, const ConjunctiveQuery& gold) const {
  TrainingExample<T> ex;
  ex.input = prepare(question);
  ex.gold = gold;
  ex.targets = edge_targets(ex.input, gold);
  return ex;
}

template <typename T>
typename Model<T>::Forward Model<T>::forward(Tape<T>& tape, const PreparedInput& in, bool trainable) {
  Forward f;
  f.enc = encode(tape, in, enc_, trainable);
  const Var feats = pair_features(tape, f.enc.nodes, in.pairs);
  if (dec_.grounded()) {
    std::vector<std::vector<std::uint32_t>> rows;
    for (auto p : in.attention_positions()) rows.push_back({p});
    const Var keys = tape.gather_sum(f.enc.hidden, rows);
    const Var values = tape.gather_sum(assets_.config.contextual_values ? f.enc.hidden : f.enc.inputs, rows);
    auto g = score_grounded(tape, feats, keys, values, dec_, trainable);
    f.logits = g.logits;
    f.alpha = g.alpha;
  } else {
    f.logits = score_plain(tape, feats, dec_, trainable);
  }
  if (dec_.kind_w) {
    const std::size_t nil = in.input.nil_position();
    f.kind = kind_logit(tape, tape.slice_rows(f.enc.hidden, nil, nil + 1), dec_, trainable);
  }
  return f;
}

template <typename T>
Var Model<T>::loss(Tape<T>& tape, const TrainingExample<T>& ex, bool trainable) {
  auto f = forward(tape, ex.input, trainable);
  Var total = tape.bce_with_logits(f.logits, ex.targets);
  if (f.kind.valid()) {
    Tensor<T> y(1, 1, ex.gold.kind() == QueryKind::Ask ? T(1) : T(0));
    total = tape.add(total, tape.bce_with_logits(f.kind, std::move(y)));
  }
  return total;
}

template <typename T>
EdgeScores Model<T>::score(const PreparedInput& in) {
  Tape<T> tape;
  auto f = forward(tape, in, false);
  EdgeScores s;
  s.nodes = in.nodes;
  s.pairs = in.pairs;
  s.relations = assets_.relations.size();
  const auto& logits = tape.value(f.logits);
  s.probs = Tensor<double>(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.size(); ++i) s.probs[i] = 1.0 / (1.0 + std::exp(-static_cast<double>(logits[i])));
  if (f.alpha.valid()) {
    const auto& a = tape.value(f.alpha);
    s.alpha = Tensor<double>(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) s.alpha[i] = static_cast<double>(a[i]);
  }
  if (f.kind.valid()) {
    s.has_kind = true;
    s.kind_prob = 1.0 / (1.0 + std::exp(-static_cast<double>(tape.value(f.kind)[0])));
  }
  return s;
}

template <typename T>
ConjunctiveQuery Model<T>::predict(const PreparedInput& in, double threshold) {
  return decode(score(in), threshold, assets_.query_options());
}

template class Model<float>;
template class Model<double>;

}  // namespace graphparse
