#include "graphparse/diagnostics.hpp"

namespace graphparse {

ToyInstance toy_instance(Mode mode, std::size_t d) {
  ToyInstance t;
  t.assets.config.mode = mode;
  t.assets.config.d = d;
  t.assets.config.n_vars = 2;
  t.assets.words = WordVocab({"M0", "M1", "and", "directed", "who"});
  t.assets.relations = RelationVocab({"direct", "produce"});
  t.assets.pos.set("directed", "VBD");
  t.assets.pos.set("who", "WH");
  t.question = "who directed M0 and M1";
  t.query = "SELECT x0 WHERE { x0 direct M0 . x0 direct M1 }";
  return t;
}

ModelGradCheck model_gradcheck(Mode mode, std::size_t d, std::uint64_t seed, double tolerance, double epsilon) {
  const auto toy = toy_instance(mode, d);
  Model<double> model(toy.assets);
  Rng rng(seed);
  model.initialize(rng);
  const auto ex =
      model.make_example(toy.question, parse_query(toy.query, toy.assets.relations, toy.assets.query_options()));
  auto loss = [&](bool accumulate) {
    Tape<double> tape;
    const Var l = model.loss(tape, ex, accumulate);
    if (accumulate) tape.backward(l);
    return tape.value(l)[0];
  };
  ModelGradCheck out;
  out.mode = mode;
  out.parameter_count = model.parameter_count();
  out.report = grad_check(loss, model.params(), epsilon, tolerance);
  return out;
}

std::size_t parameter_count(const ModelConfig& config, std::size_t vocab_words, std::size_t relations) {
  ModelAssets a;
  a.config = config;
  std::vector<std::string> words;
  for (std::size_t i = 0; i < vocab_words; ++i) words.push_back("w" + std::to_string(i));
  std::vector<std::string> rels;
  for (std::size_t i = 0; i < relations; ++i) rels.push_back("r" + std::to_string(i));
  a.words = WordVocab(words);
  a.relations = RelationVocab(rels);
  return Model<float>(a).parameter_count();
}

}  // namespace graphparse
