#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "graphparse/checkpoint.hpp"
#include "graphparse/dataset.hpp"
#include "graphparse/diagnostics.hpp"
#include "graphparse/errors.hpp"
#include "graphparse/evaluator.hpp"
#include "graphparse/query_ir.hpp"
#include "graphparse/trainer.hpp"

namespace py = pybind11;
using namespace graphparse;
using nlohmann::json;

namespace {

// JSON crosses the boundary as text; the Python wrapper decodes it.
std::vector<Example> examples_from(const std::string& text) {
  std::vector<Example> out;
  for (const auto& e : json::parse(text)) {
    Example ex;
    ex.question = e.at("question").get<std::string>();
    ex.query = e.at("query").get<std::string>();
    if (e.contains("derivation")) ex.derivation = e.at("derivation").get<std::vector<std::string>>();
    out.push_back(std::move(ex));
  }
  return out;
}

std::string examples_to(const std::vector<Example>& examples) {
  json j = json::array();
  for (const auto& e : examples) j.push_back({{"question", e.question}, {"query", e.query}, {"derivation", e.derivation}});
  return j.dump();
}

// Relation ids follow sorted names so canonical forms compare across calls.
RelationVocab sorted_relations(const std::vector<std::string>& texts) {
  std::vector<std::string> names;
  for (const auto& t : texts)
    for (auto& r : scan_relations(t)) names.push_back(std::move(r));
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return RelationVocab(std::move(names));
}

std::vector<Example> pick(const std::vector<Example>& all, const std::vector<std::size_t>& idx) {
  std::vector<Example> out;
  for (auto i : idx) out.push_back(all.at(i));
  return out;
}

template <typename T>
std::string train_impl(const std::vector<Example>& corpus, const SplitSpec& split, const TrainConfig& tc,
                       const std::string& out) {
  auto train_idx = split.train;
  std::vector<std::size_t> dev_idx;
  if (tc.dev_tuning) carve_dev(train_idx, dev_idx, tc.dev_fraction, tc.seed);
  const auto train = pick(corpus, train_idx);
  auto assets = build_assets(train, tc.model, grammar_lexicon(GrammarConfig::defaults()));
  Trainer<T> trainer(tc, std::move(assets), train, pick(corpus, dev_idx));
  trainer.run();
  trainer.model_checkpoint().save(out);
  json hist = json::array();
  for (const auto& r : trainer.state().history)
    hist.push_back({{"epoch", r.epoch}, {"split", r.split}, {"loss", r.loss}, {"exact_match", r.exact_match}});
  return json{{"history", hist}, {"stop_reason", trainer.state().stop_reason},
              {"best_epoch", trainer.state().best_epoch}, {"parameters", trainer.model().parameter_count()}}
      .dump();
}

template <typename T>
std::string evaluate_impl(const Checkpoint& ck, const std::vector<Example>& corpus,
                          const std::vector<std::size_t>& idx, double threshold) {
  auto model = load_model<T>(ck);
  EvalOptions opt;
  opt.threshold = threshold;
  return evaluate(model, corpus, idx, "eval", opt).to_json().dump();
}

template <typename T>
std::string predict_impl(const Checkpoint& ck, const std::string& question, double threshold) {
  auto model = load_model<T>(ck);
  return prediction_record(model, question, nullptr, threshold, false, false).dump();
}

bool is_f64(const Checkpoint& ck) { return ck.manifest.value("dtype", std::string("f32")) == "f64"; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("canonical_form", [](const std::string& q, std::size_t max_variables) {
    QueryOptions opt;
    opt.max_variables = max_variables;
    return canonical_form(parse_query(q, sorted_relations({q}), opt), opt);
  }, py::arg("query"), py::arg("max_variables") = 8);

  m.def("iso_equal", [](const std::string& a, const std::string& b) {
    const auto rel = sorted_relations({a, b});
    return iso_equal(parse_query(a, rel), parse_query(b, rel));
  }, py::arg("a"), py::arg("b"));

  m.def("generate", [](std::size_t n, std::uint64_t seed, const std::string& grammar) {
    const auto g = grammar.empty() ? GrammarConfig::defaults() : GrammarConfig::from_json(json::parse(grammar));
    return examples_to(generate(g, n, seed));
  }, py::arg("n"), py::arg("seed"), py::arg("grammar") = "");

  m.def("split", [](const std::string& examples, const std::string& method, std::uint64_t seed) {
    const auto ex = examples_from(examples);
    if (method != "mcd" && method != "random") throw std::invalid_argument("method must be mcd or random");
    return (method == "mcd" ? mcd_split(ex, seed) : random_split(ex, seed)).to_json().dump();
  }, py::arg("examples"), py::arg("method"), py::arg("seed"));

  m.def("train", [](const std::string& examples, const std::string& split, const std::string& config,
                    const std::string& out) {
    const auto corpus = examples_from(examples);
    const auto sp = SplitSpec::from_json(json::parse(split));
    const auto tc = TrainConfig::from_json(json::parse(config));
    tc.validate();
    py::gil_scoped_release release;
    return tc.precision == Precision::F64 ? train_impl<double>(corpus, sp, tc, out) : train_impl<float>(corpus, sp, tc, out);
  }, py::arg("examples"), py::arg("split"), py::arg("config"), py::arg("out"));

  m.def("evaluate", [](const std::string& ckpt, const std::string& examples, std::vector<std::size_t> indices,
                       double threshold) {
    const auto ck = Checkpoint::load(ckpt);
    const auto corpus = examples_from(examples);
    if (indices.empty())
      for (std::size_t i = 0; i < corpus.size(); ++i) indices.push_back(i);
    return is_f64(ck) ? evaluate_impl<double>(ck, corpus, indices, threshold)
                      : evaluate_impl<float>(ck, corpus, indices, threshold);
  }, py::arg("ckpt"), py::arg("examples"), py::arg("indices") = std::vector<std::size_t>{}, py::arg("threshold") = 0.5);

  m.def("predict", [](const std::string& ckpt, const std::string& question, double threshold) {
    const auto ck = Checkpoint::load(ckpt);
    return is_f64(ck) ? predict_impl<double>(ck, question, threshold) : predict_impl<float>(ck, question, threshold);
  }, py::arg("ckpt"), py::arg("question"), py::arg("threshold") = 0.5);

  m.def("gradcheck", [](const std::string& mode, std::size_t d, std::uint64_t seed, double tol) {
    const auto r = model_gradcheck(parse_mode(mode), d, seed, tol);
    return json{{"mode", mode}, {"pass", r.report.pass}, {"max_rel_error", r.report.max_rel_error},
                {"parameters", r.parameter_count}}
        .dump();
  }, py::arg("mode"), py::arg("d") = 8, py::arg("seed") = 0, py::arg("tol") = 1e-4);
}
