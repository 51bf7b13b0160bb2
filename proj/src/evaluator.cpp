#include "graphparse/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "graphparse/errors.hpp"

namespace graphparse {

EdgeMatch align_edges(const ConjunctiveQuery& predicted, const ConjunctiveQuery& gold) {
  EdgeMatch m;
  m.predicted = predicted.edges().size();
  m.gold = gold.edges().size();
  if (m.predicted == 0 || m.gold == 0) return m;
  const std::set<Edge> gold_set(gold.edges().begin(), gold.edges().end());
  const std::size_t span = std::max(predicted.variable_span(), gold.variable_span());
  if (span > kMaxVariables) throw CapacityError("too many variables to align");
  std::vector<std::uint32_t> perm(span);
  std::iota(perm.begin(), perm.end(), 0);
  auto rename = [&](NodeRef n) { return n.is_variable() ? NodeRef::variable(perm[n.index]) : n; };
  do {
    std::size_t hit = 0;
    for (const auto& e : predicted.edges())
      if (gold_set.count({rename(e.subject), e.relation, rename(e.object)})) ++hit;
    m.correct = std::max(m.correct, hit);
  } while (m.correct < m.predicted && std::next_permutation(perm.begin(), perm.end()));
  return m;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json f = nlohmann::json::array();
  for (const auto& x : failures)
    f.push_back({{"index", x.index}, {"question", x.question}, {"gold", x.gold}, {"predicted", x.predicted}});
  return {{"split", split},
          {"n", n},
          {"loss", loss},
          {"exact_match", exact_match},
          {"edge_precision", edge_precision},
          {"edge_recall", edge_recall},
          {"edge_f1", edge_f1},
          {"kind_accuracy", kind_accuracy},
          {"precision_undefined", precision_undefined},
          {"failure_count", failure_count},
          {"failures", f}};
}

std::string EvalReport::table() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "split      n      exact   edge_p  edge_r  edge_f1 kind_acc\n"
                "%-10s %-6zu %6.2f%% %6.3f%s %6.3f  %6.3f  %6.2f%%\n",
                split.c_str(), n, 100.0 * exact_match, edge_precision, precision_undefined ? "*" : " ", edge_recall,
                edge_f1, 100.0 * kind_accuracy);
  std::string s = buf;
  if (precision_undefined) s += "* no edges predicted; precision reported as 0\n";
  return s;
}

namespace {

// Gold may use relations the model never saw; they get fresh ids so the
// example still counts (as unreachable) instead of aborting the run.
ConjunctiveQuery parse_gold(const std::string& text, RelationVocab& relations, const QueryOptions& options) {
  for (const auto& r : scan_relations(text))
    if (!relations.find(r)) relations.add(r);
  return parse_query(text, relations, options);
}

class Tally {
 public:
  explicit Tally(EvalReport& rep) : rep_(rep) {}

  bool add(const ConjunctiveQuery& pred, const ConjunctiveQuery& gold, const QueryOptions& options) {
    const bool ok = iso_equal(pred, gold, options);
    exact_ += ok;
    kind_ok_ += pred.kind() == gold.kind();
    const auto m = align_edges(pred, gold);
    predicted_ += m.predicted;
    gold_ += m.gold;
    correct_ += m.correct;
    ++n_;
    return ok;
  }

  void finish() {
    rep_.n = n_;
    const double n = static_cast<double>(std::max<std::size_t>(n_, 1));
    rep_.exact_match = static_cast<double>(exact_) / n;
    rep_.kind_accuracy = static_cast<double>(kind_ok_) / n;
    rep_.precision_undefined = predicted_ == 0;
    rep_.edge_precision = predicted_ ? static_cast<double>(correct_) / static_cast<double>(predicted_) : 0.0;
    rep_.edge_recall = gold_ ? static_cast<double>(correct_) / static_cast<double>(gold_) : 1.0;
    const double pr = rep_.edge_precision + rep_.edge_recall;
    rep_.edge_f1 = pr > 0 ? 2 * rep_.edge_precision * rep_.edge_recall / pr : 0.0;
  }

 private:
  EvalReport& rep_;
  std::size_t n_ = 0, exact_ = 0, kind_ok_ = 0, predicted_ = 0, gold_ = 0, correct_ = 0;
};

}  // namespace

EvalReport summarize(const std::vector<ConjunctiveQuery>& predicted, const std::vector<ConjunctiveQuery>& gold,
                     const std::string& split, const QueryOptions& options) {
  if (predicted.size() != gold.size()) throw ContractViolation("prediction and gold lists differ in length");
  EvalReport rep;
  rep.split = split;
  Tally tally(rep);
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (!tally.add(predicted[i], gold[i], options)) ++rep.failure_count;
  tally.finish();
  return rep;
}

template <typename T>
nlohmann::json prediction_record(Model<T>& model, const std::string& question, const std::string* gold,
                                 double threshold, bool edge_probs, bool attention) {
  const auto& rel = model.assets().relations;
  const auto in = model.prepare(question);
  const auto scores = model.score(in);
  const auto pred = decode(scores, threshold, model.assets().query_options());
  nlohmann::json j = {{"question", question}};
  if (gold) j["gold"] = *gold;
  j["predicted"] = serialize(pred, rel);
  if (scores.has_kind) j["ask_probability"] = scores.kind_prob;
  if (edge_probs) {
    nlohmann::json e = nlohmann::json::array();
    for (std::size_t p = 0; p < scores.pairs.size(); ++p)
      for (std::size_t r = 0; r < scores.relations; ++r) {
        const double v = scores.probs(p, r);
        if (v < 1e-3) continue;
        e.push_back({{"subject", to_string(scores.nodes[scores.pairs[p][0]])},
                     {"relation", rel.name(static_cast<std::uint32_t>(r))},
                     {"object", to_string(scores.nodes[scores.pairs[p][1]])},
                     {"p", v}});
      }
    j["edge_probs"] = e;
  }
  if (attention && scores.alpha.size() > 0) {
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& g : in.input.groups) {
      std::string s;
      for (const auto& m : g.members) s += (s.empty() ? "" : " ") + m;
      slots.push_back(s);
    }
    slots.push_back("NIL");
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t p = 0; p < scores.pairs.size(); ++p) {
      std::vector<double> a(scores.alpha.row(p).begin(), scores.alpha.row(p).end());
      rows.push_back({{"subject", to_string(scores.nodes[scores.pairs[p][0]])},
                      {"object", to_string(scores.nodes[scores.pairs[p][1]])},
                      {"alpha", a}});
    }
    j["attention"] = {{"slots", slots}, {"pairs", rows}};
  }
  return j;
}

template <typename T>
EvalReport evaluate(Model<T>& model, const std::vector<Example>& examples, const std::vector<std::size_t>& indices,
                    const std::string& split, const EvalOptions& options) {
  if (!options.expected_config_hash.empty() && options.expected_config_hash != model.assets().config_hash())
    throw DataError("config hash mismatch: checkpoint " + model.assets().config_hash() + " vs data " +
                    options.expected_config_hash + "; refusing to evaluate");
  std::ofstream dump;
  if (!options.predictions_path.empty()) {
    dump.open(options.predictions_path);
    if (!dump) throw DataError("cannot write predictions '" + options.predictions_path + "'");
  }
  RelationVocab relations = model.assets().relations;
  const auto qopt = model.assets().query_options();
  EvalReport rep;
  rep.split = split;
  Tally tally(rep);
  for (auto i : indices) {
    const Example& ex = examples.at(i);
    ConjunctiveQuery gold;
    try {
      gold = parse_gold(ex.query, relations, qopt);
    } catch (const ParseError& e) {
      throw DataError("example " + std::to_string(i) + ": " + e.what());
    }
    const auto in = model.prepare(ex.question);
    const auto scores = model.score(in);
    const auto pred = decode(scores, options.threshold, qopt);
    const bool ok = tally.add(pred, gold, qopt);
    if (options.compute_loss) {
      try {
        const auto tex = model.make_example(ex.question, gold);
        Tape<T> tape;
        rep.loss += static_cast<double>(tape.value(model.loss(tape, tex, false))[0]);
      } catch (const DataError&) {
        // gold outside the model's reach (unseen relation or missing entity)
      }
    }
    if (!ok) {
      ++rep.failure_count;
      if (rep.failures.size() < options.max_failures)
        rep.failures.push_back({i, ex.question, ex.query, serialize(pred, relations)});
    }
    if (dump.is_open()) {
      auto j = prediction_record(model, ex.question, &ex.query, options.threshold, options.dump_edge_probs,
                                 options.dump_attention);
      j["index"] = i;
      j["exact"] = ok;
      dump << j.dump() << '\n';
    }
  }
  tally.finish();
  return rep;
}

void write_failures(const std::string& path, const std::vector<Failure>& failures) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (const auto& f : failures)
    out << nlohmann::json{{"index", f.index}, {"question", f.question}, {"gold", f.gold}, {"predicted", f.predicted}}
               .dump()
        << '\n';
}

std::vector<Failure> read_failures(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<Failure> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    out.push_back({j.at("index").get<std::size_t>(), j.at("question").get<std::string>(),
                   j.at("gold").get<std::string>(), j.at("predicted").get<std::string>()});
  }
  return out;
}

template EvalReport evaluate(Model<float>&, const std::vector<Example>&, const std::vector<std::size_t>&,
                             const std::string&, const EvalOptions&);
template EvalReport evaluate(Model<double>&, const std::vector<Example>&, const std::vector<std::size_t>&,
                             const std::string&, const EvalOptions&);
template nlohmann::json prediction_record(Model<float>&, const std::string&, const std::string*, double, bool, bool);
template nlohmann::json prediction_record(Model<double>&, const std::string&, const std::string*, double, bool,
                                          bool);

}  // namespace graphparse
