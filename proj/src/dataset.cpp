#include "graphparse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "graphparse/errors.hpp"
#include "graphparse/rng.hpp"

namespace graphparse {

// ---- corpus IO --------------------------------------------------------------

std::vector<Example> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus '" + path + "'");
  std::vector<Example> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      Example ex;
      ex.question = j.at("question").get<std::string>();
      ex.query = j.at("query").get<std::string>();
      if (j.contains("derivation")) ex.derivation = j.at("derivation").get<std::vector<std::string>>();
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_corpus(const std::string& path, const std::vector<Example>& examples) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus '" + path + "'");
  for (const auto& ex : examples) {
    nlohmann::json j = {{"question", ex.question}, {"query", ex.query}};
    if (!ex.derivation.empty()) j["derivation"] = ex.derivation;
    out << j.dump() << '\n';
  }
}

RelationVocab collect_relations(const std::vector<Example>& examples, const std::vector<std::size_t>& indices) {
  std::set<std::string> names;
  for (auto i : indices) {
    try {
      for (auto& r : scan_relations(examples.at(i).query)) names.insert(std::move(r));
    } catch (const ParseError& e) {
      throw DataError("example " + std::to_string(i) + ": " + e.what());
    }
  }
  return RelationVocab(std::vector<std::string>(names.begin(), names.end()));
}

// ---- synthetic grammar ------------------------------------------------------

namespace {

struct TemplateSpec {
  std::string id;
  std::size_t verbs;  // main clause (outer verbs for chains)
  std::size_t inner;  // verbs of the relative clause; 0 = no chain
  std::size_t entities;
  bool ask;
};

// who V E | who V1 and V2 E | ... | did E1 V E2 | who V1 a person that V2 E
const std::vector<TemplateSpec>& templates() {
  static const std::vector<TemplateSpec> all = {
      {"who_v_e", 1, 0, 1, false},      {"who_vv_e", 2, 0, 1, false},     {"who_vvv_e", 3, 0, 1, false},
      {"who_v_ee", 1, 0, 2, false},     {"who_v_eee", 1, 0, 3, false},    {"who_vv_ee", 2, 0, 2, false},
      {"did_e_v_e", 1, 0, 2, true},     {"did_e_vv_e", 2, 0, 2, true},    {"who_v_x_v_e", 1, 1, 1, false},
      {"who_vv_x_v_e", 2, 1, 1, false}, {"who_v_x_vv_e", 1, 2, 1, false}, {"who_v_x_v_ee", 1, 1, 2, false},
  };
  return all;
}

const TemplateSpec* find_template(const std::string& id) {
  for (const auto& t : templates())
    if (id == t.id) return &t;
  return nullptr;
}

std::size_t conjuncts(const TemplateSpec& t) { return std::max({t.verbs, t.inner, t.ask ? std::size_t{1} : t.entities}); }

std::string conjoin(const std::vector<std::string>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? " and " : "") + parts[i];
  return s;
}

}  // namespace

std::vector<std::string> builtin_templates() {
  std::vector<std::string> ids;
  for (const auto& t : templates()) ids.push_back(t.id);
  return ids;
}

GrammarConfig GrammarConfig::defaults() {
  GrammarConfig g;
  g.verbs = {{"direct", "directed", "direct"},       {"produce", "produced", "produce"},
             {"write", "wrote", "write"},            {"edit", "edited", "edit"},
             {"marry", "married", "marry"},          {"influence", "influenced", "influence"},
             {"employ", "employed", "employ"},       {"found", "founded", "found"},
             {"acquire", "acquired", "acquire"},     {"distribute", "distributed", "distribute"}};
  return g;
}

GrammarConfig GrammarConfig::from_json(const nlohmann::json& j) {
  GrammarConfig g = defaults();
  if (j.contains("verbs")) {
    g.verbs.clear();
    for (const auto& v : j.at("verbs"))
      g.verbs.push_back({v.at("relation").get<std::string>(), v.at("past").get<std::string>(),
                         v.at("base").get<std::string>()});
  }
  if (j.contains("templates")) g.templates = j.at("templates").get<std::vector<std::string>>();
  g.max_conjuncts = j.value("max_conjuncts", g.max_conjuncts);
  g.n_vars = j.value("n_vars", g.n_vars);
  return g;
}

nlohmann::json GrammarConfig::to_json() const {
  nlohmann::json verbs_j = nlohmann::json::array();
  for (const auto& v : verbs) verbs_j.push_back({{"relation", v.relation}, {"past", v.past}, {"base", v.base}});
  return {{"verbs", verbs_j}, {"templates", templates}, {"max_conjuncts", max_conjuncts}, {"n_vars", n_vars}};
}

PosLexicon grammar_lexicon(const GrammarConfig& grammar) {
  PosLexicon lex;
  for (const auto& v : grammar.verbs) {
    lex.set(v.past, "VBD");
    lex.set(v.base, "VB");
  }
  lex.set("who", "WH");
  lex.set("did", "AUX");
  lex.set("a", "DET");
  lex.set("person", "NOUN");
  lex.set("that", "WDT");
  lex.set("?", "PUNCT");
  lex.set("and", std::string(kConjTag));
  return lex;
}

std::vector<Example> generate(const GrammarConfig& grammar, std::size_t n_examples, std::uint64_t seed) {
  std::vector<const TemplateSpec*> active;
  const auto ids = grammar.templates.empty() ? builtin_templates() : grammar.templates;
  for (const auto& id : ids) {
    const auto* t = find_template(id);
    if (!t) throw std::invalid_argument("unknown template '" + id + "'");
    const std::size_t vars = t->inner ? 2 : (t->ask ? 0 : 1);
    if (vars > grammar.n_vars)
      throw std::invalid_argument("template '" + id + "' needs " + std::to_string(vars) +
                                  " variables but n_vars is " + std::to_string(grammar.n_vars));
    if (conjuncts(*t) <= grammar.max_conjuncts) active.push_back(t);
  }
  if (active.empty()) throw std::invalid_argument("grammar has no usable templates");
  for (const auto* t : active)
    if (t->verbs + t->inner > grammar.verbs.size())
      throw std::invalid_argument("template '" + std::string(t->id) + "' needs more verbs than configured");

  Rng rng(seed);
  std::vector<Example> out;
  out.reserve(n_examples);
  for (std::size_t n = 0; n < n_examples; ++n) {
    const auto& t = *active[rng.below(active.size())];
    std::vector<std::size_t> verb_pool(grammar.verbs.size());
    std::iota(verb_pool.begin(), verb_pool.end(), 0);
    std::vector<const VerbSpec*> verbs;
    for (std::size_t k = 0; k < t.verbs + t.inner; ++k) {
      const std::size_t pick = rng.below(verb_pool.size());
      verbs.push_back(&grammar.verbs[verb_pool[pick]]);
      verb_pool.erase(verb_pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }

    Example ex;
    ex.derivation.push_back(t.id);
    std::vector<std::string> clauses;
    std::vector<std::string> ents;
    for (std::size_t e = 0; e < t.entities; ++e) ents.push_back("M" + std::to_string(e));
    auto phrase = [&](std::size_t from, std::size_t to, bool base) {
      std::vector<std::string> forms;
      for (std::size_t k = from; k < to; ++k) {
        forms.push_back(base ? verbs[k]->base : verbs[k]->past);
        ex.derivation.push_back((base ? "vb:" : "v:") + verbs[k]->relation);
      }
      return conjoin(forms);
    };
    if (t.ask) {
      ex.question = "did M0 " + phrase(0, verbs.size(), true) + " M1 ?";
      for (const auto* v : verbs) clauses.push_back("M0 " + v->relation + " M1");
    } else if (t.inner) {
      const std::string outer = phrase(0, t.verbs, false);
      const std::string inner = phrase(t.verbs, t.verbs + t.inner, false);
      ex.question = "who " + outer + " a person that " + inner + " " + conjoin(ents) + " ?";
      for (std::size_t k = 0; k < t.verbs; ++k) clauses.push_back("x0 " + verbs[k]->relation + " x1");
      for (std::size_t k = t.verbs; k < verbs.size(); ++k)
        for (const auto& e : ents) clauses.push_back("x1 " + verbs[k]->relation + " " + e);
    } else {
      ex.question = "who " + phrase(0, t.verbs, false) + " " + conjoin(ents) + " ?";
      for (const auto* v : verbs)
        for (const auto& e : ents) clauses.push_back("x0 " + v->relation + " " + e);
    }
    std::string body;
    for (std::size_t c = 0; c < clauses.size(); ++c) body += (c ? " . " : "") + clauses[c];
    ex.query = (t.ask ? std::string("ASK") : std::string("SELECT x0")) + " WHERE { " + body + " }";
    out.push_back(std::move(ex));
  }
  return out;
}

// ---- divergence -------------------------------------------------------------

double divergence(const FrequencyMap& p, const FrequencyMap& q, double alpha) {
  double tp = 0, tq = 0;
  for (const auto& [k, v] : p) tp += v;
  for (const auto& [k, v] : q) tq += v;
  if (!(tp > 0) || !(tq > 0)) throw ContractViolation("divergence needs two distributions with positive mass");
  double coeff = 0;
  for (const auto& [k, v] : p) {
    auto it = q.find(k);
    if (it == q.end() || v <= 0 || it->second <= 0) continue;
    coeff += std::pow(v / tp, alpha) * std::pow(it->second / tq, 1.0 - alpha);
  }
  return std::clamp(1.0 - coeff, 0.0, 1.0);
}

namespace {

// The first derivation entry is the root rule; compounds pair it with each
// of its children.
std::vector<std::string> compounds_of(const Example& ex) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < ex.derivation.size(); ++i) out.push_back(ex.derivation[0] + ">" + ex.derivation[i]);
  return out;
}

}  // namespace

FrequencyMap atom_counts(const std::vector<Example>& examples, const std::vector<std::size_t>& indices) {
  FrequencyMap m;
  for (auto i : indices)
    for (const auto& a : examples.at(i).derivation) m[a] += 1;
  return m;
}

FrequencyMap compound_counts(const std::vector<Example>& examples, const std::vector<std::size_t>& indices) {
  FrequencyMap m;
  for (auto i : indices)
    for (const auto& c : compounds_of(examples.at(i))) m[c] += 1;
  return m;
}

nlohmann::json SplitSpec::to_json() const {
  return {{"train", train},
          {"test", test},
          {"atom_divergence", atom_divergence},
          {"compound_divergence", compound_divergence},
          {"warning", warning},
          {"method", method},
          {"accepted_swaps", accepted_swaps},
          {"repair_swaps", repair_swaps},
          {"proposals", proposals},
          {"converged", converged}};
}

SplitSpec SplitSpec::from_json(const nlohmann::json& j) {
  SplitSpec s;
  s.train = j.at("train").get<std::vector<std::size_t>>();
  s.test = j.at("test").get<std::vector<std::size_t>>();
  s.atom_divergence = j.value("atom_divergence", 0.0);
  s.compound_divergence = j.value("compound_divergence", 0.0);
  s.warning = j.value("warning", false);
  s.method = j.value("method", std::string());
  s.accepted_swaps = j.value("accepted_swaps", std::size_t{0});
  s.repair_swaps = j.value("repair_swaps", std::size_t{0});
  s.proposals = j.value("proposals", std::size_t{0});
  s.converged = j.value("converged", false);
  return s;
}

void SplitSpec::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write split '" + path + "'");
  out << to_json().dump(1) << '\n';
}

SplitSpec SplitSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open split '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

namespace {

// Dense counts of atoms and compounds per side, updated by swaps.
class SplitCounter {
 public:
  SplitCounter(const std::vector<Example>& examples, const SplitOptions& options) : options_(options) {
    std::unordered_map<std::string, std::uint32_t> atom_ids, comp_ids;
    auto intern = [](auto& ids, const std::string& key) {
      auto [it, inserted] = ids.emplace(key, static_cast<std::uint32_t>(ids.size()));
      return it->second;
    };
    atoms_.resize(examples.size());
    comps_.resize(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
      for (const auto& a : examples[i].derivation) atoms_[i].push_back(intern(atom_ids, a));
      for (const auto& c : compounds_of(examples[i])) comps_[i].push_back(intern(comp_ids, c));
    }
    atom_train_.assign(atom_ids.size(), 0);
    atom_test_.assign(atom_ids.size(), 0);
    comp_train_.assign(comp_ids.size(), 0);
    comp_test_.assign(comp_ids.size(), 0);
  }

  void place(std::size_t ex, bool test, int sign) {
    for (auto a : atoms_[ex]) (test ? atom_test_ : atom_train_)[a] += sign;
    for (auto c : comps_[ex]) (test ? comp_test_ : comp_train_)[c] += sign;
  }

  // Moves `train_ex` to test and `test_ex` to train (or back with undo).
  void swap(std::size_t train_ex, std::size_t test_ex) {
    place(train_ex, false, -1);
    place(train_ex, true, +1);
    place(test_ex, true, -1);
    place(test_ex, false, +1);
  }
  void undo(std::size_t train_ex, std::size_t test_ex) { swap(test_ex, train_ex); }

  // Share of an example's compound occurrences currently on the test side.
  double test_affinity(std::size_t ex) const {
    double t = 0, all = 0;
    for (auto c : comps_[ex]) {
      t += static_cast<double>(comp_test_[c]);
      all += static_cast<double>(comp_test_[c] + comp_train_[c]);
    }
    return all > 0 ? t / all : 0.0;
  }

  double compound_div() const { return div(comp_train_, comp_test_, options_.compound_alpha); }
  double atom_div() const { return div(atom_train_, atom_test_, options_.atom_alpha); }
  // Atoms seen on the test side but never in train.
  std::size_t uncovered() const {
    std::size_t n = 0;
    for (std::size_t a = 0; a < atom_test_.size(); ++a)
      if (atom_test_[a] > 0 && atom_train_[a] == 0) ++n;
    return n;
  }

 private:
  static double div(const std::vector<long>& p, const std::vector<long>& q, double alpha) {
    double tp = 0, tq = 0;
    for (auto v : p) tp += static_cast<double>(v);
    for (auto v : q) tq += static_cast<double>(v);
    if (tp <= 0 || tq <= 0) return 0.0;
    double coeff = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] > 0 && q[i] > 0)
        coeff += std::pow(static_cast<double>(p[i]) / tp, alpha) * std::pow(static_cast<double>(q[i]) / tq, 1.0 - alpha);
    return std::clamp(1.0 - coeff, 0.0, 1.0);
  }

  SplitOptions options_;
  std::vector<std::vector<std::uint32_t>> atoms_, comps_;
  std::vector<long> atom_train_, atom_test_, comp_train_, comp_test_;
};

void initial_partition(std::size_t n, Rng& rng, double test_fraction, std::vector<std::size_t>& train,
                       std::vector<std::size_t>& test) {
  if (n < 2) throw ContractViolation("cannot split fewer than two examples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
}

}  // namespace

void measure_split(const std::vector<Example>& examples, SplitSpec& split, const SplitOptions& options) {
  auto safe = [](const FrequencyMap& p, const FrequencyMap& q, double alpha) {
    double tp = 0, tq = 0;
    for (const auto& kv : p) tp += kv.second;
    for (const auto& kv : q) tq += kv.second;
    return (tp > 0 && tq > 0) ? divergence(p, q, alpha) : 0.0;
  };
  split.atom_divergence =
      safe(atom_counts(examples, split.train), atom_counts(examples, split.test), options.atom_alpha);
  split.compound_divergence =
      safe(compound_counts(examples, split.train), compound_counts(examples, split.test), options.compound_alpha);
}

SplitSpec random_split(const std::vector<Example>& examples, std::uint64_t seed, const SplitOptions& options) {
  Rng rng(seed);
  SplitSpec s;
  s.method = "random";
  initial_partition(examples.size(), rng, options.test_fraction, s.train, s.test);
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  measure_split(examples, s, options);
  s.warning = s.atom_divergence > options.atom_div_max;
  return s;
}

SplitSpec mcd_split(const std::vector<Example>& examples, std::uint64_t seed, const SplitOptions& options) {
  Rng rng(seed);
  SplitSpec s;
  s.method = "mcd";
  initial_partition(examples.size(), rng, options.test_fraction, s.train, s.test);
  SplitCounter counter(examples, options);
  for (auto i : s.train) counter.place(i, false, +1);
  for (auto i : s.test) counter.place(i, true, +1);

  double cur_c = counter.compound_div();
  double cur_a = counter.atom_div();
  std::size_t cur_u = counter.uncovered();
  auto feasible = [&](double a, std::size_t u) { return a <= options.atom_div_max && u == 0; };

  // Infeasible starting partitions are first repaired (coverage, then atom
  // balance); the trajectory covers only the feasible search.
  if (feasible(cur_a, cur_u)) s.trajectory.push_back(cur_c);
  std::size_t since_accept = 0;
  while (s.proposals < options.swap_budget && since_accept < options.patience) {
    struct Candidate {
      std::size_t ti, si;  // positions in train / test
      double c, a;
      std::size_t u;
    };
    std::optional<Candidate> best;
    const bool was_feasible = feasible(cur_a, cur_u);
    for (std::size_t b = 0; b < options.proposals_per_step && s.proposals < options.swap_budget; ++b) {
      ++s.proposals;
      // Tournament picks: train examples whose compounds lean to test, and
      // test examples whose compounds lean to train.
      std::size_t ti = rng.below(s.train.size());
      std::size_t si = rng.below(s.test.size());
      for (std::size_t k = 1; k < options.tournament; ++k) {
        const std::size_t a = rng.below(s.train.size());
        if (counter.test_affinity(s.train[a]) > counter.test_affinity(s.train[ti])) ti = a;
        const std::size_t b = rng.below(s.test.size());
        if (counter.test_affinity(s.test[b]) < counter.test_affinity(s.test[si])) si = b;
      }
      // Half the proposals exchange examples built from the same root rule,
      // which keeps atom frequencies close to balanced.
      if (rng.below(2) == 0) {
        const auto& root = examples[s.train[ti]].derivation;
        for (int tries = 0; tries < 32 && !root.empty(); ++tries) {
          const std::size_t cand = rng.below(s.test.size());
          const auto& other = examples[s.test[cand]].derivation;
          if (!other.empty() && other[0] == root[0]) {
            si = cand;
            break;
          }
        }
      }
      counter.swap(s.train[ti], s.test[si]);
      Candidate cand{ti, si, counter.compound_div(), counter.atom_div(), counter.uncovered()};
      counter.undo(s.train[ti], s.test[si]);

      bool ok;
      if (was_feasible) {
        ok = feasible(cand.a, cand.u) && cand.c > cur_c + 1e-12;
      } else {
        ok = cand.u < cur_u || (cand.u == cur_u && cand.a < cur_a - 1e-12);
      }
      if (!ok) continue;
      auto better = [&](const Candidate& x, const Candidate& y) {
        if (was_feasible) {
          if (x.c != y.c) return x.c > y.c;
        } else {
          if (x.u != y.u) return x.u < y.u;
          if (x.a != y.a) return x.a < y.a;
        }
        // Deterministic tie-break: lowest example index wins.
        auto key = [&](const Candidate& c) { return std::min(s.train[c.ti], s.test[c.si]); };
        return key(x) < key(y);
      };
      if (!best || better(cand, *best)) best = cand;
    }
    if (best) {
      counter.swap(s.train[best->ti], s.test[best->si]);
      std::swap(s.train[best->ti], s.test[best->si]);
      cur_c = best->c;
      cur_a = best->a;
      cur_u = best->u;
      if (was_feasible) {
        ++s.accepted_swaps;
        s.trajectory.push_back(cur_c);
      } else {
        ++s.repair_swaps;
        if (feasible(cur_a, cur_u)) s.trajectory.push_back(cur_c);
      }
      since_accept = 0;
    } else {
      since_accept += options.proposals_per_step;
    }
  }
  s.converged = since_accept >= options.patience;
  s.warning = !feasible(cur_a, cur_u);
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  measure_split(examples, s, options);
  return s;
}

// ---- CFQ --------------------------------------------------------------------

namespace {

std::vector<std::string> sparql_tokens(const std::string& text) {
  std::string padded;
  for (char c : text) {
    if (c == '{' || c == '}') {
      padded += ' ';
      padded += c;
      padded += ' ';
    } else {
      padded += c;
    }
  }
  std::istringstream in(padded);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::optional<std::string> sparql_term(const std::string& tok) {
  std::string t = tok;
  if (!t.empty() && t[0] == '?') t = t.substr(1);
  if (t.size() < 2 || (t[0] != 'x' && t[0] != 'M')) return std::nullopt;
  if (!std::all_of(t.begin() + 1, t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return std::nullopt;
  return t;
}

std::optional<std::string> sparql_relation(const std::string& tok) {
  std::string t = tok;
  if (t.rfind("ns:", 0) == 0) t = t.substr(3);
  std::string out;
  for (char c : t) {
    if (c == '.') {
      out += '_';
    } else if ((c >= 'a' && c <= 'z') || c == '_') {
      out += c;
    } else if (c >= 'A' && c <= 'Z') {
      out += static_cast<char>(c - 'A' + 'a');
    } else {
      return std::nullopt;  // property paths, inverse, IRIs
    }
  }
  if (out.empty()) return std::nullopt;
  return out;
}

}  // namespace

std::optional<std::string> normalize_sparql(const std::string& sparql, const CfqFormat& format) {
  const auto t = sparql_tokens(sparql);
  std::size_t i = 0;
  std::string head;
  if (i < t.size() && (t[i] == "SELECT" || t[i] == "select")) {
    ++i;
    if (i < t.size() && (t[i] == "DISTINCT" || t[i] == "distinct")) ++i;
    if (i < t.size() && (t[i] == "count(*)" || t[i] == "COUNT(*)")) {
      head = "ASK";
      ++i;
    } else {
      auto v = i < t.size() ? sparql_term(t[i]) : std::nullopt;
      if (!v || (*v)[0] != 'x') return std::nullopt;
      head = "SELECT " + *v;
      ++i;
    }
  } else if (i < t.size() && (t[i] == "ASK" || t[i] == "ask")) {
    head = "ASK";
    ++i;
  } else {
    return std::nullopt;
  }
  if (i < t.size() && (t[i] == "WHERE" || t[i] == "where")) ++i;
  if (i >= t.size() || t[i] != "{") return std::nullopt;
  ++i;
  std::vector<std::string> clauses;
  while (i < t.size() && t[i] != "}") {
    if (t[i] == ".") {
      ++i;
      continue;
    }
    if (t[i].rfind("FILTER", 0) == 0 || t[i].rfind("filter", 0) == 0) return std::nullopt;
    if (i + 2 >= t.size()) return std::nullopt;
    auto s = sparql_term(t[i]);
    if (!s) return std::nullopt;
    if (t[i + 1] == "a") {
      auto type = sparql_relation(t[i + 2]);
      if (!format.types_as_self_loops || !type) return std::nullopt;
      clauses.push_back(*s + " is_" + *type + " " + *s);
    } else {
      auto r = sparql_relation(t[i + 1]);
      auto o = sparql_term(t[i + 2]);
      if (!r || !o) return std::nullopt;
      clauses.push_back(*s + " " + *r + " " + *o);
    }
    i += 3;
  }
  if (i >= t.size() || clauses.empty()) return std::nullopt;
  std::string body;
  for (std::size_t c = 0; c < clauses.size(); ++c) body += (c ? " . " : "") + clauses[c];
  return head + " WHERE { " + body + " }";
}

CfqLoadResult load_cfq(const std::string& path, const CfqFormat& format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CFQ file '" + path + "'");
  CfqLoadResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string question, query;
    try {
      auto j = nlohmann::json::parse(line);
      question = j.at(format.question_field).get<std::string>();
      query = j.at(format.query_field).get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    auto normalized = normalize_sparql(query, format);
    if (!normalized) {
      if (format.strict)
        throw DataError(path + ":" + std::to_string(lineno) + ": query outside the conjunctive fragment");
      ++result.skipped;
      continue;
    }
    result.examples.push_back({question, *normalized, {}});
  }
  return result;
}

}  // namespace graphparse
