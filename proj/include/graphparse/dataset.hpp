#ifndef GRAPHPARSE_DATASET_HPP_
#define GRAPHPARSE_DATASET_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graphparse/query_ir.hpp"
#include "graphparse/text_pipeline.hpp"
#include "json.hpp"

namespace graphparse {

struct Example {
  std::string question;
  std::string query;                    // query_ir text grammar
  std::vector<std::string> derivation;  // rule ids; first is the root template
};

// Corpus file: one JSON object per line with question, query, optional derivation.
std::vector<Example> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<Example>& examples);

// Relations mentioned by the given examples, sorted by name.
RelationVocab collect_relations(const std::vector<Example>& examples, const std::vector<std::size_t>& indices);

// ---- synthetic grammar ----------------------------------------------------

struct VerbSpec {
  std::string relation;  // e.g. "direct"
  std::string past;      // "directed"
  std::string base;      // "direct"
};

struct GrammarConfig {
  std::vector<VerbSpec> verbs;
  // Template ids to sample from, uniformly. Empty = all built-in templates.
  std::vector<std::string> templates;
  std::size_t max_conjuncts = 3;
  std::size_t n_vars = 4;

  static GrammarConfig defaults();
  static GrammarConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Built-in template ids.
std::vector<std::string> builtin_templates();

// Deterministic given seed. Throws std::invalid_argument on a config whose
// templates would need more than n_vars variables.
std::vector<Example> generate(const GrammarConfig& grammar, std::size_t n_examples, std::uint64_t seed);

// Closed part-of-speech lexicon for the grammar's vocabulary.
PosLexicon grammar_lexicon(const GrammarConfig& grammar);

// ---- compound divergence splits -------------------------------------------

using FrequencyMap = std::map<std::string, double>;

// 1 - sum_x p(x)^alpha q(x)^(1-alpha) over normalized distributions.
// Throws ContractViolation when either map has no positive mass.
double divergence(const FrequencyMap& p, const FrequencyMap& q, double alpha = 0.5);

// Atoms are single rule ids, compounds are (root, child) rule pairs.
FrequencyMap atom_counts(const std::vector<Example>& examples, const std::vector<std::size_t>& indices);
FrequencyMap compound_counts(const std::vector<Example>& examples, const std::vector<std::size_t>& indices);

struct SplitSpec {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  double atom_divergence = 0.0;
  double compound_divergence = 0.0;
  bool warning = false;  // atom constraint could not be met
  std::string method;
  std::size_t accepted_swaps = 0;  // compound-raising swaps on a feasible split
  std::size_t repair_swaps = 0;    // swaps that made the initial partition feasible
  std::size_t proposals = 0;
  bool converged = false;
  std::vector<double> trajectory;  // compound divergence once feasible, then after each accepted swap; not serialized

  nlohmann::json to_json() const;
  static SplitSpec from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static SplitSpec load(const std::string& path);
};

struct SplitOptions {
  double test_fraction = 0.2;
  double atom_div_max = 0.02;
  double compound_alpha = 0.5;
  double atom_alpha = 0.5;
  std::size_t swap_budget = 50000;
  std::size_t proposals_per_step = 16;
  std::size_t patience = 5000;  // proposals without an accepted swap
  std::size_t tournament = 4;   // candidates compared when drawing each side of a swap
};

SplitSpec random_split(const std::vector<Example>& examples, std::uint64_t seed, const SplitOptions& options = {});

// Greedy swap search from a random partition: accepts the best of each batch
// of proposed train/test swaps iff it raises compound divergence and keeps
// atom divergence within bounds.
SplitSpec mcd_split(const std::vector<Example>& examples, std::uint64_t seed, const SplitOptions& options = {});

// Measures divergences of a given partition.
void measure_split(const std::vector<Example>& examples, SplitSpec& split, const SplitOptions& options = {});

// ---- CFQ-format loading -----------------------------------------------------

struct CfqFormat {
  std::string question_field = "question";
  std::string query_field = "query";
  bool strict = false;
  bool types_as_self_loops = false;
};

// Reduces a conjunctive SPARQL query to the query_ir grammar, or returns
// std::nullopt when the query falls outside the conjunctive fragment.
std::optional<std::string> normalize_sparql(const std::string& sparql, const CfqFormat& format = {});

struct CfqLoadResult {
  std::vector<Example> examples;
  std::size_t skipped = 0;
};

CfqLoadResult load_cfq(const std::string& path, const CfqFormat& format = {});

}  // namespace graphparse

#endif  // GRAPHPARSE_DATASET_HPP_
