#ifndef GRAPHPARSE_ABLATION_HPP_
#define GRAPHPARSE_ABLATION_HPP_

#include <functional>
#include <string>
#include <vector>

#include "graphparse/trainer.hpp"

namespace graphparse {

struct AblationRow {
  Mode mode = Mode::Grounded;
  std::vector<std::uint64_t> seeds;
  std::vector<double> test_exact;
  std::vector<double> train_exact;
  std::vector<std::size_t> epochs;
  double mean = 0;
  double stddev = 0;  // sample standard deviation; 0 for a single seed
};

struct AblationResult {
  std::vector<AblationRow> rows;
  // grounded > syntax_aware > plain on mean test exact match (strict)
  bool ordering_holds = false;
  double grounded_minus_plain = 0;

  const AblationRow* find(Mode m) const;
  nlohmann::json to_json() const;
  std::string table() const;
};

struct AblationConfig {
  TrainConfig base;  // mode and seed are overridden per run
  std::vector<Mode> modes = {Mode::Plain, Mode::SyntaxAware, Mode::Grounded};
  std::vector<std::uint64_t> seeds = {1, 2, 3};
};

using AblationProgress = std::function<void(Mode, std::uint64_t seed, double test_exact)>;

// Trains every mode under an identical budget for each seed and scores the
// split's test side. No test-side signal reaches training.
AblationResult run_ablation(const AblationConfig& config, const std::vector<Example>& corpus, const SplitSpec& split,
                            const PosLexicon& pos, const AblationProgress& progress = {});

}  // namespace graphparse

#endif  // GRAPHPARSE_ABLATION_HPP_
