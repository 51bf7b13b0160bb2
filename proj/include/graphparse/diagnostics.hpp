#ifndef GRAPHPARSE_DIAGNOSTICS_HPP_
#define GRAPHPARSE_DIAGNOSTICS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "graphparse/gradcheck.hpp"
#include "graphparse/model.hpp"

namespace graphparse {

// Tiny fixed instance: two relations, question "who directed M0 and M1"
// (three groups once merged), two variables.
struct ToyInstance {
  ModelAssets assets;
  std::string question;
  std::string query;
};

ToyInstance toy_instance(Mode mode, std::size_t d);

struct ModelGradCheck {
  Mode mode = Mode::Grounded;
  std::size_t parameter_count = 0;
  GradCheckReport report;
};

// Finite-difference check of the full model loss in 64-bit.
ModelGradCheck model_gradcheck(Mode mode, std::size_t d = 8, std::uint64_t seed = 0, double tolerance = 1e-4,
                               double epsilon = 1e-5);

// Parameter count of a model with the given shape (no data needed).
std::size_t parameter_count(const ModelConfig& config, std::size_t vocab_words, std::size_t relations);

}  // namespace graphparse

#endif  // GRAPHPARSE_DIAGNOSTICS_HPP_
