#ifndef GRAPHPARSE_GRADCHECK_HPP_
#define GRAPHPARSE_GRADCHECK_HPP_

#include <functional>
#include <string>
#include <vector>

#include "graphparse/tensor.hpp"

namespace graphparse {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at worst_index
  double numeric = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool pass = true;
};

// Evaluates the loss at the current parameter values. When `accumulate` is
// true it must also add analytic gradients into Parameter::grad.
using LossFn = std::function<double(bool accumulate)>;

// |analytic - numeric| / max(|analytic|, |numeric|, floor), central differences.
GradCheckReport grad_check(const LossFn& loss, ParamSet<double>& params, double epsilon = 1e-5,
                           double tolerance = 1e-4, double floor = 1e-3);

}  // namespace graphparse

#endif  // GRAPHPARSE_GRADCHECK_HPP_
