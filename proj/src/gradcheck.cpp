#include "graphparse/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace graphparse {

GradCheckReport grad_check(const LossFn& loss, ParamSet<double>& params, double epsilon,
                           double tolerance, double floor) {
  params.zero_grad();
  loss(true);
  std::vector<Tensor<double>> analytic;
  analytic.reserve(params.count());
  for (std::size_t i = 0; i < params.count(); ++i) analytic.push_back(params[i].grad);

  GradCheckReport report;
  for (std::size_t i = 0; i < params.count(); ++i) {
    auto& p = params[i];
    GradCheckEntry entry;
    entry.name = p.name;
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double saved = p.value[k];
      p.value[k] = saved + epsilon;
      const double up = loss(false);
      p.value[k] = saved - epsilon;
      const double down = loss(false);
      p.value[k] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[i][k];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      if (k == 0 || err > entry.max_rel_error) {
        entry.max_rel_error = err;
        entry.worst_index = k;
        entry.analytic = a;
        entry.numeric = numeric;
      }
    }
    entry.pass = entry.max_rel_error < tolerance;
    report.pass = report.pass && entry.pass;
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(entry);
  }
  params.zero_grad();
  return report;
}

}  // namespace graphparse
