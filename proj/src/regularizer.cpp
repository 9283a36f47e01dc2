#include "svrmm/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svrmm {

SurrogateReport check_surrogate_properties(const SurrogateRegularizer& s,
                                           const std::vector<std::pair<Vector, Vector>>& pairs,
                                           double tolerance) {
  SurrogateReport report;
  report.min_slack = std::numeric_limits<double>::infinity();
  report.samples.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    SurrogateSample sample;
    sample.slack = s.surrogate_value(x, y) - s.value(x);
    sample.equality_error = std::abs(s.surrogate_value(y, y) - s.value(y));
    sample.violated = sample.slack < -tolerance;
    report.min_slack = std::min(report.min_slack, sample.slack);
    report.max_equality_error = std::max(report.max_equality_error, sample.equality_error);
    if (sample.violated) ++report.violations;
    report.samples.push_back(sample);
  }
  if (pairs.empty()) report.min_slack = 0.0;
  return report;
}

}  // namespace svrmm
