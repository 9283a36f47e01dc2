#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "svrmm/types.hpp"

namespace svrmm {

/// A regularizer r together with a surrogate u(x, y) of r anchored at y:
///   u(y, y) = r(y) and u(x, y) >= r(x) for all x, y,
/// plus an exact solver of the MM subproblem
///   argmin_x  mu/2 ||x - y||^2 + <g, x> + u(x, y).
class SurrogateRegularizer {
 public:
  virtual ~SurrogateRegularizer() = default;

  virtual std::string name() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual double surrogate_value(const Vector& x, const Vector& y) const = 0;
  virtual Vector solve_subproblem(const Vector& y, const Vector& g, double mu) const = 0;
  /// Required model length, if the regularizer has one.
  virtual std::optional<Index> dimension() const { return std::nullopt; }
};

struct SurrogateSample {
  double slack;           // u(x,y) - r(x)
  double equality_error;  // |u(y,y) - r(y)|
  bool violated;          // slack < -tolerance
};

struct SurrogateReport {
  std::vector<SurrogateSample> samples;
  double min_slack = 0.0;
  double max_equality_error = 0.0;
  std::size_t violations = 0;
};

/// Evaluates both surrogate properties on each (x, y) pair.
SurrogateReport check_surrogate_properties(const SurrogateRegularizer& s,
                                           const std::vector<std::pair<Vector, Vector>>& pairs,
                                           double tolerance = 1e-12);

}  // namespace svrmm
