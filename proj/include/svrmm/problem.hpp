#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "svrmm/types.hpp"

namespace svrmm {

/// f(x) = (1/n) sum_i f_i(x) with differentiable components.
///
/// Implementations must be immutable after construction: every evaluation is a pure
/// function of (i, x), so batches may be evaluated concurrently.
///
/// Problems whose component gradients have the form a_i (x) c_i (a data row times a small
/// coefficient vector) advertise compact_width() > 0. The SAGA estimator then stores only
/// c_i per component. component_grad of such problems must be computed as
/// expand_coeffs(component_coeffs(...)) so both storage modes see identical doubles.
class FiniteSumProblem {
 public:
  virtual ~FiniteSumProblem() = default;

  virtual std::string name() const = 0;
  /// Number of components n.
  virtual std::size_t size() const = 0;
  virtual Index dim() const = 0;

  virtual double component_loss(std::size_t i, const Vector& x) const = 0;
  /// Overwrites `out` (resized to dim()) with grad f_i(x).
  virtual void component_grad(std::size_t i, const Vector& x, Vector& out) const = 0;
  Vector component_grad(std::size_t i, const Vector& x) const {
    Vector g;
    component_grad(i, x, g);
    return g;
  }

  /// L in the average-smoothness sense; absent when no analytic constant is known.
  virtual std::optional<double> smoothness_constant() const { return std::nullopt; }

  virtual int compact_width() const { return 0; }
  virtual void component_coeffs(std::size_t i, const Vector& x, std::span<double> out) const;
  virtual void expand_coeffs(std::size_t i, std::span<const double> coeffs, Vector& out) const;

  /// Predicted class id in [0,q) for one observation.
  virtual int predict(const SparseRow& a, const Vector& x) const = 0;

  /// Starting point x^0 for a run with this seed.
  virtual Vector initial_model(std::uint64_t seed) const;
};

}  // namespace svrmm
