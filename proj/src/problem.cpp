#include "svrmm/problem.hpp"

#include "svrmm/errors.hpp"

namespace svrmm {

void FiniteSumProblem::component_coeffs(std::size_t, const Vector&, std::span<double>) const {
  throw ConfigError(name() + " has no compact gradient representation");
}

void FiniteSumProblem::expand_coeffs(std::size_t, std::span<const double>, Vector&) const {
  throw ConfigError(name() + " has no compact gradient representation");
}

Vector FiniteSumProblem::initial_model(std::uint64_t) const { return Vector::Zero(dim()); }

}  // namespace svrmm
