#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "svrmm/problem.hpp"
#include "svrmm/types.hpp"

namespace svrmm {
struct Dataset;
}

/// Data-parallel loops over components. Every reduction runs over a fixed block
/// partition of the index range and combines block partials in index order, so
/// results are bitwise identical for any OpenMP thread count.
namespace svrmm::kernels {

/// Components per reduction block in full-gradient sums.
inline constexpr std::size_t kGradientBlock = 256;
/// Blocks reduced per wave; bounds scratch memory to kWave * dim doubles.
inline constexpr std::size_t kWave = 16;
/// Batch entries per partial sum in gradient-difference reductions.
inline constexpr std::size_t kBatchBlock = 16;

/// Neumaier-compensated running sum of vectors.
class CompensatedSum {
 public:
  explicit CompensatedSum(Index dim) : sum_(Vector::Zero(dim)), comp_(Vector::Zero(dim)) {}
  void add(const Vector& v);
  Vector value() const { return sum_ + comp_; }

 private:
  Vector sum_;
  Vector comp_;
};

/// Neumaier-compensated sum of scalars, in order.
double compensated_sum(std::span<const double> values);

/// grad f(x) = (1/n) sum_i grad f_i(x).
Vector full_gradient(const FiniteSumProblem& p, const Vector& x);

/// (1/n) sum_i f_i(x).
double mean_loss(const FiniteSumProblem& p, const Vector& x);

/// grad f_i(x) for each listed i (one output per entry, no reduction).
std::vector<Vector> component_gradients(const FiniteSumProblem& p, const Vector& x,
                                        std::span<const std::size_t> indices);

/// sum over entries of grad f_i(x) - grad f_i(y), with multiplicity.
Vector sum_gradient_differences(const FiniteSumProblem& p, const Vector& x, const Vector& y,
                                std::span<const std::size_t> indices);

/// (1/n) sum_i term(i), evaluating terms concurrently. `term` must be pure.
double mean_of_terms(std::size_t n, const std::function<double(std::size_t)>& term);

/// Fraction of rows whose predicted class matches the label.
double accuracy(const FiniteSumProblem& p, const Vector& x, const Dataset& test);

/// Straightforward single-threaded versions of the kernels above. Kept as the
/// reference the parallel kernels are tested and benchmarked against; they agree
/// with the parallel versions up to summation order.
namespace serial {
Vector full_gradient(const FiniteSumProblem& p, const Vector& x);
double mean_loss(const FiniteSumProblem& p, const Vector& x);
std::vector<Vector> component_gradients(const FiniteSumProblem& p, const Vector& x,
                                        std::span<const std::size_t> indices);
Vector sum_gradient_differences(const FiniteSumProblem& p, const Vector& x, const Vector& y,
                                std::span<const std::size_t> indices);
double mean_of_terms(std::size_t n, const std::function<double(std::size_t)>& term);
double accuracy(const FiniteSumProblem& p, const Vector& x, const Dataset& test);
}  // namespace serial

}  // namespace svrmm::kernels
