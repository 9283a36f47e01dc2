#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "svrmm/problem.hpp"
#include "svrmm/rng.hpp"
#include "svrmm/theory.hpp"
#include "svrmm/types.hpp"

namespace svrmm {

/// Stochastic estimate of grad f(x^k), stateful across iterations.
///
/// evals() counts component-gradient evaluations charged to the run, including
/// the initialization. Diagnostic evaluations (upsilon) are not charged.
class GradientEstimator {
 public:
  virtual ~GradientEstimator() = default;

  virtual Method method() const = 0;
  /// Estimate at the current iterate. Consumes `rng` in the documented order and
  /// advances any internal state that depends only on x^k.
  virtual Vector estimate(const Vector& x, Rng& rng) = 0;
  /// Upsilon^k evaluated before estimate() is called at iteration k.
  virtual double upsilon(const Vector& x) const = 0;

  std::uint64_t evals() const { return evals_; }
  /// Full-gradient refreshes (SVRG) or restarts (SARAH) taken so far.
  std::uint64_t refreshes() const { return refreshes_; }

 protected:
  std::uint64_t evals_ = 0;
  std::uint64_t refreshes_ = 0;
};

/// Exact gradient; the deterministic MM baseline.
class FullEstimator final : public GradientEstimator {
 public:
  explicit FullEstimator(const FiniteSumProblem& p) : p_(p) {}
  Method method() const override { return Method::Full; }
  Vector estimate(const Vector& x, Rng& rng) override;
  Vector estimate(const Vector& x);
  /// Throws ConfigError: upsilon is not defined for the exact gradient.
  double upsilon(const Vector& x) const override;

 private:
  const FiniteSumProblem& p_;
};

enum class SagaStorage {
  Dense,    // n stored gradient vectors
  Compact,  // per-component coefficients; requires compact_width() > 0
};

/// SAGA estimate  (1/b) sum_{i in I_k} (grad f_i(x^k) - table[i]) + v^k,  v^k = mean(table).
///
/// The estimate sums over the batch with multiplicity; the commit touches each distinct
/// id once, which keeps v equal to the mean of the table. The table starts with every
/// entry equal to grad f(x^0).
class SagaEstimator final : public GradientEstimator {
 public:
  SagaEstimator(const FiniteSumProblem& p, const Vector& x0, std::size_t batch_size,
                SagaStorage storage = SagaStorage::Dense);

  Method method() const override { return Method::Saga; }
  /// Draws a batch, forms the estimate and commits the table at x.
  Vector estimate(const Vector& x, Rng& rng) override;
  double upsilon(const Vector& x) const override;

  /// Estimate for a given batch; charges batch.size() evaluations and caches the fresh
  /// gradients for the following commit().
  Vector estimate(const Vector& x, const Batch& batch);
  /// table[i] <- grad f_i(x) and v <- v + (new - old)/n for each distinct i in the batch.
  void commit(const Vector& x, const Batch& batch);

  const Vector& average() const { return v_; }
  Vector table_row(std::size_t i) const;
  /// Mean of the table recomputed from scratch.
  Vector table_mean() const;
  /// Replace the table (dense storage only); v becomes the mean of the rows.
  void set_table(std::vector<Vector> rows);
  std::size_t batch_size() const { return b_; }

 private:
  void old_row(std::size_t i, Vector& out) const;
  /// Fresh gradient rows (and coefficients in compact mode) for distinct ids.
  void evaluate_fresh(const Vector& x, const std::vector<std::size_t>& ids);

  const FiniteSumProblem& p_;
  std::size_t b_;
  SagaStorage storage_;
  Vector v_;
  // dense storage
  std::vector<Vector> table_;
  // compact storage: stale entries still equal initial_grad_
  Vector initial_grad_;
  std::vector<double> coeffs_;
  std::vector<char> fresh_;
  int width_ = 0;
  // gradients at the last estimated x, keyed by component id
  Vector cached_x_;
  std::unordered_map<std::size_t, Vector> cached_rows_;
  std::unordered_map<std::size_t, std::vector<double>> cached_coeffs_;
};

/// Loop-less SVRG: with probability 1/m the pivot moves to x and the full gradient is
/// returned; otherwise  (1/b) sum (grad f_i(x) - grad f_i(pivot)) + grad f(pivot).
class SvrgEstimator final : public GradientEstimator {
 public:
  SvrgEstimator(const FiniteSumProblem& p, const Vector& x0, std::size_t batch_size, std::size_t period);

  Method method() const override { return Method::Svrg; }
  Vector estimate(const Vector& x, Rng& rng) override;
  double upsilon(const Vector& x) const override;

  /// pivot <- x, pivot_grad <- grad f(x); returns pivot_grad. Charges n evaluations.
  Vector refresh(const Vector& x);
  /// Non-refresh branch for a given batch. Charges 2b evaluations.
  Vector estimate(const Vector& x, const Batch& batch);

  const Vector& pivot() const { return pivot_; }
  const Vector& pivot_grad() const { return pivot_grad_; }

 private:
  const FiniteSumProblem& p_;
  std::size_t b_;
  std::size_t m_;
  Vector pivot_;
  Vector pivot_grad_;
};

/// Loop-less SARAH: with probability 1/m restart from grad f(x); otherwise
///   (1/b) sum (grad f_i(x) - grad f_i(x_prev)) + previous estimate.
/// Both branches record (x, estimate) as the new previous state.
class SarahEstimator final : public GradientEstimator {
 public:
  SarahEstimator(const FiniteSumProblem& p, const Vector& x0, std::size_t batch_size, std::size_t period);

  Method method() const override { return Method::Sarah; }
  Vector estimate(const Vector& x, Rng& rng) override;
  double upsilon(const Vector& x) const override;

  Vector restart(const Vector& x);
  Vector estimate(const Vector& x, const Batch& batch);

  const Vector& prev_estimate() const { return prev_estimate_; }
  const Vector& prev_model() const { return prev_model_; }
  /// Overrides the recursion state (for diagnostics and tests).
  void set_state(Vector prev_model, Vector prev_estimate);

 private:
  const FiniteSumProblem& p_;
  std::size_t b_;
  std::size_t m_;
  Vector prev_model_;
  Vector prev_estimate_;
};

struct EstimatorOptions {
  std::size_t batch = 1;
  std::size_t period = 1;
  SagaStorage storage = SagaStorage::Dense;
};

std::unique_ptr<GradientEstimator> make_estimator(Method method, const FiniteSumProblem& p, const Vector& x0,
                                                  const EstimatorOptions& options);

}  // namespace svrmm
