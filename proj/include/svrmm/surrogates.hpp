#pragma once

#include <memory>
#include <optional>
#include <string>

#include "svrmm/regularizer.hpp"
#include "svrmm/types.hpp"

namespace svrmm {

/// argmin_x mu/2 ||x - y||^2 + <g, x> + sum_i lambda alpha exp(-alpha |y_i|) |x_i|,
/// i.e. soft thresholding of v = y - g/mu at theta_i = lambda alpha exp(-alpha |y_i|) / mu.
/// Throws ConfigError when mu <= 0.
Vector exp_l1_solve(const Vector& y, const Vector& g, double mu, double lambda, double alpha);

/// Row-wise group shrinkage for a rows x cols model stored row-major:
/// V_i = Y_i - G_i/mu, theta_i = lambda alpha exp(-alpha ||Y_i||) / mu,
/// X_i = (1 - theta_i/||V_i||) V_i if ||V_i|| >= theta_i, else 0.
Vector exp_group_l2_solve(const Vector& y, const Vector& g, double mu, double lambda, double alpha, Index rows,
                          Index cols);

/// r = 0, u = 0: the step is plain gradient descent with step 1/mu.
class ZeroRegularizer final : public SurrogateRegularizer {
 public:
  std::string name() const override { return "zero"; }
  double value(const Vector&) const override { return 0.0; }
  double surrogate_value(const Vector&, const Vector&) const override { return 0.0; }
  Vector solve_subproblem(const Vector& y, const Vector& g, double mu) const override;
};

/// r(w) = sum_i lambda (1 - exp(-alpha |w_i|)), majorized by linearizing the concave
/// eta(t) = 1 - exp(-alpha t) at |y_i|.
class ExponentialPenaltyL1 final : public SurrogateRegularizer {
 public:
  ExponentialPenaltyL1(double lambda, double alpha);

  std::string name() const override { return "exp-l1"; }
  double value(const Vector& x) const override;
  double surrogate_value(const Vector& x, const Vector& y) const override;
  Vector solve_subproblem(const Vector& y, const Vector& g, double mu) const override;

  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }

 private:
  double lambda_;
  double alpha_;
};

/// r(W) = lambda sum_i (1 - exp(-alpha ||W_i||)) over the rows of a rows x cols model.
class ExponentialPenaltyGroupL2 final : public SurrogateRegularizer {
 public:
  ExponentialPenaltyGroupL2(double lambda, double alpha, Index rows, Index cols);

  std::string name() const override { return "exp-group-l2"; }
  double value(const Vector& x) const override;
  double surrogate_value(const Vector& x, const Vector& y) const override;
  Vector solve_subproblem(const Vector& y, const Vector& g, double mu) const override;
  std::optional<Index> dimension() const override { return rows_ * cols_; }

 private:
  double row_norm(const Vector& x, Index i) const;

  double lambda_;
  double alpha_;
  Index rows_;
  Index cols_;
};

// ---------------------------------------------------------------- generic constructions

/// A function with an exact proximal map prox_{t r}(v) = argmin_x t r(x) + 1/2 ||x - v||^2.
class ProxFunction {
 public:
  virtual ~ProxFunction() = default;
  virtual double value(const Vector& x) const = 0;
  virtual Vector prox(const Vector& v, double t) const = 0;
  /// omega >= 0 such that r + omega/2 ||.||^2 is convex.
  virtual double weak_convexity() const { return 0.0; }
};

/// A differentiable function with Lipschitz gradient.
class SmoothFunction {
 public:
  virtual ~SmoothFunction() = default;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual double lipschitz() const = 0;
};

/// lambda ||x||_1.
class L1Norm final : public ProxFunction {
 public:
  explicit L1Norm(double lambda);
  double value(const Vector& x) const override;
  Vector prox(const Vector& v, double t) const override;

 private:
  double lambda_;
};

/// lambda ||x||_1 - omega/2 ||x||^2, which is omega-weakly convex.
class WeaklyConvexL1 final : public ProxFunction {
 public:
  WeaklyConvexL1(double lambda, double omega);
  double value(const Vector& x) const override;
  /// Requires t * omega < 1.
  Vector prox(const Vector& v, double t) const override;
  double weak_convexity() const override { return omega_; }

 private:
  double lambda_;
  double omega_;
};

/// c/2 ||x||^2 (convex for c >= 0).
class QuadraticFunction final : public SmoothFunction, public ProxFunction {
 public:
  explicit QuadraticFunction(double c);
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  double lipschitz() const override;
  Vector prox(const Vector& v, double t) const override;
  double weak_convexity() const override { return c_ < 0.0 ? -c_ : 0.0; }

 private:
  double c_;
};

/// u(x, y) = r(x) + omega/2 ||x - y||^2 for an omega-weakly convex r.
class ProximalSurrogate final : public SurrogateRegularizer {
 public:
  /// omega defaults to the inner function's own modulus; must be at least that.
  explicit ProximalSurrogate(std::shared_ptr<const ProxFunction> inner, std::optional<double> omega = {});

  std::string name() const override { return "proximal"; }
  double value(const Vector& x) const override;
  double surrogate_value(const Vector& x, const Vector& y) const override;
  Vector solve_subproblem(const Vector& y, const Vector& g, double mu) const override;

 private:
  std::shared_ptr<const ProxFunction> inner_;
  double omega_;
};

/// u(x, y) = r(y) + <grad r(y), x - y> + rho/2 ||x - y||^2 with rho >= Lipschitz(grad r).
class LipschitzGradientSurrogate final : public SurrogateRegularizer {
 public:
  LipschitzGradientSurrogate(std::shared_ptr<const SmoothFunction> inner, std::optional<double> rho = {});

  std::string name() const override { return "lipschitz-gradient"; }
  double value(const Vector& x) const override;
  double surrogate_value(const Vector& x, const Vector& y) const override;
  Vector solve_subproblem(const Vector& y, const Vector& g, double mu) const override;

 private:
  std::shared_ptr<const SmoothFunction> inner_;
  double rho_;
};

/// r = r1 - r2 with r1 convex (exact prox) and r2 convex smooth;
/// u(x, y) = r1(x) - r2(y) - <grad r2(y), x - y>.
class DCSurrogate final : public SurrogateRegularizer {
 public:
  DCSurrogate(std::shared_ptr<const ProxFunction> r1, std::shared_ptr<const SmoothFunction> r2);

  std::string name() const override { return "dc"; }
  double value(const Vector& x) const override;
  double surrogate_value(const Vector& x, const Vector& y) const override;
  Vector solve_subproblem(const Vector& y, const Vector& g, double mu) const override;

 private:
  std::shared_ptr<const ProxFunction> r1_;
  std::shared_ptr<const SmoothFunction> r2_;
};

}  // namespace svrmm
