#include "svrmm/surrogates.hpp"

#include <cmath>
#include <string>

#include "svrmm/errors.hpp"

namespace svrmm {

namespace {

void check_mu(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be positive and finite, got " + std::to_string(mu));
}

void check_same_size(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw DimensionError("vector lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
}

void check_penalty(double lambda, double alpha) {
  if (!(lambda >= 0.0) || !(alpha >= 0.0) || !std::isfinite(lambda) || !std::isfinite(alpha))
    throw ConfigError("penalty parameters must be finite and nonnegative");
}

double soft(double v, double theta) {
  const double a = std::abs(v) - theta;
  return a > 0.0 ? std::copysign(a, v) : 0.0;
}

// 1 - exp(-alpha t), accurate for small alpha t.
double eta(double alpha, double t) { return -std::expm1(-alpha * t); }

}  // namespace

Vector exp_l1_solve(const Vector& y, const Vector& g, double mu, double lambda, double alpha) {
  check_mu(mu);
  check_same_size(y, g);
  Vector x(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    const double theta = lambda * alpha * std::exp(-alpha * std::abs(y[i])) / mu;
    x[i] = soft(y[i] - g[i] / mu, theta);
  }
  return x;
}

Vector exp_group_l2_solve(const Vector& y, const Vector& g, double mu, double lambda, double alpha, Index rows,
                          Index cols) {
  check_mu(mu);
  check_same_size(y, g);
  if (rows * cols != y.size()) throw DimensionError("model length is not rows * cols");
  Vector x(y.size());
  for (Index i = 0; i < rows; ++i) {
    const auto yi = y.segment(i * cols, cols);
    const Vector vi = yi - g.segment(i * cols, cols) / mu;
    const double theta = lambda * alpha * std::exp(-alpha * yi.norm()) / mu;
    const double nv = vi.norm();
    if (nv >= theta && nv > 0.0)
      x.segment(i * cols, cols) = (1.0 - theta / nv) * vi;
    else
      x.segment(i * cols, cols).setZero();
  }
  return x;
}

Vector ZeroRegularizer::solve_subproblem(const Vector& y, const Vector& g, double mu) const {
  check_mu(mu);
  check_same_size(y, g);
  return y - g / mu;
}

// ---------------------------------------------------------------- exp-l1

ExponentialPenaltyL1::ExponentialPenaltyL1(double lambda, double alpha) : lambda_(lambda), alpha_(alpha) {
  check_penalty(lambda, alpha);
}

double ExponentialPenaltyL1::value(const Vector& x) const {
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i) s += eta(alpha_, std::abs(x[i]));
  return lambda_ * s;
}

double ExponentialPenaltyL1::surrogate_value(const Vector& x, const Vector& y) const {
  check_same_size(x, y);
  double lin = 0.0;
  for (Index i = 0; i < y.size(); ++i)
    lin += lambda_ * alpha_ * std::exp(-alpha_ * std::abs(y[i])) * (std::abs(x[i]) - std::abs(y[i]));
  return value(y) + lin;
}

Vector ExponentialPenaltyL1::solve_subproblem(const Vector& y, const Vector& g, double mu) const {
  return exp_l1_solve(y, g, mu, lambda_, alpha_);
}

// ---------------------------------------------------------------- exp-group-l2

ExponentialPenaltyGroupL2::ExponentialPenaltyGroupL2(double lambda, double alpha, Index rows, Index cols)
    : lambda_(lambda), alpha_(alpha), rows_(rows), cols_(cols) {
  check_penalty(lambda, alpha);
  if (rows <= 0 || cols <= 0) throw ConfigError("group penalty needs a positive shape");
}

double ExponentialPenaltyGroupL2::row_norm(const Vector& x, Index i) const {
  return x.segment(i * cols_, cols_).norm();
}

double ExponentialPenaltyGroupL2::value(const Vector& x) const {
  if (x.size() != rows_ * cols_) throw DimensionError("model length is not rows * cols");
  double s = 0.0;
  for (Index i = 0; i < rows_; ++i) s += eta(alpha_, row_norm(x, i));
  return lambda_ * s;
}

double ExponentialPenaltyGroupL2::surrogate_value(const Vector& x, const Vector& y) const {
  check_same_size(x, y);
  double lin = 0.0;
  for (Index i = 0; i < rows_; ++i) {
    const double ny = row_norm(y, i);
    lin += lambda_ * alpha_ * std::exp(-alpha_ * ny) * (row_norm(x, i) - ny);
  }
  return value(y) + lin;
}

Vector ExponentialPenaltyGroupL2::solve_subproblem(const Vector& y, const Vector& g, double mu) const {
  return exp_group_l2_solve(y, g, mu, lambda_, alpha_, rows_, cols_);
}

// ---------------------------------------------------------------- inner functions

L1Norm::L1Norm(double lambda) : lambda_(lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("l1 weight must be nonnegative");
}

double L1Norm::value(const Vector& x) const { return lambda_ * x.lpNorm<1>(); }

Vector L1Norm::prox(const Vector& v, double t) const {
  Vector x(v.size());
  for (Index i = 0; i < v.size(); ++i) x[i] = soft(v[i], t * lambda_);
  return x;
}

WeaklyConvexL1::WeaklyConvexL1(double lambda, double omega) : lambda_(lambda), omega_(omega) {
  if (!(lambda >= 0.0) || !(omega >= 0.0)) throw ConfigError("weakly convex l1 needs lambda, omega >= 0");
}

double WeaklyConvexL1::value(const Vector& x) const {
  return lambda_ * x.lpNorm<1>() - 0.5 * omega_ * x.squaredNorm();
}

Vector WeaklyConvexL1::prox(const Vector& v, double t) const {
  const double shrink = 1.0 - t * omega_;
  if (!(shrink > 0.0)) throw ConfigError("prox step too long for the weak convexity modulus");
  Vector x(v.size());
  for (Index i = 0; i < v.size(); ++i) x[i] = soft(v[i], t * lambda_) / shrink;
  return x;
}

QuadraticFunction::QuadraticFunction(double c) : c_(c) {}

double QuadraticFunction::value(const Vector& x) const { return 0.5 * c_ * x.squaredNorm(); }

Vector QuadraticFunction::gradient(const Vector& x) const { return c_ * x; }

double QuadraticFunction::lipschitz() const { return std::abs(c_); }

Vector QuadraticFunction::prox(const Vector& v, double t) const {
  const double s = 1.0 + t * c_;
  if (!(s > 0.0)) throw ConfigError("prox step too long for the quadratic");
  return v / s;
}

// ---------------------------------------------------------------- generic surrogates

ProximalSurrogate::ProximalSurrogate(std::shared_ptr<const ProxFunction> inner, std::optional<double> omega)
    : inner_(std::move(inner)) {
  if (!inner_) throw ConfigError("proximal surrogate needs an inner function");
  omega_ = omega.value_or(inner_->weak_convexity());
  if (!(omega_ >= inner_->weak_convexity()))
    throw ConfigError("omega is below the weak convexity modulus of r");
}

double ProximalSurrogate::value(const Vector& x) const { return inner_->value(x); }

double ProximalSurrogate::surrogate_value(const Vector& x, const Vector& y) const {
  check_same_size(x, y);
  return inner_->value(x) + 0.5 * omega_ * (x - y).squaredNorm();
}

Vector ProximalSurrogate::solve_subproblem(const Vector& y, const Vector& g, double mu) const {
  check_mu(mu);
  check_same_size(y, g);
  const double s = mu + omega_;
  return inner_->prox(y - g / s, 1.0 / s);
}

LipschitzGradientSurrogate::LipschitzGradientSurrogate(std::shared_ptr<const SmoothFunction> inner,
                                                       std::optional<double> rho)
    : inner_(std::move(inner)) {
  if (!inner_) throw ConfigError("lipschitz-gradient surrogate needs an inner function");
  rho_ = rho.value_or(inner_->lipschitz());
  if (!(rho_ >= inner_->lipschitz())) throw ConfigError("rho is below the gradient Lipschitz constant of r");
}

double LipschitzGradientSurrogate::value(const Vector& x) const { return inner_->value(x); }

double LipschitzGradientSurrogate::surrogate_value(const Vector& x, const Vector& y) const {
  check_same_size(x, y);
  const Vector d = x - y;
  return inner_->value(y) + inner_->gradient(y).dot(d) + 0.5 * rho_ * d.squaredNorm();
}

Vector LipschitzGradientSurrogate::solve_subproblem(const Vector& y, const Vector& g, double mu) const {
  check_mu(mu);
  check_same_size(y, g);
  return ((mu + rho_) * y - g - inner_->gradient(y)) / (mu + rho_);
}

DCSurrogate::DCSurrogate(std::shared_ptr<const ProxFunction> r1, std::shared_ptr<const SmoothFunction> r2)
    : r1_(std::move(r1)), r2_(std::move(r2)) {
  if (!r1_ || !r2_) throw ConfigError("dc surrogate needs both components");
  if (r1_->weak_convexity() > 0.0) throw ConfigError("dc surrogate needs a convex r1");
}

double DCSurrogate::value(const Vector& x) const { return r1_->value(x) - r2_->value(x); }

double DCSurrogate::surrogate_value(const Vector& x, const Vector& y) const {
  check_same_size(x, y);
  return r1_->value(x) - (r2_->value(y) + r2_->gradient(y).dot(x - y));
}

Vector DCSurrogate::solve_subproblem(const Vector& y, const Vector& g, double mu) const {
  check_mu(mu);
  check_same_size(y, g);
  return r1_->prox(y - (g - r2_->gradient(y)) / mu, 1.0 / mu);
}

}  // namespace svrmm
