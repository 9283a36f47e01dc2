#include "svrmm/estimators.hpp"

#include <string>

#include "svrmm/errors.hpp"
#include "svrmm/kernels.hpp"

namespace svrmm {

namespace {

void check_batch(const FiniteSumProblem& p, std::size_t b) {
  if (p.size() == 0) throw DataError("estimator over an empty problem");
  if (b == 0 || b > p.size())
    throw ConfigError("batch size " + std::to_string(b) + " outside [1, " + std::to_string(p.size()) + "]");
}

void check_period(std::size_t m) {
  if (m == 0) throw ConfigError("refresh period m must be at least 1");
}

}  // namespace

// ---------------------------------------------------------------- full

Vector FullEstimator::estimate(const Vector& x, Rng&) { return estimate(x); }

Vector FullEstimator::estimate(const Vector& x) {
  evals_ += p_.size();
  return kernels::full_gradient(p_, x);
}

double FullEstimator::upsilon(const Vector&) const {
  throw ConfigError("upsilon is undefined for the full-gradient method");
}

// ---------------------------------------------------------------- saga

SagaEstimator::SagaEstimator(const FiniteSumProblem& p, const Vector& x0, std::size_t batch_size,
                             SagaStorage storage)
    : p_(p), b_(batch_size), storage_(storage) {
  check_batch(p, batch_size);
  const Vector g0 = kernels::full_gradient(p, x0);
  evals_ = p.size();
  v_ = g0;
  if (storage == SagaStorage::Dense) {
    table_.assign(p.size(), g0);
  } else {
    width_ = p.compact_width();
    if (width_ <= 0) throw ConfigError(p.name() + " does not support compact SAGA storage");
    initial_grad_ = g0;
    coeffs_.assign(p.size() * static_cast<std::size_t>(width_), 0.0);
    fresh_.assign(p.size(), 0);
  }
}

void SagaEstimator::old_row(std::size_t i, Vector& out) const {
  if (storage_ == SagaStorage::Dense) {
    out = table_[i];
  } else if (fresh_[i]) {
    const auto w = static_cast<std::size_t>(width_);
    p_.expand_coeffs(i, std::span<const double>(coeffs_.data() + i * w, w), out);
  } else {
    out = initial_grad_;
  }
}

Vector SagaEstimator::table_row(std::size_t i) const {
  Vector r;
  old_row(i, r);
  return r;
}

Vector SagaEstimator::table_mean() const {
  kernels::CompensatedSum sum(p_.dim());
  Vector r;
  for (std::size_t i = 0; i < p_.size(); ++i) {
    old_row(i, r);
    sum.add(r);
  }
  return sum.value() / static_cast<double>(p_.size());
}

void SagaEstimator::set_table(std::vector<Vector> rows) {
  if (storage_ != SagaStorage::Dense) throw ConfigError("set_table requires dense SAGA storage");
  if (rows.size() != p_.size()) throw DimensionError("table needs one row per component");
  for (const auto& r : rows)
    if (r.size() != p_.dim()) throw DimensionError("table row length differs from model dimension");
  table_ = std::move(rows);
  v_ = table_mean();
  cached_rows_.clear();
  cached_coeffs_.clear();
}

void SagaEstimator::evaluate_fresh(const Vector& x, const std::vector<std::size_t>& ids) {
  cached_x_ = x;
  cached_rows_.clear();
  cached_coeffs_.clear();
  if (storage_ == SagaStorage::Dense) {
    auto rows = kernels::component_gradients(p_, x, ids);
    for (std::size_t k = 0; k < ids.size(); ++k) cached_rows_[ids[k]] = std::move(rows[k]);
    return;
  }
  const auto w = static_cast<std::size_t>(width_);
  std::vector<std::vector<double>> coeffs(ids.size(), std::vector<double>(w));
  std::vector<Vector> rows(ids.size());
#pragma omp parallel for schedule(static) if (ids.size() * static_cast<std::size_t>(p_.dim()) > 20000)
  for (std::ptrdiff_t e = 0; e < static_cast<std::ptrdiff_t>(ids.size()); ++e) {
    const auto k = static_cast<std::size_t>(e);
    p_.component_coeffs(ids[k], x, coeffs[k]);
    p_.expand_coeffs(ids[k], coeffs[k], rows[k]);
  }
  for (std::size_t k = 0; k < ids.size(); ++k) {
    cached_rows_[ids[k]] = std::move(rows[k]);
    cached_coeffs_[ids[k]] = std::move(coeffs[k]);
  }
}

Vector SagaEstimator::estimate(const Vector& x, const Batch& batch) {
  if (batch.size() == 0) throw ConfigError("empty batch");
  const auto ids = batch.distinct();
  evaluate_fresh(x, ids);
  evals_ += batch.size();

  Vector acc = Vector::Zero(p_.dim());
  Vector old;
  for (std::size_t i : batch.indices) {
    old_row(i, old);
    acc += cached_rows_.at(i) - old;
  }
  return acc / static_cast<double>(batch.size()) + v_;
}

void SagaEstimator::commit(const Vector& x, const Batch& batch) {
  const auto ids = batch.distinct();
  bool cached = cached_x_.size() == x.size() && cached_x_ == x;
  for (std::size_t i : ids) cached = cached && cached_rows_.count(i) != 0;
  if (!cached) {
    evaluate_fresh(x, ids);
    evals_ += ids.size();
  }

  const double n = static_cast<double>(p_.size());
  Vector old;
  for (std::size_t i : ids) {
    const Vector& row = cached_rows_.at(i);
    old_row(i, old);
    v_ += (row - old) / n;
    if (storage_ == SagaStorage::Dense) {
      table_[i] = row;
    } else {
      const auto w = static_cast<std::size_t>(width_);
      const auto& c = cached_coeffs_.at(i);
      std::copy(c.begin(), c.end(), coeffs_.begin() + static_cast<std::ptrdiff_t>(i * w));
      fresh_[i] = 1;
    }
  }
}

Vector SagaEstimator::estimate(const Vector& x, Rng& rng) {
  const Batch batch = rng.sample_batch(p_.size(), b_);
  Vector g = estimate(x, batch);
  commit(x, batch);
  return g;
}

double SagaEstimator::upsilon(const Vector& x) const {
  const double mean = kernels::mean_of_terms(p_.size(), [&](std::size_t i) {
    Vector old;
    old_row(i, old);
    return (p_.component_grad(i, x) - old).squaredNorm();
  });
  return mean / static_cast<double>(b_);
}

// ---------------------------------------------------------------- svrg

SvrgEstimator::SvrgEstimator(const FiniteSumProblem& p, const Vector& x0, std::size_t batch_size,
                             std::size_t period)
    : p_(p), b_(batch_size), m_(period), pivot_(x0) {
  check_batch(p, batch_size);
  check_period(period);
  pivot_grad_ = kernels::full_gradient(p, x0);
  evals_ = p.size();
}

Vector SvrgEstimator::refresh(const Vector& x) {
  pivot_ = x;
  pivot_grad_ = kernels::full_gradient(p_, x);
  evals_ += p_.size();
  ++refreshes_;
  return pivot_grad_;
}

Vector SvrgEstimator::estimate(const Vector& x, const Batch& batch) {
  if (batch.size() == 0) throw ConfigError("empty batch");
  const Vector diff = kernels::sum_gradient_differences(p_, x, pivot_, batch.indices);
  evals_ += 2 * batch.size();
  return diff / static_cast<double>(batch.size()) + pivot_grad_;
}

Vector SvrgEstimator::estimate(const Vector& x, Rng& rng) {
  if (rng.bernoulli(1.0 / static_cast<double>(m_))) return refresh(x);
  return estimate(x, rng.sample_batch(p_.size(), b_));
}

double SvrgEstimator::upsilon(const Vector& x) const {
  const double mean = kernels::mean_of_terms(p_.size(), [&](std::size_t i) {
    return (p_.component_grad(i, x) - p_.component_grad(i, pivot_)).squaredNorm();
  });
  return mean / static_cast<double>(b_);
}

// ---------------------------------------------------------------- sarah

SarahEstimator::SarahEstimator(const FiniteSumProblem& p, const Vector& x0, std::size_t batch_size,
                               std::size_t period)
    : p_(p), b_(batch_size), m_(period), prev_model_(x0) {
  check_batch(p, batch_size);
  check_period(period);
  prev_estimate_ = kernels::full_gradient(p, x0);
  evals_ = p.size();
}

Vector SarahEstimator::restart(const Vector& x) {
  Vector g = kernels::full_gradient(p_, x);
  evals_ += p_.size();
  ++refreshes_;
  prev_model_ = x;
  prev_estimate_ = g;
  return g;
}

Vector SarahEstimator::estimate(const Vector& x, const Batch& batch) {
  if (batch.size() == 0) throw ConfigError("empty batch");
  Vector g = kernels::sum_gradient_differences(p_, x, prev_model_, batch.indices) /
                 static_cast<double>(batch.size()) +
             prev_estimate_;
  evals_ += 2 * batch.size();
  prev_model_ = x;
  prev_estimate_ = g;
  return g;
}

Vector SarahEstimator::estimate(const Vector& x, Rng& rng) {
  if (rng.bernoulli(1.0 / static_cast<double>(m_))) return restart(x);
  return estimate(x, rng.sample_batch(p_.size(), b_));
}

double SarahEstimator::upsilon(const Vector&) const {
  return (prev_estimate_ - kernels::full_gradient(p_, prev_model_)).squaredNorm();
}

void SarahEstimator::set_state(Vector prev_model, Vector prev_estimate) {
  if (prev_model.size() != p_.dim() || prev_estimate.size() != p_.dim())
    throw DimensionError("SARAH state length differs from model dimension");
  prev_model_ = std::move(prev_model);
  prev_estimate_ = std::move(prev_estimate);
}

std::unique_ptr<GradientEstimator> make_estimator(Method method, const FiniteSumProblem& p, const Vector& x0,
                                                  const EstimatorOptions& options) {
  switch (method) {
    case Method::Saga:
      return std::make_unique<SagaEstimator>(p, x0, options.batch, options.storage);
    case Method::Svrg:
      return std::make_unique<SvrgEstimator>(p, x0, options.batch, options.period);
    case Method::Sarah:
      return std::make_unique<SarahEstimator>(p, x0, options.batch, options.period);
    case Method::Full:
      return std::make_unique<FullEstimator>(p);
  }
  throw ConfigError("unknown method");
}

}  // namespace svrmm
