#include "svrmm/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "svrmm/errors.hpp"

namespace svrmm::kernels {

namespace {

std::ptrdiff_t as_signed(std::size_t v) { return static_cast<std::ptrdiff_t>(v); }

// Small workloads are not worth waking the thread team for.
bool worth_parallel(std::size_t items, Index dim) {
  return static_cast<double>(items) * static_cast<double>(std::max<Index>(dim, 1)) > 2.0e4;
}

}  // namespace

void CompensatedSum::add(const Vector& v) {
  for (Index j = 0; j < v.size(); ++j) {
    const double s = sum_[j];
    const double t = s + v[j];
    if (std::abs(s) >= std::abs(v[j]))
      comp_[j] += (s - t) + v[j];
    else
      comp_[j] += (v[j] - t) + s;
    sum_[j] = t;
  }
}

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

Vector full_gradient(const FiniteSumProblem& p, const Vector& x) {
  const std::size_t n = p.size();
  const Index d = p.dim();
  if (n == 0) throw DataError("full gradient of an empty problem");
  const std::size_t blocks = (n + kGradientBlock - 1) / kGradientBlock;
  const bool par = worth_parallel(n, d);

  CompensatedSum total(d);
  for (std::size_t wave = 0; wave < blocks; wave += kWave) {
    const std::size_t count = std::min(kWave, blocks - wave);
    std::vector<CompensatedSum> partial(count, CompensatedSum(d));
#pragma omp parallel for schedule(static) if (par)
    for (std::ptrdiff_t wb = 0; wb < as_signed(count); ++wb) {
      const std::size_t begin = (wave + static_cast<std::size_t>(wb)) * kGradientBlock;
      const std::size_t end = std::min(n, begin + kGradientBlock);
      Vector g(d);
      for (std::size_t i = begin; i < end; ++i) {
        p.component_grad(i, x, g);
        partial[static_cast<std::size_t>(wb)].add(g);
      }
    }
    for (const auto& part : partial) total.add(part.value());
  }
  return total.value() / static_cast<double>(n);
}

double mean_loss(const FiniteSumProblem& p, const Vector& x) {
  const std::size_t n = p.size();
  if (n == 0) throw DataError("loss of an empty problem");
  std::vector<double> losses(n);
#pragma omp parallel for schedule(static) if (worth_parallel(n, 8))
  for (std::ptrdiff_t i = 0; i < as_signed(n); ++i)
    losses[static_cast<std::size_t>(i)] = p.component_loss(static_cast<std::size_t>(i), x);
  return compensated_sum(losses) / static_cast<double>(n);
}

std::vector<Vector> component_gradients(const FiniteSumProblem& p, const Vector& x,
                                        std::span<const std::size_t> indices) {
  std::vector<Vector> out(indices.size());
#pragma omp parallel for schedule(static) if (worth_parallel(indices.size(), p.dim()))
  for (std::ptrdiff_t e = 0; e < as_signed(indices.size()); ++e) {
    const auto k = static_cast<std::size_t>(e);
    p.component_grad(indices[k], x, out[k]);
  }
  return out;
}

Vector sum_gradient_differences(const FiniteSumProblem& p, const Vector& x, const Vector& y,
                                std::span<const std::size_t> indices) {
  const Index d = p.dim();
  const std::size_t blocks = (indices.size() + kBatchBlock - 1) / kBatchBlock;
  Vector total = Vector::Zero(d);
  for (std::size_t wave = 0; wave < blocks; wave += kWave) {
    const std::size_t count = std::min(kWave, blocks - wave);
    std::vector<Vector> partial(count, Vector::Zero(d));
#pragma omp parallel for schedule(static) if (worth_parallel(count * kBatchBlock, d))
    for (std::ptrdiff_t wb = 0; wb < as_signed(count); ++wb) {
      const std::size_t begin = (wave + static_cast<std::size_t>(wb)) * kBatchBlock;
      const std::size_t end = std::min(indices.size(), begin + kBatchBlock);
      Vector gx(d), gy(d);
      Vector& acc = partial[static_cast<std::size_t>(wb)];
      for (std::size_t e = begin; e < end; ++e) {
        p.component_grad(indices[e], x, gx);
        p.component_grad(indices[e], y, gy);
        acc += gx - gy;
      }
    }
    for (const auto& part : partial) total += part;
  }
  return total;
}

double mean_of_terms(std::size_t n, const std::function<double(std::size_t)>& term) {
  if (n == 0) return 0.0;
  std::vector<double> terms(n);
#pragma omp parallel for schedule(static) if (n > 64)
  for (std::ptrdiff_t i = 0; i < as_signed(n); ++i)
    terms[static_cast<std::size_t>(i)] = term(static_cast<std::size_t>(i));
  return compensated_sum(terms) / static_cast<double>(n);
}

double accuracy(const FiniteSumProblem& p, const Vector& x, const Dataset& test) {
  const std::size_t n = test.n();
  if (n == 0) throw DataError("accuracy on an empty test set");
  long correct = 0;
#pragma omp parallel for schedule(static) reduction(+ : correct) if (worth_parallel(n, 8))
  for (std::ptrdiff_t i = 0; i < as_signed(n); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (p.predict(test.rows[k], x) == test.class_index(k)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

namespace serial {

Vector full_gradient(const FiniteSumProblem& p, const Vector& x) {
  const std::size_t n = p.size();
  if (n == 0) throw DataError("full gradient of an empty problem");
  CompensatedSum total(p.dim());
  Vector g;
  for (std::size_t i = 0; i < n; ++i) {
    p.component_grad(i, x, g);
    total.add(g);
  }
  return total.value() / static_cast<double>(n);
}

double mean_loss(const FiniteSumProblem& p, const Vector& x) {
  const std::size_t n = p.size();
  if (n == 0) throw DataError("loss of an empty problem");
  std::vector<double> losses(n);
  for (std::size_t i = 0; i < n; ++i) losses[i] = p.component_loss(i, x);
  return compensated_sum(losses) / static_cast<double>(n);
}

std::vector<Vector> component_gradients(const FiniteSumProblem& p, const Vector& x,
                                        std::span<const std::size_t> indices) {
  std::vector<Vector> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(p.component_grad(i, x));
  return out;
}

Vector sum_gradient_differences(const FiniteSumProblem& p, const Vector& x, const Vector& y,
                                std::span<const std::size_t> indices) {
  Vector total = Vector::Zero(p.dim());
  for (std::size_t i : indices) total += p.component_grad(i, x) - p.component_grad(i, y);
  return total;
}

double mean_of_terms(std::size_t n, const std::function<double(std::size_t)>& term) {
  if (n == 0) return 0.0;
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) terms[i] = term(i);
  return compensated_sum(terms) / static_cast<double>(n);
}

double accuracy(const FiniteSumProblem& p, const Vector& x, const Dataset& test) {
  if (test.n() == 0) throw DataError("accuracy on an empty test set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.n(); ++i)
    if (p.predict(test.rows[i], x) == test.class_index(i)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(test.n());
}

}  // namespace serial

}  // namespace svrmm::kernels
