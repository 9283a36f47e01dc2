#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "svrmm/problem.hpp"
#include "svrmm/types.hpp"

namespace toy {

/// f_i(x) = c_i/2 ||x - z_i||^2. Average smoothness L = sqrt(mean c_i^2).
class Quadratic final : public svrmm::FiniteSumProblem {
 public:
  Quadratic(std::vector<double> c, std::vector<svrmm::Vector> z) : c_(std::move(c)), z_(std::move(z)) {}
  /// Scalar components f_i(x) = c_i x^2 / 2.
  explicit Quadratic(std::vector<double> c) : c_(std::move(c)), z_(c_.size(), svrmm::Vector::Zero(1)) {}

  std::string name() const override { return "toy-quadratic"; }
  std::size_t size() const override { return c_.size(); }
  svrmm::Index dim() const override { return z_.front().size(); }
  double component_loss(std::size_t i, const svrmm::Vector& x) const override {
    return 0.5 * c_[i] * (x - z_[i]).squaredNorm();
  }
  void component_grad(std::size_t i, const svrmm::Vector& x, svrmm::Vector& out) const override {
    out = c_[i] * (x - z_[i]);
  }
  using FiniteSumProblem::component_grad;
  std::optional<double> smoothness_constant() const override {
    double s = 0.0;
    for (double c : c_) s += c * c;
    return std::sqrt(s / static_cast<double>(c_.size()));
  }
  int predict(const svrmm::SparseRow&, const svrmm::Vector&) const override { return 0; }

 private:
  std::vector<double> c_;
  std::vector<svrmm::Vector> z_;
};

/// Random quadratic toy with n components in dimension d.
inline Quadratic random_quadratic(std::size_t n, svrmm::Index d, std::mt19937_64& engine) {
  std::uniform_real_distribution<double> cu(0.2, 2.0);
  std::normal_distribution<double> nz;
  std::vector<double> c(n);
  std::vector<svrmm::Vector> z(n, svrmm::Vector(d));
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = cu(engine);
    for (svrmm::Index j = 0; j < d; ++j) z[i][j] = nz(engine);
  }
  return Quadratic(std::move(c), std::move(z));
}

inline svrmm::Vector random_vector(svrmm::Index d, std::mt19937_64& engine, double scale = 1.0) {
  std::normal_distribution<double> nz(0.0, scale);
  svrmm::Vector v(d);
  for (svrmm::Index j = 0; j < d; ++j) v[j] = nz(engine);
  return v;
}

/// Dense rows with Gaussian entries and random +-1 labels.
inline svrmm::Dataset gaussian_binary(std::size_t n, std::size_t d, std::mt19937_64& engine) {
  std::normal_distribution<double> nz;
  std::bernoulli_distribution coin;
  svrmm::Dataset ds;
  ds.d = d;
  ds.q = 2;
  ds.label_values = {-1.0, 1.0};
  for (std::size_t i = 0; i < n; ++i) {
    svrmm::SparseRow r;
    for (std::size_t j = 0; j < d; ++j) {
      r.indices.push_back(static_cast<std::int32_t>(j));
      r.values.push_back(nz(engine));
    }
    ds.rows.push_back(std::move(r));
    ds.labels.push_back(coin(engine) ? 1 : -1);
  }
  return ds;
}

/// Dense rows with Gaussian entries and uniform class ids in [0, q).
inline svrmm::Dataset gaussian_multiclass(std::size_t n, std::size_t d, int q, std::mt19937_64& engine) {
  svrmm::Dataset ds = gaussian_binary(n, d, engine);
  std::uniform_int_distribution<int> cls(0, q - 1);
  ds.q = q;
  ds.label_values.clear();
  for (int k = 0; k < q; ++k) ds.label_values.push_back(k);
  for (auto& y : ds.labels) y = cls(engine);
  return ds;
}

}  // namespace toy
