#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "svrmm/problem.hpp"
#include "svrmm/types.hpp"

namespace svrmm {

/// (39 + 55 sqrt(33)) / 2304: sup of |l''| for l(s) = (1 - sigma(s))^2.
double binary_curvature();

/// binary_curvature() * max_i ||a_i||^2. Throws DataError on an empty set.
double binary_smoothness(const Dataset& data);
/// (q - 1)/q * max_i ||a_i||^2. Throws DataError on an empty set or q < 2.
double multiclass_smoothness(const Dataset& data);

/// f_i(w) = (1 - sigma(b_i a_i^T w))^2 with b_i in {-1, +1}.
/// Compact SAGA representation: the scalar l'(a_i^T w).
class BinaryNonconvexProblem final : public FiniteSumProblem {
 public:
  explicit BinaryNonconvexProblem(std::shared_ptr<const Dataset> data);

  std::string name() const override { return "binary"; }
  std::size_t size() const override { return data_->n(); }
  Index dim() const override { return static_cast<Index>(data_->d); }
  double component_loss(std::size_t i, const Vector& x) const override;
  void component_grad(std::size_t i, const Vector& x, Vector& out) const override;
  using FiniteSumProblem::component_grad;
  std::optional<double> smoothness_constant() const override { return L_; }
  int compact_width() const override { return 1; }
  void component_coeffs(std::size_t i, const Vector& x, std::span<double> out) const override;
  void expand_coeffs(std::size_t i, std::span<const double> coeffs, Vector& out) const override;
  /// sign(a^T w) with 0 counted as the positive class.
  int predict(const SparseRow& a, const Vector& x) const override;

  /// d/ds (1 - sigma(b s))^2.
  static double loss_derivative(double s, int label);
  static double loss(double s, int label);

  const Dataset& data() const { return *data_; }

 private:
  std::shared_ptr<const Dataset> data_;
  double L_;
};

/// Softmax cross-entropy  f_i(W) = log sum_k exp(a_i^T w_k) - a_i^T w_{b_i}.
/// W is d x q stored feature-major: W[j*q + k]. Compact representation: p - onehot(b_i).
class MulticlassLogisticProblem final : public FiniteSumProblem {
 public:
  explicit MulticlassLogisticProblem(std::shared_ptr<const Dataset> data);

  std::string name() const override { return "multiclass"; }
  std::size_t size() const override { return data_->n(); }
  Index dim() const override { return static_cast<Index>(data_->d) * q_; }
  double component_loss(std::size_t i, const Vector& x) const override;
  void component_grad(std::size_t i, const Vector& x, Vector& out) const override;
  using FiniteSumProblem::component_grad;
  std::optional<double> smoothness_constant() const override { return L_; }
  int compact_width() const override { return q_; }
  void component_coeffs(std::size_t i, const Vector& x, std::span<double> out) const override;
  void expand_coeffs(std::size_t i, std::span<const double> coeffs, Vector& out) const override;
  /// argmax_k a^T w_k, lowest k on ties.
  int predict(const SparseRow& a, const Vector& x) const override;

  int classes() const { return q_; }
  /// a^T W as a q-vector.
  Vector scores(const SparseRow& a, const Vector& x) const;

 private:
  std::shared_ptr<const Dataset> data_;
  int q_;
  double L_;
};

/// One hidden layer, ReLU, softmax cross-entropy output.
///
/// Parameter layout (all blocks feature-major):
///   A  (d x h)  A[j*h + r]       input -> hidden weights
///   c0 (h)                       hidden biases
///   B  (h x q)  B[r*q + k]       hidden -> output weights
///   c1 (q)                       output biases
/// No analytic smoothness constant is available.
class MlpProblem final : public FiniteSumProblem {
 public:
  MlpProblem(std::shared_ptr<const Dataset> data, int hidden = 100);

  std::string name() const override { return "mlp"; }
  std::size_t size() const override { return data_->n(); }
  Index dim() const override;
  double component_loss(std::size_t i, const Vector& x) const override;
  void component_grad(std::size_t i, const Vector& x, Vector& out) const override;
  using FiniteSumProblem::component_grad;
  int predict(const SparseRow& a, const Vector& x) const override;
  /// Glorot uniform weights in +-sqrt(6/(fan_in + fan_out)), zero biases.
  Vector initial_model(std::uint64_t seed) const override;

  int hidden() const { return h_; }
  int classes() const { return q_; }
  /// Output-layer logits.
  Vector scores(const SparseRow& a, const Vector& x) const;

 private:
  Index d_;
  int h_;
  int q_;
  std::shared_ptr<const Dataset> data_;

  Index off_c0() const { return d_ * h_; }
  Index off_b() const { return off_c0() + h_; }
  Index off_c1() const { return off_b() + static_cast<Index>(h_) * q_; }
  void check_model(const Vector& x) const;
};

/// Heuristic L for problems without an analytic constant: the largest of `probes`
/// finite-difference curvature estimates sqrt(mean_i ||grad f_i(x+tu) - grad f_i(x-tu)||^2) / 2t
/// at seeded random points x (initial_model draws) and unit directions u, using at most
/// `max_components` components per probe.
double smoothness_proxy(const FiniteSumProblem& p, std::uint64_t seed, int probes = 100,
                        std::size_t max_components = 256);

/// Fraction of test rows whose predicted class equals the label. Throws DataError if empty.
double predict_accuracy(const FiniteSumProblem& p, const Vector& x, const Dataset& test);

}  // namespace svrmm
