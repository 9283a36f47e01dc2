#include "svrmm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "svrmm/errors.hpp"
#include "svrmm/kernels.hpp"

namespace svrmm {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::shared_ptr<const Dataset> checked(std::shared_ptr<const Dataset> data) {
  if (!data) throw ConfigError("problem needs a dataset");
  if (data->n() == 0) throw DataError("problem over an empty dataset");
  data->validate();
  return data;
}

// log sum exp(z) - z[label], and softmax(z) into p when given.
double softmax_xent(const Vector& z, int label, Vector* p) {
  const double zmax = z.maxCoeff();
  const Vector e = (z.array() - zmax).exp().matrix();
  const double s = e.sum();
  if (p) *p = e / s;
  return zmax + std::log(s) - z[label];
}

int argmax_lowest(const Vector& z) {
  int best = 0;
  for (Index k = 1; k < z.size(); ++k)
    if (z[k] > z[best]) best = static_cast<int>(k);
  return best;
}

void check_row(const SparseRow& a, Index d) {
  if (a.min_dim() > static_cast<std::size_t>(d))
    throw DimensionError("feature index " + std::to_string(a.min_dim() - 1) + " outside model dimension " +
                         std::to_string(d));
}

}  // namespace

double binary_curvature() { return (39.0 + 55.0 * std::sqrt(33.0)) / 2304.0; }

double binary_smoothness(const Dataset& data) {
  if (data.n() == 0) throw DataError("smoothness of an empty dataset");
  return binary_curvature() * data.max_squared_norm();
}

double multiclass_smoothness(const Dataset& data) {
  if (data.n() == 0) throw DataError("smoothness of an empty dataset");
  if (data.q < 2) throw DataError("multiclass smoothness needs q >= 2");
  const double q = data.q;
  return (q - 1.0) / q * data.max_squared_norm();
}

// ---------------------------------------------------------------- binary

BinaryNonconvexProblem::BinaryNonconvexProblem(std::shared_ptr<const Dataset> data) : data_(checked(std::move(data))) {
  if (data_->q != 2) throw DataError("binary problem needs a two-class dataset");
  L_ = binary_smoothness(*data_);
}

double BinaryNonconvexProblem::loss(double s, int label) {
  const double r = sigmoid(-label * s);
  return r * r;
}

double BinaryNonconvexProblem::loss_derivative(double s, int label) {
  const double z = label * s;
  const double r = sigmoid(-z);
  return -2.0 * label * sigmoid(z) * r * r;
}

double BinaryNonconvexProblem::component_loss(std::size_t i, const Vector& x) const {
  return loss(dot(data_->rows[i], x), data_->labels[i]);
}

void BinaryNonconvexProblem::component_coeffs(std::size_t i, const Vector& x, std::span<double> out) const {
  out[0] = loss_derivative(dot(data_->rows[i], x), data_->labels[i]);
}

void BinaryNonconvexProblem::expand_coeffs(std::size_t i, std::span<const double> coeffs, Vector& out) const {
  out.setZero(dim());
  add_scaled(data_->rows[i], coeffs[0], out);
}

void BinaryNonconvexProblem::component_grad(std::size_t i, const Vector& x, Vector& out) const {
  double c = 0.0;
  component_coeffs(i, x, {&c, 1});
  expand_coeffs(i, {&c, 1}, out);
}

int BinaryNonconvexProblem::predict(const SparseRow& a, const Vector& x) const { return dot(a, x) >= 0.0 ? 1 : 0; }

// ---------------------------------------------------------------- multiclass

MulticlassLogisticProblem::MulticlassLogisticProblem(std::shared_ptr<const Dataset> data)
    : data_(checked(std::move(data))), q_(data_->q) {
  L_ = q_ >= 2 ? multiclass_smoothness(*data_) : 0.0;
}

Vector MulticlassLogisticProblem::scores(const SparseRow& a, const Vector& x) const {
  if (x.size() != dim()) throw DimensionError("multiclass model length");
  check_row(a, static_cast<Index>(data_->d));
  Vector z = Vector::Zero(q_);
  for (std::size_t e = 0; e < a.nnz(); ++e) z += a.values[e] * x.segment(Index{a.indices[e]} * q_, q_);
  return z;
}

double MulticlassLogisticProblem::component_loss(std::size_t i, const Vector& x) const {
  return softmax_xent(scores(data_->rows[i], x), data_->class_index(i), nullptr);
}

void MulticlassLogisticProblem::component_coeffs(std::size_t i, const Vector& x, std::span<double> out) const {
  Vector p;
  softmax_xent(scores(data_->rows[i], x), data_->class_index(i), &p);
  p[data_->class_index(i)] -= 1.0;
  std::copy(p.data(), p.data() + q_, out.begin());
}

void MulticlassLogisticProblem::expand_coeffs(std::size_t i, std::span<const double> coeffs, Vector& out) const {
  out.setZero(dim());
  const auto c = Eigen::Map<const Vector>(coeffs.data(), q_);
  const SparseRow& a = data_->rows[i];
  for (std::size_t e = 0; e < a.nnz(); ++e) out.segment(Index{a.indices[e]} * q_, q_) = a.values[e] * c;
}

void MulticlassLogisticProblem::component_grad(std::size_t i, const Vector& x, Vector& out) const {
  std::vector<double> c(static_cast<std::size_t>(q_));
  component_coeffs(i, x, c);
  expand_coeffs(i, c, out);
}

int MulticlassLogisticProblem::predict(const SparseRow& a, const Vector& x) const {
  return argmax_lowest(scores(a, x));
}

// ---------------------------------------------------------------- mlp

MlpProblem::MlpProblem(std::shared_ptr<const Dataset> data, int hidden)
    : d_(0), h_(hidden), q_(0), data_(checked(std::move(data))) {
  if (hidden < 1) throw ConfigError("hidden layer needs at least one unit");
  d_ = static_cast<Index>(data_->d);
  q_ = data_->q;
}

Index MlpProblem::dim() const { return (d_ + 1) * h_ + static_cast<Index>(h_ + 1) * q_; }

void MlpProblem::check_model(const Vector& x) const {
  if (x.size() != dim())
    throw DimensionError("mlp model length " + std::to_string(x.size()) + ", expected " + std::to_string(dim()));
}

namespace {

struct Forward {
  Vector z1;  // hidden pre-activation
  Vector h1;  // hidden activation
  Vector z2;  // logits
};

Forward forward(const SparseRow& a, const Vector& x, Index d, int h, int q) {
  check_row(a, d);
  Forward f;
  const Index c0 = d * h;
  const Index b = c0 + h;
  const Index c1 = b + static_cast<Index>(h) * q;
  f.z1 = x.segment(c0, h);
  for (std::size_t e = 0; e < a.nnz(); ++e) f.z1 += a.values[e] * x.segment(Index{a.indices[e]} * h, h);
  f.h1 = f.z1.cwiseMax(0.0);
  f.z2 = x.segment(c1, q);
  for (Index r = 0; r < h; ++r)
    if (f.h1[r] != 0.0) f.z2 += f.h1[r] * x.segment(b + r * q, q);
  return f;
}

}  // namespace

Vector MlpProblem::scores(const SparseRow& a, const Vector& x) const {
  check_model(x);
  return forward(a, x, d_, h_, q_).z2;
}

double MlpProblem::component_loss(std::size_t i, const Vector& x) const {
  return softmax_xent(scores(data_->rows[i], x), data_->class_index(i), nullptr);
}

void MlpProblem::component_grad(std::size_t i, const Vector& x, Vector& out) const {
  check_model(x);
  const SparseRow& a = data_->rows[i];
  const Forward f = forward(a, x, d_, h_, q_);
  Vector delta2;
  softmax_xent(f.z2, data_->class_index(i), &delta2);
  delta2[data_->class_index(i)] -= 1.0;

  out.setZero(dim());
  out.segment(off_c1(), q_) = delta2;
  Vector delta1(h_);
  for (Index r = 0; r < h_; ++r) {
    const auto w = x.segment(off_b() + r * q_, q_);
    out.segment(off_b() + r * q_, q_) = f.h1[r] * delta2;
    delta1[r] = f.z1[r] > 0.0 ? w.dot(delta2) : 0.0;
  }
  out.segment(off_c0(), h_) = delta1;
  for (std::size_t e = 0; e < a.nnz(); ++e) out.segment(Index{a.indices[e]} * h_, h_) = a.values[e] * delta1;
}

int MlpProblem::predict(const SparseRow& a, const Vector& x) const { return argmax_lowest(scores(a, x)); }

Vector MlpProblem::initial_model(std::uint64_t seed) const {
  std::mt19937_64 engine(seed);
  Vector x = Vector::Zero(dim());
  const double s0 = std::sqrt(6.0 / static_cast<double>(d_ + h_));
  const double s1 = std::sqrt(6.0 / static_cast<double>(h_ + q_));
  std::uniform_real_distribution<double> u0(-s0, s0), u1(-s1, s1);
  for (Index j = 0; j < off_c0(); ++j) x[j] = u0(engine);
  for (Index j = off_b(); j < off_c1(); ++j) x[j] = u1(engine);
  return x;
}

// ---------------------------------------------------------------- helpers

double smoothness_proxy(const FiniteSumProblem& p, std::uint64_t seed, int probes, std::size_t max_components) {
  if (probes < 1 || max_components < 1) throw ConfigError("smoothness proxy needs probes and components");
  if (p.size() == 0) throw DataError("smoothness proxy of an empty problem");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  const std::size_t count = std::min(p.size(), max_components);
  std::uniform_int_distribution<std::size_t> pick(0, p.size() - 1);
  const double t = 1e-4;

  double best = 0.0;
  for (int k = 0; k < probes; ++k) {
    const Vector x = p.initial_model(seed + static_cast<std::uint64_t>(k) + 1);
    Vector u(p.dim());
    for (Index j = 0; j < u.size(); ++j) u[j] = normal(engine);
    u.normalize();
    std::vector<std::size_t> ids(count);
    for (std::size_t c = 0; c < count; ++c) ids[c] = count == p.size() ? c : pick(engine);
    const Vector xp = x + t * u;
    const Vector xm = x - t * u;
    const double ms = kernels::mean_of_terms(count, [&](std::size_t c) {
      return (p.component_grad(ids[c], xp) - p.component_grad(ids[c], xm)).squaredNorm();
    });
    best = std::max(best, std::sqrt(ms) / (2.0 * t));
  }
  return best;
}

double predict_accuracy(const FiniteSumProblem& p, const Vector& x, const Dataset& test) {
  return kernels::accuracy(p, x, test);
}

}  // namespace svrmm
