#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace svrmm {

/// Dense real vector. Models, gradients and estimates all use this type; a
/// d x q multiclass model is stored row-major (feature-major) in one vector.
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// One observation a_i in compressed form. Indices are zero-based and strictly increasing.
struct SparseRow {
  std::vector<std::int32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }
  double squared_norm() const;
  /// Largest stored index plus one (0 for an empty row).
  std::size_t min_dim() const { return indices.empty() ? 0 : static_cast<std::size_t>(indices.back()) + 1; }
  /// Throws DataError when indices are not strictly increasing or sizes differ.
  void validate() const;

  friend bool operator==(const SparseRow&, const SparseRow&) = default;
};

/// sum_j a.values[j] * x[a.indices[j]]; throws DimensionError if an index is out of range.
double dot(const SparseRow& a, const Vector& x);

/// y += scale * a (no bounds check beyond debug asserts).
void add_scaled(const SparseRow& a, double scale, Vector& y);

/// Training or test set. For q == 2 the labels are in {-1,+1}; otherwise they are
/// contiguous class ids 0..q-1. label_values[k] is the original file label of class k
/// (for binary sets: k=0 is the negative class, k=1 the positive one).
struct Dataset {
  std::vector<SparseRow> rows;
  std::vector<int> labels;
  std::size_t d = 0;
  int q = 2;
  std::vector<double> label_values;

  std::size_t n() const { return rows.size(); }
  bool binary() const { return q == 2; }
  /// Class id in [0,q): binary labels map -1 -> 0 and +1 -> 1.
  int class_index(std::size_t i) const { return q == 2 ? (labels[i] > 0 ? 1 : 0) : labels[i]; }
  double max_squared_norm() const;
  /// Checks the size/label/dimension invariants; throws DataError.
  void validate() const;
  /// Rows selected by `order`, sharing d, q and the label mapping.
  Dataset subset(std::span<const std::size_t> order) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

bool all_finite(const Vector& x);

}  // namespace svrmm
