#include "svrmm/types.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "svrmm/errors.hpp"

namespace svrmm {

double SparseRow::squared_norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

void SparseRow::validate() const {
  if (indices.size() != values.size()) throw DataError("sparse row has mismatched index/value counts");
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] < 0) throw DataError("negative feature index");
    if (j > 0 && indices[j] <= indices[j - 1]) throw DataError("feature indices not strictly increasing");
  }
}

double dot(const SparseRow& a, const Vector& x) {
  if (a.min_dim() > static_cast<std::size_t>(x.size())) {
    throw DimensionError("row index " + std::to_string(a.min_dim() - 1) + " >= vector length " +
                         std::to_string(x.size()));
  }
  double s = 0.0;
  for (std::size_t j = 0; j < a.indices.size(); ++j) s += a.values[j] * x[a.indices[j]];
  return s;
}

void add_scaled(const SparseRow& a, double scale, Vector& y) {
  assert(a.min_dim() <= static_cast<std::size_t>(y.size()));
  for (std::size_t j = 0; j < a.indices.size(); ++j) y[a.indices[j]] += scale * a.values[j];
}

double Dataset::max_squared_norm() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.squared_norm());
  return m;
}

void Dataset::validate() const {
  if (rows.size() != labels.size()) throw DataError("row count differs from label count");
  if (q < 1) throw DataError("class count must be positive");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].validate();
    if (rows[i].min_dim() > d) throw DataError("feature index exceeds dataset dimension");
    const int y = labels[i];
    const bool ok = q == 2 ? (y == -1 || y == 1) : (y >= 0 && y < q);
    if (!ok) throw DataError("label " + std::to_string(y) + " invalid for q=" + std::to_string(q));
  }
}

Dataset Dataset::subset(std::span<const std::size_t> order) const {
  Dataset out;
  out.d = d;
  out.q = q;
  out.label_values = label_values;
  out.rows.reserve(order.size());
  out.labels.reserve(order.size());
  for (std::size_t i : order) {
    out.rows.push_back(rows.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

bool all_finite(const Vector& x) { return x.allFinite(); }

}  // namespace svrmm
