#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "svrmm/types.hpp"

namespace svrmm {

struct ParseOptions {
  /// Lower bound on d, for test files whose largest index is below the training set's.
  std::size_t min_dim = 0;
  /// Reuse an existing label mapping (label_values of the training set) instead of
  /// building one from this file. Labels outside the mapping are a parse error.
  std::vector<double> label_values;
};

/// LIBSVM text: `label idx:value idx:value ...` with 1-based strictly increasing
/// indices and `#` comments. Labels must be integral within 1e-9. Files with at most
/// two distinct labels become binary sets (lower value -> -1); otherwise labels are
/// remapped to 0..q-1 in sorted order. Throws ParseError (with line number) on
/// malformed input and DataError on an empty file.
Dataset parse_libsvm(std::istream& in, const ParseOptions& options = {});
Dataset load_libsvm(const std::string& path, const ParseOptions& options = {});

/// Writes `data` back in LIBSVM form using the original label values.
void write_libsvm(std::ostream& out, const Dataset& data);

struct SplitSpec {
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
};

/// Shuffles with mt19937_64(seed) and cuts after floor(train_fraction * n) rows.
std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec);

/// A seeded subset of `count` rows (kept in file order); the whole set when count >= n.
Dataset take(const Dataset& data, std::size_t count, std::uint64_t seed);

struct ScaledDataset {
  Dataset data;
  double factor = 1.0;  // values were divided by this
};

/// Divides every value by max_i ||a_i|| so the largest row norm becomes 1.
/// All-zero data is returned unchanged with factor 1. Throws DataError on an empty set.
ScaledDataset scale_max_norm(const Dataset& data);
/// Divides every value by `factor` (used to apply the training factor to a test set).
void apply_scale(Dataset& data, double factor);

struct SyntheticBinaryOptions {
  /// Leading coordinates carrying the signal; each row's block is a uniform point on the unit sphere.
  std::size_t informative = 2;
  /// Label slope: P(y = +1 | z) = 1 / (1 + exp(-slope z^T v)) for a planted unit separator v.
  double slope = 2.0;
  /// Remaining coordinates are uniform on [-nuisance, nuisance].
  double nuisance = 0.02;
};

/// Linearly separable signal with logistic label noise. Axis-aligned signal keeps the
/// penalized objective well conditioned, so stochastic runs settle within a few epochs.
Dataset synthetic_binary(std::size_t n, std::size_t d, std::uint64_t seed, const SyntheticBinaryOptions& opts = {});
/// q Gaussian class centroids with spread `separation`, unit-variance noise around them.
Dataset synthetic_multiclass(std::size_t n, std::size_t d, int q, std::uint64_t seed, double separation = 2.0);

}  // namespace svrmm
