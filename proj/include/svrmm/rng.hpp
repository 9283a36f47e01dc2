#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace svrmm {

/// A list of b component ids drawn i.i.d. uniformly from [0, n); may contain repeats.
struct Batch {
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }
  /// Distinct ids in order of first appearance.
  std::vector<std::size_t> distinct() const;
};

/// Per-run random stream. One generator per run; solvers consume it in a fixed
/// order (per iteration: the refresh/restart Bernoulli draw first, when the
/// method has one, then the b batch indices), so traces are reproducible per seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  bool bernoulli(double p);
  std::size_t index(std::size_t n);
  Batch sample_batch(std::size_t n, std::size_t b);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace svrmm
