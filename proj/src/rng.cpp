#include "svrmm/rng.hpp"

#include <unordered_set>

#include "svrmm/errors.hpp"

namespace svrmm {

std::vector<std::size_t> Batch::distinct() const {
  std::vector<std::size_t> out;
  out.reserve(indices.size());
  std::unordered_set<std::size_t> seen;
  for (std::size_t i : indices)
    if (seen.insert(i).second) out.push_back(i);
  return out;
}

bool Rng::bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw DataError("cannot sample from an empty index set");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

Batch Rng::sample_batch(std::size_t n, std::size_t b) {
  if (n == 0) throw DataError("cannot sample a batch from an empty dataset");
  if (b == 0) throw ConfigError("batch size must be positive");
  Batch batch;
  batch.indices.resize(b);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (auto& i : batch.indices) i = pick(engine_);
  return batch;
}

}  // namespace svrmm
