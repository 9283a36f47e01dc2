#include "svrmm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string_view>

#include <fmt/format.h>

#include "svrmm/errors.hpp"

namespace svrmm {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view t, double& v) {
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  if (t.empty()) return false;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(v);
}

bool parse_index(std::string_view t, long long& v) {
  if (t.empty()) return false;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  return ec == std::errc() && ptr == t.data() + t.size();
}

// Class ids for raw labels under a mapping sorted ascending.
int class_of(double raw, const std::vector<double>& mapping) {
  for (std::size_t k = 0; k < mapping.size(); ++k)
    if (raw == mapping[k]) return static_cast<int>(k);
  return -1;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, const ParseOptions& options) {
  Dataset data;
  std::vector<double> raw;
  std::vector<std::size_t> raw_lines;
  std::size_t max_dim = 0;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body(line);
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    const auto toks = tokens(body);
    if (toks.empty()) continue;

    double label = 0.0;
    if (!parse_double(toks[0], label)) throw ParseError(line_no, fmt::format("unparsable label '{}'", toks[0]));
    const double rounded = std::round(label);
    if (std::abs(label - rounded) > 1e-9) throw ParseError(line_no, fmt::format("non-integral label '{}'", toks[0]));

    SparseRow row;
    row.indices.reserve(toks.size() - 1);
    row.values.reserve(toks.size() - 1);
    for (std::size_t t = 1; t < toks.size(); ++t) {
      const auto colon = toks[t].find(':');
      long long idx = 0;
      double value = 0.0;
      if (colon == std::string_view::npos || !parse_index(toks[t].substr(0, colon), idx) ||
          !parse_double(toks[t].substr(colon + 1), value))
        throw ParseError(line_no, fmt::format("malformed pair '{}'", toks[t]));
      if (idx < 1 || idx > std::numeric_limits<std::int32_t>::max())
        throw ParseError(line_no, fmt::format("feature index {} out of range", idx));
      const auto zero_based = static_cast<std::int32_t>(idx - 1);
      if (!row.indices.empty() && zero_based <= row.indices.back())
        throw ParseError(line_no, fmt::format("feature index {} not increasing", idx));
      row.indices.push_back(zero_based);
      row.values.push_back(value);
    }
    max_dim = std::max(max_dim, row.min_dim());
    data.rows.push_back(std::move(row));
    raw.push_back(rounded);
    raw_lines.push_back(line_no);
  }
  if (data.rows.empty()) throw DataError("no observations in LIBSVM input");
  data.d = std::max(max_dim, options.min_dim);

  std::vector<double> mapping = options.label_values;
  if (mapping.empty()) {
    mapping = raw;
    std::sort(mapping.begin(), mapping.end());
    mapping.erase(std::unique(mapping.begin(), mapping.end()), mapping.end());
    if (mapping.size() == 1) {
      // A single observed class; pair it with the conventional other label.
      const double v = mapping[0];
      mapping = v > 0.0 ? std::vector<double>{v == 1.0 ? -1.0 : 0.0, v} : std::vector<double>{v, 1.0};
    }
  }
  data.label_values = mapping;
  data.q = mapping.size() <= 2 ? 2 : static_cast<int>(mapping.size());
  data.labels.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int k = class_of(raw[i], mapping);
    if (k < 0) throw ParseError(raw_lines[i], fmt::format("label {} not in the class mapping", raw[i]));
    data.labels.push_back(data.q == 2 ? (k == 1 ? 1 : -1) : k);
  }
  return data;
}

Dataset load_libsvm(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return parse_libsvm(in, options);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  for (std::size_t i = 0; i < data.n(); ++i) {
    const int k = data.class_index(i);
    const double label =
        k < static_cast<int>(data.label_values.size()) ? data.label_values[k] : (data.q == 2 ? data.labels[i] : k);
    std::string s = fmt::format("{:.17g}", label);
    const SparseRow& r = data.rows[i];
    for (std::size_t e = 0; e < r.nnz(); ++e) s += fmt::format(" {}:{:.17g}", r.indices[e] + 1, r.values[e]);
    s += '\n';
    out << s;
  }
}

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
  if (data.n() == 0) throw DataError("cannot split an empty dataset");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0))
    throw ConfigError(fmt::format("train fraction {} outside (0, 1]", spec.train_fraction));
  std::vector<std::size_t> order(data.n());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 engine(spec.seed);
  std::shuffle(order.begin(), order.end(), engine);
  const auto n_train = std::min(
      data.n(), static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(data.n()) + 1e-9)));
  const std::span<const std::size_t> all(order);
  return {data.subset(all.first(n_train)), data.subset(all.subspan(n_train))};
}

Dataset take(const Dataset& data, std::size_t count, std::uint64_t seed) {
  if (count >= data.n()) return data;
  std::vector<std::size_t> order(data.n());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 engine(seed);
  std::shuffle(order.begin(), order.end(), engine);
  order.resize(count);
  std::sort(order.begin(), order.end());
  return data.subset(order);
}

void apply_scale(Dataset& data, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw ConfigError("scale factor must be positive");
  for (auto& r : data.rows)
    for (double& v : r.values) v /= factor;
}

ScaledDataset scale_max_norm(const Dataset& data) {
  if (data.n() == 0) throw DataError("cannot scale an empty dataset");
  ScaledDataset out{data, 1.0};
  const double m = std::sqrt(data.max_squared_norm());
  if (m > 0.0) {
    out.factor = m;
    apply_scale(out.data, m);
  }
  return out;
}

Dataset synthetic_binary(std::size_t n, std::size_t d, std::uint64_t seed, const SyntheticBinaryOptions& opts) {
  if (n == 0 || d == 0) throw ConfigError("synthetic data needs n, d >= 1");
  if (opts.informative < 1 || opts.informative > d)
    throw ConfigError(fmt::format("informative coordinates must lie in [1, {}]", d));
  if (!(opts.nuisance >= 0.0) || !std::isfinite(opts.slope)) throw ConfigError("invalid synthetic data options");
  const auto k = static_cast<Index>(opts.informative);
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> noise(-opts.nuisance, opts.nuisance);
  auto sphere = [&] {
    Vector z(k);
    do {
      for (Index j = 0; j < k; ++j) z[j] = normal(engine);
    } while (z.norm() == 0.0);
    return Vector(z / z.norm());
  };
  const Vector v = sphere();

  Dataset data;
  data.d = d;
  data.q = 2;
  data.label_values = {-1.0, 1.0};
  data.rows.resize(n);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector z = sphere();
    SparseRow& r = data.rows[i];
    r.indices.resize(d);
    r.values.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      r.indices[j] = static_cast<std::int32_t>(j);
      r.values[j] = static_cast<Index>(j) < k ? z[static_cast<Index>(j)] : noise(engine);
    }
    std::bernoulli_distribution positive(1.0 / (1.0 + std::exp(-opts.slope * z.dot(v))));
    data.labels[i] = positive(engine) ? 1 : -1;
  }
  return data;
}

Dataset synthetic_multiclass(std::size_t n, std::size_t d, int q, std::uint64_t seed, double separation) {
  if (n == 0 || d == 0 || q < 3) throw ConfigError("synthetic multiclass data needs n, d >= 1 and q >= 3");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> cls(0, q - 1);
  std::vector<Vector> centers(static_cast<std::size_t>(q), Vector(static_cast<Index>(d)));
  for (auto& c : centers)
    for (Index j = 0; j < c.size(); ++j) c[j] = separation * normal(engine);

  Dataset data;
  data.d = d;
  data.q = q;
  for (int k = 0; k < q; ++k) data.label_values.push_back(k);
  data.rows.resize(n);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = cls(engine);
    SparseRow& r = data.rows[i];
    r.indices.resize(d);
    r.values.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      r.indices[j] = static_cast<std::int32_t>(j);
      r.values[j] = centers[static_cast<std::size_t>(y)][static_cast<Index>(j)] + normal(engine);
    }
    data.labels[i] = y;
  }
  return data;
}

}  // namespace svrmm
