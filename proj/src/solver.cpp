#include "svrmm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "svrmm/kernels.hpp"
#include "svrmm/problems.hpp"

namespace svrmm {

namespace {

using u128 = unsigned __int128;

// Largest integer r with r^k <= v, for k in {2, 3}.
std::size_t int_root(u128 v, int k) {
  auto pow_k = [k](u128 r) { return k == 2 ? r * r : r * r * r; };
  auto r = static_cast<u128>(std::pow(static_cast<long double>(v), 1.0L / k));
  while (r > 0 && pow_k(r) > v) --r;
  while (pow_k(r + 1) <= v) ++r;
  return static_cast<std::size_t>(r);
}

std::size_t clamp_batch(std::size_t b, std::size_t n) { return std::clamp<std::size_t>(b, 1, n); }

}  // namespace

FeasibilityReport check_feasibility(Method method, double mu, double L, std::size_t n, std::size_t b,
                                    std::size_t m) {
  FeasibilityReport rep;
  const double nn = static_cast<double>(n);
  const double bb = static_cast<double>(b);
  const double mm = static_cast<double>(m);
  rep.lhs = (2.0 * mu - L) * (2.0 * mu - L);
  switch (method) {
    case Method::Saga:
      rep.rhs = 16.0 * nn * nn * L * L / (bb * bb * bb);
      break;
    case Method::Svrg:
      rep.rhs = 16.0 * mm * mm * L * L / bb;
      break;
    case Method::Sarah:
      rep.rhs = 4.0 * mm * L * L / bb;
      break;
    case Method::Full:
      rep.rhs = 0.0;
      break;
  }
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : std::numeric_limits<double>::infinity();
  rep.ok = method == Method::Full || rep.lhs > rep.rhs;
  rep.margin = TheoryConstants::make(method, mu, L, n, b, m).condition_margin();
  return rep;
}

double batch_first_mu(Method method, double L, std::size_t n, std::size_t b, std::size_t m) {
  const double nn = static_cast<double>(n);
  const double bb = static_cast<double>(b);
  const double mm = static_cast<double>(m);
  switch (method) {
    case Method::Saga:
      return (4.0 * nn * L / std::pow(bb, 1.5) + L) / 2.0;
    case Method::Svrg:
      return (4.0 * mm * L / std::sqrt(bb) + L) / 2.0;
    case Method::Sarah:
      return (2.0 * std::sqrt(mm) * L / std::sqrt(bb) + L) / 2.0;
    case Method::Full:
      return L;
  }
  return L;
}

ParamSelection select_params(Method method, std::size_t n, double L) {
  if (n == 0) throw ConfigError("parameter selection needs n >= 1");
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError(fmt::format("smoothness constant must be positive, got {}", L));

  ParamSet f{L, n, 1};
  const u128 nn = n;
  switch (method) {
    case Method::Saga:
      f.b = int_root(16 * nn * nn, 3);
      break;
    case Method::Svrg:
      f.b = int_root(nn * nn, 3);
      f.m = std::max<std::size_t>(1, int_root(clamp_batch(f.b, n), 2) / 4);
      break;
    case Method::Sarah:
      f.b = int_root(nn, 2);
      f.m = std::max<std::size_t>(1, clamp_batch(f.b, n) / 4);
      break;
    case Method::Full:
      break;
  }
  f.b = clamp_batch(f.b, n);

  ParamSelection sel{f, f, false, {}};
  ParamSet& c = sel.chosen;
  while (c.b < n && !check_feasibility(method, c.mu, L, n, c.b, c.m).ok) ++c.b;
  if (!check_feasibility(method, c.mu, L, n, c.b, c.m).ok) {
    c.mu = 1.05 * batch_first_mu(method, L, n, c.b, c.m);
    sel.note = fmt::format("b = n = {} still infeasible; mu raised to {:.6g}", n, c.mu);
  } else if (c.b != f.b) {
    sel.note = fmt::format("b rounded up from {} to {}", f.b, c.b);
  }
  sel.repaired = c.b != f.b || c.mu != f.mu;
  return sel;
}

double objective(const FiniteSumProblem& p, const SurrogateRegularizer& r, const Vector& x) {
  const double F = kernels::mean_loss(p, x) + r.value(x);
  if (!std::isfinite(F)) throw DivergenceError("non-finite objective", RunTrace{});
  return F;
}

double stationarity_proxy(const FiniteSumProblem& p, const SurrogateRegularizer& r, const Vector& x, double mu) {
  const Vector t = r.solve_subproblem(x, kernels::full_gradient(p, x), mu);
  return mu * (x - t).norm();
}

ResolvedParams resolve_params(const FiniteSumProblem& p, const SolverConfig& config) {
  const std::size_t n = p.size();
  if (n == 0) throw DataError("solver needs a nonempty problem");
  if (config.epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (config.record_density < 1) throw ConfigError("record density must be at least 1");

  ResolvedParams out;
  out.L = config.L ? config.L : p.smoothness_constant();
  if (out.L) {
    const ParamSelection sel = select_params(config.method, n, *out.L);
    out.mu = config.mu.value_or(sel.chosen.mu);
    out.b = config.batch.value_or(sel.chosen.b);
    out.m = config.period.value_or(sel.chosen.m);
    if (!sel.note.empty() && !config.mu && !config.batch) out.warnings.push_back(sel.note);
  } else {
    if (!config.mu) throw ConfigError(p.name() + " has no analytic smoothness constant; supply mu or L");
    out.mu = *config.mu;
    out.b = config.batch.value_or(static_cast<std::size_t>(std::max(1.0, std::sqrt(static_cast<double>(n)))));
    out.m = config.period.value_or(std::max<std::size_t>(1, out.b / 4));
  }
  if (config.method == Method::Full) out.b = n;
  if (out.b < 1 || out.b > n) {
    const std::size_t clamped = clamp_batch(out.b, n);
    out.warnings.push_back(fmt::format("batch {} clamped to {}", out.b, clamped));
    out.b = clamped;
  }
  if (out.m < 1) throw ConfigError("period m must be at least 1");
  if (!(out.mu > 0.0) || !std::isfinite(out.mu)) throw ConfigError("mu must be positive and finite");

  if (out.L) {
    if (!(out.mu > *out.L / 2.0))
      throw ConfigError(fmt::format("mu = {:.6g} must exceed L/2 = {:.6g}", out.mu, *out.L / 2.0));
    out.feasibility = check_feasibility(config.method, out.mu, *out.L, n, out.b, out.m);
    if (!out.feasibility.ok) {
      const std::string msg = fmt::format("parameters (mu={:.6g}, b={}, m={}) fail the feasibility test (ratio {:.6g})",
                                          out.mu, out.b, out.m, out.feasibility.ratio);
      if (!config.force) throw ConfigError(msg + "; pass force to run anyway");
      out.warnings.push_back(msg);
    }
  }
  return out;
}

RunTrace run(const FiniteSumProblem& p, const SurrogateRegularizer& r, const SolverConfig& config) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  RunTrace trace;
  trace.method = config.method;
  trace.params = resolve_params(p, config);
  const ResolvedParams& par = trace.params;
  if (const auto rd = r.dimension(); rd && *rd != p.dim())
    throw DimensionError(fmt::format("regularizer expects length {}, problem has {}", *rd, p.dim()));

  Vector x = config.x0 ? *config.x0 : p.initial_model(config.seed);
  if (x.size() != p.dim()) throw DimensionError("initial model length differs from problem dimension");

  Rng rng(config.seed);
  const EstimatorOptions opts{par.b, par.m, config.compact_saga ? SagaStorage::Compact : SagaStorage::Dense};
  auto est = make_estimator(config.method, p, x, opts);

  const std::uint64_t n = p.size();
  const std::uint64_t init = est->evals();
  const auto density = static_cast<std::uint64_t>(config.record_density);
  const std::uint64_t budget = static_cast<std::uint64_t>(config.epochs) * n;
  const std::uint64_t last_t = static_cast<std::uint64_t>(config.epochs) * density;
  auto threshold = [&](std::uint64_t t) { return t * n / density; };

  auto fail = [&](const std::string& what) {
    trace.model = x;
    throw DivergenceError(what, trace);
  };

  // Returns true when the early-stop tolerance is met.
  auto record = [&](std::uint64_t t) {
    TraceRow row;
    row.epoch = static_cast<double>(t) / static_cast<double>(density);
    row.grad_evals = est->evals();
    row.iteration = trace.iterations;
    row.objective = kernels::mean_loss(p, x) + r.value(x);
    if (!std::isfinite(row.objective))
      fail(fmt::format("non-finite objective at iteration {}", trace.iterations));
    if (config.test) row.test_accuracy = predict_accuracy(p, x, *config.test);
    if (config.diagnostics) {
      if (config.method != Method::Full) row.upsilon = est->upsilon(x);
      row.stationarity_proxy = stationarity_proxy(p, r, x, par.mu);
    }
    row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
    trace.rows.push_back(row);
    if (!config.stop_tolerance) return false;
    const double s = row.stationarity_proxy ? *row.stationarity_proxy : stationarity_proxy(p, r, x, par.mu);
    return s <= *config.stop_tolerance;
  };

  bool stop = record(0);
  std::uint64_t next_t = 1;
  while (!stop && est->evals() - init < budget) {
    const Vector g = est->estimate(x, rng);
    Vector next = r.solve_subproblem(x, g, par.mu);
    if (!all_finite(next)) fail(fmt::format("non-finite iterate at iteration {}", trace.iterations));
    if (config.on_step) config.on_step(trace.iterations, x, next);
    x = std::move(next);
    ++trace.iterations;

    const std::uint64_t used = est->evals() - init;
    if (next_t <= last_t && used >= threshold(next_t)) {
      while (next_t + 1 <= last_t && used >= threshold(next_t + 1)) ++next_t;
      stop = record(next_t);
      ++next_t;
    }
  }
  trace.stopped_early = stop && est->evals() - init < budget;
  trace.refreshes = est->refreshes();
  trace.model = x;
  return trace;
}

}  // namespace svrmm
