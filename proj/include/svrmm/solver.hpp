#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "svrmm/errors.hpp"
#include "svrmm/estimators.hpp"
#include "svrmm/problem.hpp"
#include "svrmm/regularizer.hpp"
#include "svrmm/theory.hpp"
#include "svrmm/types.hpp"

namespace svrmm {

struct ParamSet {
  double mu = 0.0;
  std::size_t b = 1;
  std::size_t m = 1;  // unused by saga and full
};

struct ParamSelection {
  ParamSet formula;  // the floor formulas with the m >= 1 and [1, n] clamps
  ParamSet chosen;   // after rounding repair
  bool repaired = false;
  std::string note;  // what the repair changed, empty if nothing
};

/// Default (mu, b, m) with mu = L:
///   saga  b = floor(4^{2/3} n^{2/3})
///   svrg  b = floor(n^{2/3}),  m = max(1, floor(sqrt(b)/4))
///   sarah b = floor(n^{1/2}),  m = max(1, floor(b/4))
///   full  b = n
/// Floors are computed in exact integer arithmetic. When the floor fails the strict
/// feasibility test, b is rounded up until it passes; if b reaches n first, mu is raised
/// to 1.05 times the batch-first value of batch_first_mu. Throws ConfigError for L <= 0 or n == 0.
ParamSelection select_params(Method method, std::size_t n, double L);

struct FeasibilityReport {
  bool ok = false;
  double lhs = 0.0;     // (2 mu - L)^2
  double rhs = 0.0;     // the method's sufficient bound
  double ratio = 0.0;   // lhs / rhs (infinite when rhs == 0)
  double margin = 0.0;  // (2 mu - L)^2 - 4 (V + V_Upsilon / rho)
};

/// Strict test lhs > rhs with
///   saga  rhs = 16 n^2 L^2 / b^3,  svrg  rhs = 16 m^2 L^2 / b,  sarah  rhs = 4 m L^2 / b,
/// and full always ok.
FeasibilityReport check_feasibility(Method method, double mu, double L, std::size_t n, std::size_t b,
                                    std::size_t m);

/// The mu at which the feasibility inequality holds with equality for a given batch:
///   saga (4nL/b^{3/2} + L)/2,  svrg (4mL/b^{1/2} + L)/2,  sarah (2 m^{1/2} L / b^{1/2} + L)/2,  full L.
double batch_first_mu(Method method, double L, std::size_t n, std::size_t b, std::size_t m);

/// F(x) = (1/n) sum_i f_i(x) + r(x). Throws DivergenceError when not finite.
double objective(const FiniteSumProblem& p, const SurrogateRegularizer& r, const Vector& x);

/// mu ||x - T(x)|| with T(x) the exact full-gradient MM step from x.
double stationarity_proxy(const FiniteSumProblem& p, const SurrogateRegularizer& r, const Vector& x, double mu);

struct SolverConfig {
  Method method = Method::Sarah;
  std::optional<double> mu;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> period;
  /// Smoothness constant for problems without an analytic one.
  std::optional<double> L;
  int epochs = 20;
  std::uint64_t seed = 0;
  /// Trace rows per epoch.
  int record_density = 1;
  bool compact_saga = false;
  /// Record upsilon and the stationarity proxy (uncharged O(n) work per row).
  bool diagnostics = false;
  /// Run even when the parameters fail check_feasibility.
  bool force = false;
  /// Stop at the first row whose stationarity proxy is at most this value.
  std::optional<double> stop_tolerance;
  std::optional<Vector> x0;
  /// Test set for the accuracy column.
  const Dataset* test = nullptr;
  /// Called after every step with (k, x^k, x^{k+1}).
  std::function<void(std::uint64_t, const Vector&, const Vector&)> on_step;
};

struct ResolvedParams {
  double mu = 0.0;
  std::optional<double> L;
  std::size_t b = 1;
  std::size_t m = 1;
  FeasibilityReport feasibility;
  std::vector<std::string> warnings;
};

/// Fills (mu, b, m) from the config, defaulting to select_params, and applies the gates:
/// mu > L/2 always, feasibility unless forced.
ResolvedParams resolve_params(const FiniteSumProblem& p, const SolverConfig& config);

struct TraceRow {
  double epoch = 0.0;
  std::uint64_t grad_evals = 0;
  std::uint64_t iteration = 0;
  double objective = 0.0;
  std::optional<double> test_accuracy;
  std::int64_t wall_ms = 0;
  std::optional<double> upsilon;
  std::optional<double> stationarity_proxy;
};

struct RunTrace {
  Method method = Method::Full;
  ResolvedParams params;
  std::vector<TraceRow> rows;
  Vector model;
  std::uint64_t iterations = 0;
  std::uint64_t refreshes = 0;
  bool stopped_early = false;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, RunTrace trace)
      : Error(ErrorKind::Divergence, what), trace_(std::move(trace)) {}
  /// Rows recorded before the failure.
  const RunTrace& trace() const { return trace_; }

 private:
  RunTrace trace_;
};

/// Runs the MM iteration
///   g = estimate(x^k);  x^{k+1} = argmin mu/2 ||x - x^k||^2 + <g, x> + u(x, x^k)
/// for epochs * n charged evaluations (initialization excluded). A row is written at
/// start and whenever the charged count crosses a multiple of n / record_density; a step
/// crossing several thresholds writes one row at the last of them.
RunTrace run(const FiniteSumProblem& p, const SurrogateRegularizer& r, const SolverConfig& config);

}  // namespace svrmm
