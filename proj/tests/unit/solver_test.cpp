#include <memory>
#include <random>

#include "../toy.hpp"
#include "doctest.h"
#include "svrmm/data.hpp"
#include "svrmm/errors.hpp"
#include "svrmm/kernels.hpp"
#include "svrmm/problems.hpp"
#include "svrmm/solver.hpp"
#include "svrmm/surrogates.hpp"

using namespace svrmm;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

/// f(x) = -x^2/2 advertised with L = 1: the MM step doubles x until it overflows.
class Concave final : public FiniteSumProblem {
 public:
  std::string name() const override { return "concave"; }
  std::size_t size() const override { return 1; }
  Index dim() const override { return 1; }
  double component_loss(std::size_t, const Vector& x) const override { return -0.5 * x.squaredNorm(); }
  void component_grad(std::size_t, const Vector& x, Vector& out) const override { out = -x; }
  using FiniteSumProblem::component_grad;
  std::optional<double> smoothness_constant() const override { return 1.0; }
  int predict(const SparseRow&, const Vector&) const override { return 0; }
};

struct Synthetic {
  std::shared_ptr<const Dataset> data;
  BinaryNonconvexProblem problem;
  ExponentialPenaltyL1 reg;
  explicit Synthetic(std::size_t n, std::size_t d = 10)
      : data(std::make_shared<const Dataset>(synthetic_binary(n, d, 1))),
        problem(data),
        reg(1.0 / static_cast<double>(n), 5.0) {}
};

bool same_rows(const RunTrace& a, const RunTrace& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    const auto &x = a.rows[k], &y = b.rows[k];
    if (x.epoch != y.epoch || x.grad_evals != y.grad_evals || x.iteration != y.iteration ||
        x.objective != y.objective || x.test_accuracy != y.test_accuracy || x.upsilon != y.upsilon ||
        x.stationarity_proxy != y.stationarity_proxy)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("parameter selection floors") {
  const auto saga = select_params(Method::Saga, 1000, 1.0);
  CHECK(saga.formula.b == 251);
  CHECK(saga.formula.mu == 1.0);
  const auto sarah = select_params(Method::Sarah, 1000, 1.0);
  CHECK(sarah.formula.b == 31);
  CHECK(sarah.formula.m == 7);
  const auto svrg = select_params(Method::Svrg, 1000, 1.0);
  CHECK(svrg.formula.b == 100);
  CHECK(svrg.formula.m == 2);
  CHECK(select_params(Method::Full, 10, 2.0).formula.b == 10);
  CHECK_THROWS_AS(select_params(Method::Saga, 100, 0.0), ConfigError);
  CHECK_THROWS_AS(select_params(Method::Saga, 100, -1.0), ConfigError);
  CHECK_THROWS_AS(select_params(Method::Saga, 0, 1.0), ConfigError);
}

TEST_CASE("selected parameters always pass the feasibility test") {
  for (Method m : {Method::Saga, Method::Svrg, Method::Sarah, Method::Full}) {
    for (std::size_t n : {1u, 2u, 3u, 7u, 16u, 50u, 100u, 999u, 1000u, 4096u, 32561u, 1000000u}) {
      const auto sel = select_params(m, n, 2.5);
      INFO(method_name(m), " n=", n);
      CHECK(sel.chosen.b >= 1);
      CHECK(sel.chosen.b <= n);
      CHECK(sel.chosen.m >= 1);
      CHECK(sel.chosen.b >= sel.formula.b);
      CHECK(check_feasibility(m, sel.chosen.mu, 2.5, n, sel.chosen.b, sel.chosen.m).ok);
      CHECK(sel.repaired == (sel.chosen.b != sel.formula.b || sel.chosen.mu != sel.formula.mu));
    }
  }
}

TEST_CASE("feasibility test") {
  SUBCASE("mu = L/2 always fails") {
    for (Method m : {Method::Saga, Method::Svrg, Method::Sarah}) CHECK_FALSE(check_feasibility(m, 1.0, 2.0, 100, 10, 2).ok);
  }
  SUBCASE("sarah boundary is strict") {
    const auto rep = check_feasibility(Method::Sarah, 3.0, 3.0, 64, 16, 4);
    CHECK(rep.lhs == 9.0);
    CHECK(rep.rhs == 9.0);
    CHECK(rep.ratio == 1.0);
    CHECK_FALSE(rep.ok);
  }
  SUBCASE("saga at the batch-first mu is at equality") {
    const double mu = batch_first_mu(Method::Saga, 1.0, 1000, 100, 1);
    CHECK(mu == doctest::Approx((4.0 * 1000 / 1000.0 + 1.0) / 2.0).epsilon(1e-15));
    CHECK(check_feasibility(Method::Saga, mu, 1.0, 1000, 100, 1).ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(check_feasibility(Method::Saga, mu * 1.001, 1.0, 1000, 100, 1).ok);
  }
  SUBCASE("margin of the theory constants is reported") {
    const auto rep = check_feasibility(Method::Svrg, 1.0, 1.0, 1000, 100, 2);
    CHECK(rep.margin == doctest::Approx(TheoryConstants::make(Method::Svrg, 1.0, 1.0, 1000, 100, 2).condition_margin()));
  }
}

TEST_CASE("resolved parameters and gates") {
  Synthetic s(200);
  SolverConfig c;
  c.method = Method::Svrg;
  SUBCASE("automatic parameters") {
    const auto r = resolve_params(s.problem, c);
    CHECK(r.feasibility.ok);
    CHECK(r.mu == *s.problem.smoothness_constant());
  }
  SUBCASE("mu at or below L/2 is rejected even when forced") {
    c.mu = 0.5 * *s.problem.smoothness_constant();
    c.force = true;
    CHECK_THROWS_AS(resolve_params(s.problem, c), ConfigError);
  }
  SUBCASE("infeasible mu needs force") {
    c.mu = 0.6 * *s.problem.smoothness_constant();
    CHECK_THROWS_AS(resolve_params(s.problem, c), ConfigError);
    c.force = true;
    const auto r = resolve_params(s.problem, c);
    CHECK_FALSE(r.feasibility.ok);
    CHECK_FALSE(r.warnings.empty());
  }
  SUBCASE("oversized batch is clamped with a warning") {
    c.batch = 5000;
    c.force = true;
    const auto r = resolve_params(s.problem, c);
    CHECK(r.b == 200);
    CHECK_FALSE(r.warnings.empty());
  }
  SUBCASE("problems without L need mu") {
    auto m = std::make_shared<const Dataset>(synthetic_multiclass(30, 3, 3, 1));
    MlpProblem mlp(m, 4);
    CHECK_THROWS_AS(resolve_params(mlp, c), ConfigError);
    c.mu = 1.0;
    CHECK(resolve_params(mlp, c).b == 5);
  }
}

TEST_CASE("objective values") {
  Synthetic s(50);
  CHECK(objective(s.problem, s.reg, Vector::Zero(10)) == 0.25);
  auto m = std::make_shared<const Dataset>(synthetic_multiclass(30, 3, 4, 1));
  MulticlassLogisticProblem multi(m);
  ZeroRegularizer zero;
  CHECK(objective(multi, zero, Vector::Zero(12)) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(s.reg.value(Vector::Zero(10)) == 0.0);
  ExponentialPenaltyGroupL2 group(1.0, 5.0, 3, 4);
  CHECK(group.value(Vector::Zero(12)) == 0.0);
}

TEST_CASE("one-dimensional quadratic") {
  // f(x) = x^2/2, r = 0: the step is x - x/mu.
  toy::Quadratic q({1.0});
  ZeroRegularizer zero;
  CHECK(stationarity_proxy(q, zero, scalar(1.0), 1.0) == 1.0);
  CHECK(stationarity_proxy(q, zero, scalar(1.0), 2.0) == 1.0);
  CHECK(stationarity_proxy(q, zero, scalar(0.0), 1.0) == 0.0);

  SolverConfig c;
  c.method = Method::Full;
  c.epochs = 5;
  c.x0 = scalar(1.0);
  SUBCASE("mu = L reaches the minimizer in one step") {
    c.mu = 1.0;
    const auto t = run(q, zero, c);
    CHECK(t.model[0] == 0.0);
    CHECK(t.rows[1].objective == 0.0);
  }
  SUBCASE("mu = 2L halves the iterate") {
    c.mu = 2.0;
    std::vector<double> xs;
    c.on_step = [&](std::uint64_t, const Vector& x, const Vector& next) {
      CHECK(next[0] == x[0] / 2.0);
      xs.push_back(next[0]);
    };
    const auto t = run(q, zero, c);
    CHECK(xs == std::vector<double>{0.5, 0.25, 0.125, 0.0625, 0.03125});
    CHECK(t.model[0] == 0.03125);
    CHECK(t.rows.size() == 6);
  }
}

TEST_CASE("zero epochs write one row at the start point") {
  Synthetic s(40);
  SolverConfig c;
  c.method = Method::Sarah;
  c.epochs = 0;
  const auto t = run(s.problem, s.reg, c);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].epoch == 0.0);
  CHECK(t.rows[0].objective == 0.25);
  CHECK(t.iterations == 0);
}

TEST_CASE("runs are deterministic per seed") {
  Synthetic s(300);
  for (Method m : {Method::Saga, Method::Svrg, Method::Sarah, Method::Full}) {
    SolverConfig c;
    c.method = m;
    c.epochs = 3;
    c.seed = 17;
    c.diagnostics = m != Method::Full;
    c.test = s.data.get();
    const auto a = run(s.problem, s.reg, c), b = run(s.problem, s.reg, c);
    CHECK(same_rows(a, b));
    CHECK(a.model == b.model);
    if (m != Method::Full) {
      c.seed = 18;
      c.epochs = 1;
      CHECK_FALSE(run(s.problem, s.reg, c).model == a.model);
    }
  }
}

TEST_CASE("trace rows and evaluation accounting") {
  Synthetic s(257);
  const std::uint64_t n = 257;
  for (Method m : {Method::Saga, Method::Svrg, Method::Sarah, Method::Full}) {
    for (int density : {1, 3}) {
      SolverConfig c;
      c.method = m;
      c.epochs = 4;
      c.seed = 3;
      c.record_density = density;
      const auto t = run(s.problem, s.reg, c);
      INFO(method_name(m), " density ", density);
      // A step can cross several sub-epoch thresholds but never more than one epoch boundary.
      if (density == 1) CHECK(t.rows.size() == 5);
      CHECK(t.rows.size() <= static_cast<std::size_t>(4 * density + 1));
      CHECK(t.rows.back().epoch == 4.0);
      for (std::size_t k = 1; k < t.rows.size(); ++k) {
        CHECK(t.rows[k].grad_evals > t.rows[k - 1].grad_evals);
        CHECK(t.rows[k].epoch > t.rows[k - 1].epoch);
        const double slot = t.rows[k].epoch * density;
        CHECK(slot == doctest::Approx(std::round(slot)));
        CHECK(t.rows[k].grad_evals - t.rows[0].grad_evals >= static_cast<std::uint64_t>(std::round(slot)) * n / density);
      }
      const std::uint64_t K = t.iterations, R = t.refreshes, b = t.params.b;
      std::uint64_t expected = 0;
      switch (m) {
        case Method::Saga: expected = n + K * b; break;
        case Method::Svrg:
        case Method::Sarah: expected = n + R * n + (K - R) * 2 * b; break;
        case Method::Full: expected = K * n; break;
      }
      CHECK(t.rows.back().grad_evals == expected);
      CHECK(t.rows.back().iteration == K);
    }
  }
}

TEST_CASE("compact saga storage leaves the trace bitwise unchanged") {
  Synthetic s(300);
  SolverConfig c;
  c.method = Method::Saga;
  c.epochs = 3;
  c.seed = 5;
  c.diagnostics = true;
  const auto dense = run(s.problem, s.reg, c);
  c.compact_saga = true;
  const auto compact = run(s.problem, s.reg, c);
  CHECK(same_rows(dense, compact));
  CHECK(dense.model == compact.model);
}

TEST_CASE("deterministic mm descends for every shipped surrogate") {
  Synthetic s(200);
  auto m = std::make_shared<const Dataset>(synthetic_multiclass(200, 4, 3, 2));
  MulticlassLogisticProblem multi(m);
  ExponentialPenaltyGroupL2 group(0.05, 5.0, 4, 3);
  ProximalSurrogate prox(std::make_shared<WeaklyConvexL1>(0.01, 0.1));
  DCSurrogate dc(std::make_shared<L1Norm>(0.02), std::make_shared<QuadraticFunction>(0.05));
  LipschitzGradientSurrogate lip(std::make_shared<QuadraticFunction>(0.1));
  ZeroRegularizer zero;
  struct Case {
    const FiniteSumProblem* p;
    const SurrogateRegularizer* r;
  };
  for (const Case& k : {Case{&s.problem, &s.reg}, Case{&multi, &group}, Case{&s.problem, &prox}, Case{&s.problem, &dc},
                        Case{&multi, &lip}, Case{&multi, &zero}}) {
    for (double scale : {1.0, 1.5}) {
      SolverConfig c;
      c.method = Method::Full;
      c.epochs = 60;
      c.mu = scale * *k.p->smoothness_constant();
      c.x0 = Vector::Constant(k.p->dim(), 0.3);
      double worst = -1e300;
      c.on_step = [&](std::uint64_t, const Vector& x, const Vector& next) {
        worst = std::max(worst, objective(*k.p, *k.r, next) - objective(*k.p, *k.r, x));
      };
      run(*k.p, *k.r, c);
      INFO(k.p->name(), " / ", k.r->name());
      CHECK(worst <= 1e-9);
    }
  }
}

TEST_CASE("vanishing steps on the desk-scale synthetic problem") {
  auto data = std::make_shared<const Dataset>(synthetic_binary(2000, 50, 1));
  BinaryNonconvexProblem p(data);
  ExponentialPenaltyL1 r(1.0 / 2000, 5.0);
  for (Method m : {Method::Saga, Method::Svrg, Method::Sarah}) {
    SolverConfig c;
    c.method = m;
    c.seed = 1;
    std::vector<double> steps;
    c.on_step = [&](std::uint64_t, const Vector& x, const Vector& next) { steps.push_back((next - x).squaredNorm()); };
    const auto t = run(p, r, c);
    auto mean = [&](std::uint64_t a, std::uint64_t b) {
      double s = 0.0;
      for (auto k = a; k < b; ++k) s += steps[k];
      return s / static_cast<double>(b - a);
    };
    const double first = mean(0, t.rows[1].iteration);
    const double last = mean(t.rows[t.rows.size() - 2].iteration, t.rows.back().iteration);
    INFO(method_name(m));
    CHECK(last < 1e-6 * first);
  }
}

TEST_CASE("early stop on the stationarity proxy") {
  Synthetic s(100);
  SolverConfig c;
  c.method = Method::Full;
  c.epochs = 1000;
  c.stop_tolerance = 1e-3;
  const auto t = run(s.problem, s.reg, c);
  CHECK(t.stopped_early);
  CHECK(t.rows.size() < 1001);
  CHECK(stationarity_proxy(s.problem, s.reg, t.model, t.params.mu) <= 1e-3);
}

TEST_CASE("divergence carries the partial trace") {
  Concave p;
  ZeroRegularizer zero;
  SolverConfig c;
  c.method = Method::Full;
  c.epochs = 5000;
  c.x0 = scalar(1.0);
  try {
    run(p, zero, c);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.kind() == ErrorKind::Divergence);
    CHECK(exit_code(e.kind()) == 4);
    CHECK(e.trace().rows.size() > 100);
    for (const auto& row : e.trace().rows) CHECK(std::isfinite(row.objective));
  }
}

TEST_CASE("dimension mismatch between problem and regularizer") {
  Synthetic s(20);
  ExponentialPenaltyGroupL2 group(0.1, 1.0, 2, 2);
  SolverConfig c;
  CHECK_THROWS_AS(run(s.problem, group, c), DimensionError);
  c.x0 = Vector::Zero(3);
  CHECK_THROWS_AS(run(s.problem, s.reg, c), DimensionError);
}
