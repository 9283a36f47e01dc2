// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "../checks.hpp"
#include "svrmm/data.hpp"
#include "svrmm/harness.hpp"
#include "svrmm/problems.hpp"
#include "svrmm/solver.hpp"
#include "svrmm/surrogates.hpp"

using namespace svrmm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s [%2d] %s: %s; %.2fs (limit %.0fs%s)\n", pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(),
              secs, limit_s, in_time ? "" : ", exceeded");
  std::fflush(stdout);
}

// Largest integer r with r^k <= v, by plain search.
std::size_t floor_root(long double v, int k) {
  std::size_t r = 0;
  while (std::pow(static_cast<long double>(r + 1), k) <= v) ++r;
  return r;
}

/// Per-row relative error of component gradients against central differences.
double fd_rel_error(const FiniteSumProblem& p, std::size_t i, const Vector& x, double h) {
  const Vector g = p.component_grad(i, x);
  const Vector fd = oracle::fd_gradient([&](const Vector& z) { return p.component_loss(i, z); }, x, h);
  return (g - fd).norm() / std::max(1.0, g.norm());
}

/// Hidden pre-activations of the mlp for row a, read off the documented parameter layout.
Vector mlp_preactivations(const MlpProblem& p, const SparseRow& a, const Vector& x) {
  const int h = p.hidden();
  const Index c0 = static_cast<Index>(x.size()) - (static_cast<Index>(h) + 1) * p.classes() - h;
  Vector z = x.segment(c0, h);
  for (std::size_t e = 0; e < a.nnz(); ++e)
    for (int r = 0; r < h; ++r) z[r] += a.values[e] * x[static_cast<Index>(a.indices[e]) * h + r];
  return z;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "svrmm");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main(static_cast<int>(argv.size()), argv.data());
}

const std::string kA9a = (fs::path(SVRMM_DATA_DIR) / "a9a").string();

}  // namespace

int main() {
  criterion(1, "estimator unbiasedness by enumeration (n=3, d=2, b=2)", 1.0, [] {
    std::mt19937_64 engine(101);
    double worst = 0.0;
    std::size_t batches = 0;
    for (int t = 0; t < 20; ++t) {
      const auto p = toy::random_quadratic(3, 2, engine);
      const Vector x = toy::random_vector(2, engine);
      std::vector<Vector> table;
      for (std::size_t i = 0; i < 3; ++i) table.push_back(p.component_grad(i, toy::random_vector(2, engine)));
      const Vector g = checks::toy_full_grad(p, x);
      const auto saga = checks::saga_estimates(p, table, x, 2);
      const auto svrg = checks::svrg_estimates(p, toy::random_vector(2, engine), x, 2, 4);
      batches = saga.size();
      worst = std::max(worst, (checks::mean(saga) - g).lpNorm<Eigen::Infinity>());
      worst = std::max(worst, (checks::mean(svrg) - g).lpNorm<Eigen::Infinity>());
    }
    return Outcome{worst <= 1e-12 && batches == 9, fmt::format("{} batches, max error {:.3g} (tol 1e-12)", batches, worst)};
  });

  criterion(2, "minibatch variance identity by enumeration", 1.0, [] {
    std::mt19937_64 engine(202);
    std::uniform_int_distribution<std::size_t> nd(1, 5), bd(1, 3), dd(1, 4);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const std::size_t n = nd(engine), b = bd(engine);
      const auto d = static_cast<Index>(dd(engine));
      std::vector<Vector> xi;
      for (std::size_t i = 0; i < n; ++i) xi.push_back(toy::random_vector(d, engine));
      worst = std::max(worst, checks::variance_identity_error(xi, b, engine));
    }
    return Outcome{worst <= 1e-12, fmt::format("100 families, max error {:.3g} (tol 1e-12)", worst)};
  });

  criterion(3, "estimator variance bounded by upsilon", 5.0, [] {
    std::mt19937_64 engine(303);
    const auto s = checks::variance_bound_slack(100, engine);
    const double worst = std::min({s.saga, s.svrg, s.sarah});
    return Outcome{worst >= -1e-12, fmt::format("min slack saga {:.3g}, svrg {:.3g}, sarah {:.3g} (tol -1e-12)", s.saga,
                                                s.svrg, s.sarah)};
  });

  criterion(4, "subproblem solvers are exact", 30.0, [] {
    std::mt19937_64 engine(404);
    const auto rep = checks::prox_exactness(1000, 1000000, engine);
    return Outcome{rep.min_margin >= -1e-8 && rep.max_violation <= 1e-10,
                   fmt::format("{} instances, min margin {:.3g} (tol -1e-8), max optimality residual {:.3g} (tol 1e-10)",
                               rep.instances, rep.min_margin, rep.max_violation)};
  });

  criterion(5, "gradients match finite differences", 10.0, [] {
    std::mt19937_64 engine(505);
    auto bdata = std::make_shared<const Dataset>(synthetic_binary(200, 20, 5));
    auto mdata = std::make_shared<const Dataset>(synthetic_multiclass(200, 10, 4, 5));
    BinaryNonconvexProblem bin(bdata);
    MulticlassLogisticProblem multi(mdata);
    MlpProblem mlp(mdata, 16);
    std::uniform_int_distribution<std::size_t> pick(0, 199);
    double eb = 0.0, em = 0.0, en = 0.0;
    for (int t = 0; t < 20; ++t) {
      eb = std::max(eb, fd_rel_error(bin, pick(engine), toy::random_vector(bin.dim(), engine), 1e-6));
      em = std::max(em, fd_rel_error(multi, pick(engine), toy::random_vector(multi.dim(), engine), 1e-6));
      // keep every hidden unit away from the ReLU kink
      std::size_t i = 0;
      Vector x;
      do {
        i = pick(engine);
        x = mlp.initial_model(engine());
        x += toy::random_vector(mlp.dim(), engine, 0.1);
      } while (mlp_preactivations(mlp, mdata->rows[i], x).cwiseAbs().minCoeff() < 1e-4);
      en = std::max(en, fd_rel_error(mlp, i, x, 1e-7));
    }
    return Outcome{eb <= 1e-5 && em <= 1e-5 && en <= 1e-4,
                   fmt::format("max rel error binary {:.3g}, multiclass {:.3g} (tol 1e-5), mlp {:.3g} (tol 1e-4)", eb, em, en)};
  });

  criterion(6, "deterministic mm descent (n=500, d=20, mu=L)", 10.0, [] {
    auto data = std::make_shared<const Dataset>(synthetic_binary(500, 20, 6));
    BinaryNonconvexProblem p(data);
    ExponentialPenaltyL1 r(1.0 / 500, 5.0);
    const double L = *p.smoothness_constant();
    SolverConfig c;
    c.method = Method::Full;
    c.mu = L;
    c.epochs = 200;
    double worst = -1e300;
    std::uint64_t steps = 0;
    c.on_step = [&](std::uint64_t, const Vector& x, const Vector& next) {
      const double lhs = objective(p, r, next) + (2 * L - L) / 2 * (next - x).squaredNorm();
      worst = std::max(worst, lhs - objective(p, r, x));
      ++steps;
    };
    run(p, r, c);
    return Outcome{steps == 200 && worst <= 1e-9,
                   fmt::format("{} iterations, max F(x+) + (2mu-L)/2 |dx|^2 - F(x) = {:.3g} (tol 1e-9)", steps, worst)};
  });

  criterion(7, "parameter selection floors and feasibility after repair", 1.0, [] {
    bool ok = true;
    std::string detail;
    const double L = 1.7;
    for (std::size_t n : {std::size_t{100}, std::size_t{1000}, std::size_t{1000000}}) {
      const long double nn = static_cast<long double>(n);
      const std::size_t saga_b = std::min(n, floor_root(16 * nn * nn, 3));
      const std::size_t svrg_b = std::min(n, floor_root(nn * nn, 3));
      const std::size_t svrg_m = std::max<std::size_t>(1, floor_root(static_cast<long double>(svrg_b), 2) / 4);
      const std::size_t sarah_b = std::min(n, floor_root(nn, 2));
      const std::size_t sarah_m = std::max<std::size_t>(1, sarah_b / 4);
      const auto sa = select_params(Method::Saga, n, L);
      const auto sv = select_params(Method::Svrg, n, L);
      const auto sr = select_params(Method::Sarah, n, L);
      const bool formula = sa.formula.b == saga_b && sv.formula.b == svrg_b && sv.formula.m == svrg_m &&
                           sr.formula.b == sarah_b && sr.formula.m == sarah_m && sa.formula.mu == L &&
                           sv.formula.mu == L && sr.formula.mu == L;
      const bool feasible = check_feasibility(Method::Saga, sa.chosen.mu, L, n, sa.chosen.b, 1).ok &&
                            check_feasibility(Method::Svrg, sv.chosen.mu, L, n, sv.chosen.b, sv.chosen.m).ok &&
                            check_feasibility(Method::Sarah, sr.chosen.mu, L, n, sr.chosen.b, sr.chosen.m).ok;
      ok = ok && formula && feasible;
      detail += fmt::format("{}n={}: saga b={}->{}, svrg b={} m={}->b={}, sarah b={} m={}->b={}{}", detail.empty() ? "" : "; ",
                            n, sa.formula.b, sa.chosen.b, sv.formula.b, sv.formula.m, sv.chosen.b, sr.formula.b,
                            sr.formula.m, sr.chosen.b, formula && feasible ? "" : " MISMATCH");
    }
    return Outcome{ok, detail};
  });

  criterion(8, "desk-scale convergence on synthetic data (n=2000, d=50)", 120.0, [] {
    auto data = std::make_shared<const Dataset>(synthetic_binary(2000, 50, 1));
    BinaryNonconvexProblem p(data);
    ExponentialPenaltyL1 r(1.0 / 2000, 5.0);
    double fstar = std::numeric_limits<double>::infinity();
    struct Final {
      Method m;
      double F, ratio;
    };
    std::vector<Final> finals;
    for (Method m : {Method::Saga, Method::Svrg, Method::Sarah}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SolverConfig c;
        c.method = m;
        c.seed = seed;
        c.epochs = 20;
        std::vector<double> steps;
        c.on_step = [&](std::uint64_t, const Vector& x, const Vector& next) { steps.push_back((next - x).squaredNorm()); };
        const auto t = run(p, r, c);
        for (const auto& row : t.rows) fstar = std::min(fstar, row.objective);
        auto mean = [&](std::uint64_t a, std::uint64_t b) {
          double s = 0.0;
          for (auto k = a; k < b; ++k) s += steps[k];
          return s / static_cast<double>(b - a);
        };
        const double first = mean(0, t.rows[1].iteration);
        const double last = mean(t.rows[t.rows.size() - 2].iteration, t.rows.back().iteration);
        finals.push_back({m, t.rows.back().objective, last / first});
      }
    }
    double worst_res = 0.0, worst_ratio = 0.0;
    for (const auto& f : finals) {
      worst_res = std::max(worst_res, (f.F - fstar) / std::abs(fstar));
      worst_ratio = std::max(worst_ratio, f.ratio);
    }
    return Outcome{worst_res <= 1e-2 && worst_ratio < 1e-4,
                   fmt::format("15 runs, worst final rel_residual {:.3g} (tol 1e-2), worst last/first epoch step ratio "
                               "{:.3g} (tol 1e-4)",
                               worst_res, worst_ratio)};
  });

  criterion(9, "a9a: sarah accuracy >= 0.80 and lowest mean residual over 10 seeds", 600.0, [] {
    cli::ExperimentSpec spec;
    spec.problem = "binary";
    spec.data = kA9a;
    spec.methods = {Method::Saga, Method::Svrg, Method::Sarah};
    spec.repeats = 10;
    spec.epochs = 20;
    spec.alpha = 5.0;
    spec.lambda = "1/n";
    const auto s = cli::run_session(spec);
    double sarah_min_acc = 1.0;
    for (const auto& rec : s.runs)
      if (rec.method == Method::Sarah)
        sarah_min_acc = rec.ok ? std::min(sarah_min_acc, rec.trace.rows.back().test_accuracy.value_or(0.0)) : 0.0;
    const auto summary = cli::summarize(s);
    std::string detail = fmt::format("n_train={}", s.prepared.train->n());
    double sarah_res = 0.0, other_best = std::numeric_limits<double>::infinity();
    bool complete = summary.size() == 3;
    for (const auto& m : summary) {
      complete = complete && m.runs == 10;
      detail += fmt::format(", {} res {:.4g} acc {:.4f}", method_name(m.method), m.residual_mean, m.accuracy_mean.value_or(0.0));
      if (m.method == Method::Sarah)
        sarah_res = m.residual_mean;
      else
        other_best = std::min(other_best, m.residual_mean);
    }
    detail += fmt::format(", worst sarah run acc {:.4f}", sarah_min_acc);
    return Outcome{complete && sarah_min_acc >= 0.80 && sarah_res < other_best, detail};
  });

  criterion(10, "evaluation accounting matches the analytic count", 10.0, [] {
    auto data = std::make_shared<const Dataset>(synthetic_binary(2000, 50, 1));
    BinaryNonconvexProblem p(data);
    ExponentialPenaltyL1 r(1.0 / 2000, 5.0);
    const std::uint64_t n = p.size();
    std::size_t rows = 0, mismatches = 0;
    for (Method m : {Method::Saga, Method::Svrg, Method::Sarah, Method::Full}) {
      for (std::uint64_t seed : {1u, 2u}) {
        SolverConfig c;
        c.method = m;
        c.seed = seed;
        c.epochs = 10;
        c.record_density = 2;
        const auto t = run(p, r, c);
        const std::uint64_t b = t.params.b, period = t.params.m;
        // Replay the documented draw order: refresh coin first, then the batch.
        Rng replay(seed);
        std::uint64_t count = m == Method::Full ? 0 : n;
        std::uint64_t k = 0;
        for (const auto& row : t.rows) {
          for (; k < row.iteration; ++k) {
            switch (m) {
              case Method::Full: count += n; break;
              case Method::Saga: count += b; replay.sample_batch(n, b); break;
              case Method::Svrg:
              case Method::Sarah:
                if (replay.bernoulli(1.0 / static_cast<double>(period))) {
                  count += n;
                } else {
                  count += 2 * b;
                  replay.sample_batch(n, b);
                }
                break;
            }
          }
          ++rows;
          if (row.grad_evals != count) ++mismatches;
        }
      }
    }
    return Outcome{mismatches == 0 && rows > 0, fmt::format("{} rows over 4 methods x 2 seeds, {} mismatches", rows, mismatches)};
  });

  criterion(11, "compare sessions are byte-identical", 120.0, [] {
    const fs::path dir = fs::temp_directory_path() / fmt::format("svrmm-acceptance-{}", std::random_device{}());
    fs::create_directories(dir);
    const std::vector<std::string> args{"compare", "--data", kA9a, "--repeats", "3", "--epochs", "5", "--seed", "7",
                                        "--diagnostics"};
    auto with_out = [&](const std::string& name) {
      auto v = args;
      v.push_back("--out");
      v.push_back((dir / name).string());
      return v;
    };
    std::ostringstream sink;
    auto* old = std::cout.rdbuf(sink.rdbuf());
    const int ca = run_cli(with_out("a.csv"));
    const int cb = run_cli(with_out("b.csv"));
    std::cout.rdbuf(old);
    const std::string a = slurp(dir / "a.csv"), b = slurp(dir / "b.csv");
    const auto lines = std::count(a.begin(), a.end(), '\n');
    fs::remove_all(dir);
    return Outcome{ca == 0 && cb == 0 && !a.empty() && a == b,
                   fmt::format("exit codes {}/{}, {} lines, {} bytes, identical: {}", ca, cb, lines, a.size(), a == b ? "yes" : "no")};
  });

  if (failures == 0)
    std::printf("ALL PASS: 11 of 11 criteria\n");
  else
    std::printf("FAILURES: %d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
