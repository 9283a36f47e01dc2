#include "svrmm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "svrmm/data.hpp"
#include "svrmm/problems.hpp"
#include "svrmm/surrogates.hpp"

namespace svrmm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("cannot parse {} '{}'", what, text));
  }
  if (used != text.size() || !std::isfinite(v)) throw ConfigError(fmt::format("cannot parse {} '{}'", what, text));
  return v;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : std::string(); }

SolverConfig make_config(const ExperimentSpec& spec, const Prepared& prep, Method method, std::uint64_t seed) {
  SolverConfig cfg;
  cfg.method = method;
  if (!spec.mu.empty()) cfg.mu = parse_mu(spec.mu, prep.L);
  cfg.batch = spec.batch;
  cfg.period = spec.period;
  if (prep.L_is_proxy) cfg.L = prep.L;
  cfg.epochs = spec.epochs;
  cfg.seed = seed;
  cfg.record_density = spec.record_density;
  cfg.compact_saga = spec.compact_saga;
  cfg.diagnostics = spec.diagnostics;
  cfg.force = spec.force;
  if (prep.test && prep.test->n() > 0) cfg.test = prep.test.get();
  return cfg;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

double parse_lambda(const std::string& text, std::size_t n) {
  const std::string t = trim(text);
  if (t == "1/n") {
    if (n == 0) throw DataError("lambda = 1/n needs a nonempty training set");
    return 1.0 / static_cast<double>(n);
  }
  const double v = parse_number(t, "lambda");
  if (v < 0.0) throw ConfigError("lambda must be nonnegative");
  return v;
}

double parse_mu(const std::string& text, std::optional<double> L) {
  std::string t = trim(text);
  double v = 0.0;
  if (!t.empty() && t.back() == 'L') {
    if (!L) throw ConfigError("mu given as a multiple of L, but no L is known for this problem");
    t.pop_back();
    v = (t.empty() ? 1.0 : parse_number(t, "mu")) * *L;
  } else {
    v = parse_number(t, "mu");
  }
  if (!(v > 0.0)) throw ConfigError("mu must be positive");
  return v;
}

Prepared prepare(const ExperimentSpec& spec) {
  if (spec.data.empty()) throw ConfigError("--data is required");
  if (spec.problem != "binary" && spec.problem != "multiclass" && spec.problem != "mlp")
    throw ConfigError("unknown problem '" + spec.problem + "'");

  Prepared prep;
  Dataset full = load_libsvm(spec.data);
  if (spec.take) full = take(full, *spec.take, spec.seed);

  Dataset train, test;
  if (!spec.test_data.empty()) {
    ParseOptions opts;
    opts.min_dim = full.d;
    opts.label_values = full.label_values;
    test = load_libsvm(spec.test_data, opts);
    train = std::move(full);
    train.d = std::max(train.d, test.d);
  } else {
    std::tie(train, test) = split(full, {spec.split, spec.seed});
  }
  if (train.n() == 0) throw DataError("training set is empty after splitting");

  if (spec.scale) {
    auto scaled = scale_max_norm(train);
    prep.scale_factor = scaled.factor;
    train = std::move(scaled.data);
    if (test.n() > 0) apply_scale(test, prep.scale_factor);
  }

  prep.dataset_name = std::filesystem::path(spec.data).filename().string();
  prep.lambda = parse_lambda(spec.lambda, train.n());
  prep.alpha = spec.alpha.value_or(spec.problem == "mlp" ? 0.05 : 5.0);
  prep.train = std::make_shared<const Dataset>(std::move(train));
  prep.test = std::make_shared<const Dataset>(std::move(test));

  if (spec.problem == "binary") {
    prep.problem = std::make_unique<BinaryNonconvexProblem>(prep.train);
    prep.regularizer = std::make_unique<ExponentialPenaltyL1>(prep.lambda, prep.alpha);
  } else if (spec.problem == "multiclass") {
    auto p = std::make_unique<MulticlassLogisticProblem>(prep.train);
    prep.regularizer = std::make_unique<ExponentialPenaltyGroupL2>(prep.lambda, prep.alpha,
                                                                   static_cast<Index>(prep.train->d), p->classes());
    prep.problem = std::move(p);
  } else {
    prep.problem = std::make_unique<MlpProblem>(prep.train, spec.hidden);
    prep.regularizer = std::make_unique<ExponentialPenaltyL1>(prep.lambda, prep.alpha);
  }

  prep.L = prep.problem->smoothness_constant();
  const bool mu_is_number = !spec.mu.empty() && trim(spec.mu).back() != 'L';
  if (!prep.L && !mu_is_number) {
    prep.L = smoothness_proxy(*prep.problem, spec.seed);
    prep.L_is_proxy = true;
  }
  return prep;
}

Session run_session(const ExperimentSpec& spec) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  if (spec.repeats < 1) throw ConfigError("repeats must be at least 1");
  if (spec.methods.empty()) throw ConfigError("at least one method is required");

  Session s;
  s.spec = spec;
  s.prepared = prepare(spec);
  const Prepared& prep = s.prepared;

  std::vector<Method> methods = spec.methods;
  std::sort(methods.begin(), methods.end(), [](Method a, Method b) { return method_name(a) < method_name(b); });
  methods.erase(std::unique(methods.begin(), methods.end()), methods.end());

  for (Method m : methods) {
    const ResolvedParams rp = resolve_params(*prep.problem, make_config(spec, prep, m, spec.seed));
    for (const auto& w : rp.warnings) s.warnings.push_back(fmt::format("{}: {}", method_name(m), w));
  }

  for (Method m : methods)
    for (int r = 0; r < spec.repeats; ++r) s.runs.push_back({m, spec.seed + static_cast<std::uint64_t>(r), false, {}, {}});

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(s.runs.size()); ++j) {
    RunRecord& rec = s.runs[static_cast<std::size_t>(j)];
    try {
      rec.trace = run(*prep.problem, *prep.regularizer, make_config(spec, prep, rec.method, rec.seed));
      rec.ok = true;
    } catch (const DivergenceError& e) {
      rec.error = e.what();
      rec.trace = e.trace();
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  }

  if (spec.fstar) {
    s.fstar = *spec.fstar;
    s.fstar_overridden = true;
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& rec : s.runs)
      if (rec.ok)
        for (const auto& row : rec.trace.rows) best = std::min(best, row.objective);
    s.fstar = std::isfinite(best) ? best : 0.0;
  }
  s.absolute_residual = s.fstar == 0.0;
  s.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
  return s;
}

double residual(const Session& s, double F) {
  return s.absolute_residual ? F - s.fstar : (F - s.fstar) / std::abs(s.fstar);
}

void write_csv(std::ostream& out, const Session& s) {
  out << kCsvHeader << '\n';
  for (const auto& rec : s.runs) {
    if (!rec.ok) continue;
    for (const auto& row : rec.trace.rows) {
      out << fmt::format("{},{},{},{},{:.17g},{},{:.17g},{:.17g},{},{},{}\n", method_name(rec.method), s.spec.problem,
                         s.prepared.dataset_name, rec.seed, row.epoch, row.grad_evals, row.objective,
                         residual(s, row.objective), fmt_opt(row.test_accuracy), fmt_opt(row.upsilon),
                         fmt_opt(row.stationarity_proxy));
    }
  }
}

nlohmann::json metadata(const Session& s) {
  using nlohmann::json;
  const ExperimentSpec& sp = s.spec;
  const Prepared& pr = s.prepared;
  json spec = {
      {"problem", sp.problem},
      {"data", sp.data},
      {"test_data", sp.test_data},
      {"split", sp.split},
      {"repeats", sp.repeats},
      {"epochs", sp.epochs},
      {"seed", sp.seed},
      {"lambda", sp.lambda},
      {"mu", sp.mu},
      {"scale", sp.scale},
      {"diagnostics", sp.diagnostics},
      {"force", sp.force},
      {"compact_saga", sp.compact_saga},
      {"record_density", sp.record_density},
      {"hidden", sp.hidden},
  };
  spec["methods"] = json::array();
  for (Method m : sp.methods) spec["methods"].push_back(std::string(method_name(m)));
  spec["alpha"] = pr.alpha;
  spec["batch"] = sp.batch ? json(*sp.batch) : json(nullptr);
  spec["period"] = sp.period ? json(*sp.period) : json(nullptr);
  spec["take"] = sp.take ? json(*sp.take) : json(nullptr);

  json label_map = json::array();
  for (std::size_t k = 0; k < pr.train->label_values.size(); ++k) {
    const int internal = pr.train->q == 2 ? (k == 0 ? -1 : 1) : static_cast<int>(k);
    label_map.push_back({{"file_label", pr.train->label_values[k]}, {"internal", internal}});
  }

  json runs = json::array();
  for (const auto& rec : s.runs) {
    json r = {{"method", std::string(method_name(rec.method))},
              {"seed", rec.seed},
              {"status", rec.ok ? "ok" : "failed"},
              {"iterations", rec.trace.iterations},
              {"refreshes", rec.trace.refreshes},
              {"mu", rec.trace.params.mu},
              {"batch", rec.trace.params.b},
              {"period", rec.trace.params.m},
              {"wall_ms", rec.trace.rows.empty() ? 0 : rec.trace.rows.back().wall_ms}};
    if (!rec.ok) r["error"] = rec.error;
    r["row_wall_ms"] = json::array();
    for (const auto& row : rec.trace.rows) r["row_wall_ms"].push_back(row.wall_ms);
    runs.push_back(std::move(r));
  }

  json meta = {{"spec", spec},
               {"dataset", pr.dataset_name},
               {"n_train", pr.train->n()},
               {"n_test", pr.test ? pr.test->n() : 0},
               {"d", pr.train->d},
               {"q", pr.train->q},
               {"scaled", sp.scale},
               {"scale_factor", pr.scale_factor},
               {"lambda_value", pr.lambda},
               {"label_mapping", label_map},
               {"fstar", s.fstar},
               {"fstar_source", s.fstar_overridden ? "override" : "session minimum"},
               {"absolute_residual", s.absolute_residual},
               {"warnings", s.warnings},
               {"session_wall_ms", s.wall_ms},
               {"runs", runs}};
  meta["L"] = pr.L ? json(*pr.L) : json(nullptr);
  meta["L_is_proxy"] = pr.L_is_proxy;
  return meta;
}

std::vector<MethodSummary> summarize(const Session& s) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> acc;
  std::map<std::string, Method> which;
  for (const auto& rec : s.runs) {
    if (!rec.ok || rec.trace.rows.empty()) continue;
    const std::string name(method_name(rec.method));
    which[name] = rec.method;
    const TraceRow& last = rec.trace.rows.back();
    acc[name].first.push_back(residual(s, last.objective));
    if (last.test_accuracy) acc[name].second.push_back(*last.test_accuracy);
  }
  std::vector<MethodSummary> out;
  for (const auto& [name, v] : acc) {
    MethodSummary m;
    m.method = which[name];
    m.runs = v.first.size();
    m.residual_mean = mean(v.first);
    m.residual_std = stddev(v.first);
    if (!v.second.empty()) {
      m.accuracy_mean = mean(v.second);
      m.accuracy_std = stddev(v.second);
    }
    out.push_back(m);
  }
  return out;
}

// ---------------------------------------------------------------- commands

namespace {

struct Output {
  std::string path;
};

void emit(const Session& s, const Output& out, std::ostream& log) {
  for (const auto& w : s.warnings) log << "warning: " << w << '\n';
  for (const auto& rec : s.runs)
    if (!rec.ok) log << fmt::format("run {} seed {} failed: {}\n", method_name(rec.method), rec.seed, rec.error);
  if (out.path.empty()) {
    write_csv(std::cout, s);
    return;
  }
  std::ofstream csv(out.path, std::ios::binary);
  if (!csv) throw ConfigError("cannot write " + out.path);
  write_csv(csv, s);
  std::filesystem::path meta_path(out.path);
  meta_path.replace_extension(".meta.json");
  std::ofstream meta(meta_path);
  if (!meta) throw ConfigError("cannot write " + meta_path.string());
  meta << metadata(s).dump(2) << '\n';
}

int finish_code(const Session& s) {
  for (const auto& rec : s.runs)
    if (rec.ok) return 0;
  return exit_code(ErrorKind::Divergence);
}

int cmd_run(const ExperimentSpec& spec, const Output& out) {
  const Session s = run_session(spec);
  std::ostream& log = out.path.empty() ? std::cerr : std::cout;
  emit(s, out, log);
  const RunRecord& rec = s.runs.front();
  if (rec.ok) {
    const TraceRow& last = rec.trace.rows.back();
    const auto& p = rec.trace.params;
    log << fmt::format("{} seed={} epochs={} F={:.10g} evals={} iterations={} accuracy={} (mu={:.6g}, b={}, m={})\n",
                       method_name(rec.method), rec.seed, spec.epochs, last.objective, last.grad_evals,
                       rec.trace.iterations, last.test_accuracy ? fmt::format("{:.4f}", *last.test_accuracy) : "-",
                       p.mu, p.b, p.m);
  }
  return finish_code(s);
}

int cmd_compare(const ExperimentSpec& spec, const Output& out) {
  const Session s = run_session(spec);
  std::ostream& log = out.path.empty() ? std::cerr : std::cout;
  emit(s, out, log);
  log << fmt::format("F* = {:.12g} ({}{})\n", s.fstar, s.fstar_overridden ? "override" : "session minimum",
                     s.absolute_residual ? ", absolute residuals" : "");
  log << fmt::format("{:<10} {:>5}  {:<26} {}\n", "method", "runs", "final rel_residual", "test accuracy");
  for (const auto& m : summarize(s)) {
    const std::string accuracy =
        m.accuracy_mean ? fmt::format("{:.4f} ({:.4f})", *m.accuracy_mean, *m.accuracy_std) : std::string("-");
    log << fmt::format("{:<10} {:>5}  {:<26} {}\n", method_name(m.method), m.runs,
                       fmt::format("{:.4g} ({:.2g})", m.residual_mean, m.residual_std), accuracy);
  }
  return finish_code(s);
}

int cmd_check(Method method, std::size_t n, double L, const std::string& mu_text, std::optional<std::size_t> batch,
              std::optional<std::size_t> period) {
  if (n == 0) throw ConfigError("n must be at least 1");
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("L must be positive");
  const ParamSelection sel = select_params(method, n, L);
  std::cout << fmt::format("method     {}\nn          {}\nL          {:.10g}\n", method_name(method), n, L);
  std::cout << fmt::format("formula    mu={:.10g} b={} m={}\n", sel.formula.mu, sel.formula.b, sel.formula.m);
  std::cout << fmt::format("selected   mu={:.10g} b={} m={}{}\n", sel.chosen.mu, sel.chosen.b, sel.chosen.m,
                           sel.note.empty() ? "" : " (" + sel.note + ")");

  ParamSet p = sel.chosen;
  if (!mu_text.empty()) p.mu = parse_mu(mu_text, L);
  if (batch) p.b = *batch;
  if (period) p.m = *period;
  if (p.b < 1 || p.b > n) {
    const std::size_t c = std::clamp<std::size_t>(p.b, 1, n);
    std::cerr << fmt::format("warning: batch {} clamped to {}\n", p.b, c);
    p.b = c;
  }
  if (p.m < 1) throw ConfigError("period must be at least 1");
  if (!mu_text.empty() || batch || period)
    std::cout << fmt::format("validated  mu={:.10g} b={} m={}\n", p.mu, p.b, p.m);

  const FeasibilityReport rep = check_feasibility(method, p.mu, L, n, p.b, p.m);
  std::cout << fmt::format("feasible   {} (lhs={:.10g} rhs={:.10g} ratio={:.10g})\n", rep.ok ? "yes" : "no", rep.lhs,
                           rep.rhs, rep.ratio);
  std::cout << fmt::format("margin     {:.10g}  [(2mu-L)^2 - 4(V + V_Upsilon/rho)]\n", rep.margin);
  const double alt = batch_first_mu(method, L, n, p.b, p.m);
  const FeasibilityReport alt_rep = check_feasibility(method, alt, L, n, p.b, p.m);
  std::cout << fmt::format("batch-first mu={:.10g} for b={} m={} (ratio {:.10g}, margin {:.10g})\n", alt, p.b, p.m,
                           alt_rep.ratio, alt_rep.margin);
  return 0;
}

int cmd_inspect(const std::string& path) {
  const Dataset d = load_libsvm(path);
  std::map<double, std::size_t> hist;
  for (std::size_t i = 0; i < d.n(); ++i) hist[d.label_values.at(static_cast<std::size_t>(d.class_index(i)))]++;
  std::cout << fmt::format("file       {}\nn          {}\nd          {}\nq          {}\n", path, d.n(), d.d, d.q);
  std::cout << "labels    ";
  for (const auto& [label, count] : hist) std::cout << fmt::format(" {:g}:{}", label, count);
  std::cout << '\n';
  std::size_t nnz = 0;
  for (const auto& r : d.rows) nnz += r.nnz();
  std::cout << fmt::format("nnz        {}\nmax|a|^2   {:.10g}\n", nnz, d.max_squared_norm());
  if (d.q == 2) std::cout << fmt::format("L binary   {:.10g}\n", binary_smoothness(d));
  std::cout << fmt::format("L multi    {:.10g}\n", multiclass_smoothness(d));
  return 0;
}

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item == "all") {
      out.insert(out.end(), {Method::Saga, Method::Svrg, Method::Sarah});
      continue;
    }
    out.push_back(parse_method(item));
  }
  if (out.empty()) throw ConfigError("no methods given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic variance-reduced majorization-minimization solvers"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  Output out;
  std::string methods_text;
  std::string alpha_text;
  std::string fstar_text;

  auto bind_experiment = [&](CLI::App* sub, bool multi) {
    sub->add_option("--method", methods_text, multi ? "Comma-separated methods (saga,svrg,sarah,full or all)"
                                                    : "One of mm-saga, mm-svrg, mm-sarah, mm-full")
        ->required(!multi);
    sub->add_option("--problem", spec.problem, "binary, multiclass or mlp")
        ->check(CLI::IsMember({"binary", "multiclass", "mlp"}));
    sub->add_option("--data", spec.data, "Training data in LIBSVM format")->required();
    sub->add_option("--test-data", spec.test_data, "Separate test file (disables --split)");
    sub->add_option("--split", spec.split, "Training fraction of a random split");
    sub->add_option("--epochs", spec.epochs, "Epoch budget (n charged gradient evaluations each)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", spec.seed, multi ? "Base seed; repeat r uses seed + r" : "Run seed");
    if (multi) sub->add_option("--repeats", spec.repeats, "Runs per method")->check(CLI::PositiveNumber);
    sub->add_option("--alpha", alpha_text, "Penalty shape alpha (default 5, 0.05 for mlp)");
    sub->add_option("--lambda", spec.lambda, "Penalty weight, a number or 1/n");
    sub->add_option("--mu", spec.mu, "Proximal weight, a number or a multiple of L such as 0.8L");
    sub->add_option("--batch", spec.batch, "Batch size b");
    sub->add_option("--period", spec.period, "Expected refresh period m");
    sub->add_flag("--scale", spec.scale, "Scale features so max_i ||a_i|| = 1");
    sub->add_option("--take", spec.take, "Seeded subsample of this many rows before splitting");
    sub->add_flag("--diagnostics", spec.diagnostics, "Record upsilon and the stationarity proxy");
    sub->add_flag("--force", spec.force, "Run even when the parameters fail the feasibility test");
    sub->add_option("--out", out.path, "CSV output path (a .meta.json sidecar is written next to it)");
    sub->add_option("--fstar", fstar_text, "Fixed F* for residuals instead of the session minimum");
    sub->add_option("--hidden", spec.hidden, "Hidden units of the mlp problem")->check(CLI::PositiveNumber);
    sub->add_option("--record-density", spec.record_density, "Trace rows per epoch")->check(CLI::PositiveNumber);
    sub->add_flag("--compact-saga", spec.compact_saga, "Store per-example coefficients in the SAGA table");
  };

  auto* run_cmd = app.add_subcommand("run", "Run one method with one seed");
  bind_experiment(run_cmd, false);
  auto* compare_cmd = app.add_subcommand("compare", "Run several methods over repeated seeds");
  bind_experiment(compare_cmd, true);

  std::string check_method;
  std::size_t check_n = 0;
  double check_L = 0.0;
  std::string check_mu;
  std::optional<std::size_t> check_b, check_m;
  auto* check_cmd = app.add_subcommand("check", "Report default parameters and the feasibility test");
  check_cmd->add_option("--method", check_method, "Method")->required();
  check_cmd->add_option("--n", check_n, "Number of components")->required();
  check_cmd->add_option("--L", check_L, "Smoothness constant")->required();
  check_cmd->add_option("--mu", check_mu, "Proximal weight to validate (number or multiple of L)");
  check_cmd->add_option("--batch", check_b, "Batch size to validate");
  check_cmd->add_option("--period", check_m, "Period to validate");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Summarize a LIBSVM data file");
  inspect_cmd->add_option("--data", inspect_path, "Data file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::Config);
  }

  try {
    if (run_cmd->parsed() || compare_cmd->parsed()) {
      if (!alpha_text.empty()) spec.alpha = parse_number(alpha_text, "alpha");
      if (!fstar_text.empty()) spec.fstar = parse_number(fstar_text, "fstar");
      if (run_cmd->parsed()) {
        spec.methods = {parse_method(trim(methods_text))};
        spec.repeats = 1;
        return cmd_run(spec, out);
      }
      if (!methods_text.empty()) spec.methods = parse_methods(methods_text);
      return cmd_compare(spec, out);
    }
    if (check_cmd->parsed()) return cmd_check(parse_method(check_method), check_n, check_L, check_mu, check_b, check_m);
    if (inspect_cmd->parsed()) return cmd_inspect(inspect_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace svrmm::cli
