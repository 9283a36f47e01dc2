#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "svrmm/problem.hpp"
#include "svrmm/regularizer.hpp"
#include "svrmm/solver.hpp"
#include "svrmm/types.hpp"

namespace svrmm::cli {

inline constexpr const char* kCsvHeader =
    "method,problem,dataset,seed,epoch,grad_evals,objective,rel_residual,test_accuracy,upsilon,stationarity_proxy";

struct ExperimentSpec {
  std::string problem = "binary";  // binary | multiclass | mlp
  std::string data;
  std::string test_data;  // empty: split the training file
  double split = 0.9;
  std::vector<Method> methods{Method::Saga, Method::Svrg, Method::Sarah};
  int repeats = 20;
  int epochs = 20;
  std::uint64_t seed = 1;
  std::optional<double> alpha;  // default 5, or 0.05 for mlp
  std::string lambda = "1/n";
  std::string mu;  // empty: automatic; "0.4L" style multiples of L accepted
  std::optional<std::size_t> batch;
  std::optional<std::size_t> period;
  bool scale = false;
  std::optional<std::size_t> take;
  bool diagnostics = false;
  bool force = false;
  bool compact_saga = false;
  int record_density = 1;
  int hidden = 100;
  std::optional<double> fstar;
};

/// Parses "1/n" (given n) or a plain number.
double parse_lambda(const std::string& text, std::size_t n);
/// Parses "<c>L", "L" or a plain number; multiples of L need a known L.
double parse_mu(const std::string& text, std::optional<double> L);

struct Prepared {
  std::shared_ptr<const Dataset> train;
  std::shared_ptr<const Dataset> test;  // may hold zero rows
  std::string dataset_name;
  double scale_factor = 1.0;
  double lambda = 0.0;
  double alpha = 0.0;
  std::unique_ptr<FiniteSumProblem> problem;
  std::unique_ptr<SurrogateRegularizer> regularizer;
  /// Analytic L, or the heuristic proxy for problems without one.
  std::optional<double> L;
  bool L_is_proxy = false;
};

/// Loads, subsamples, splits and scales the data, then builds the problem and regularizer.
Prepared prepare(const ExperimentSpec& spec);

struct RunRecord {
  Method method = Method::Full;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunTrace trace;  // partial when the run diverged
};

struct Session {
  ExperimentSpec spec;
  Prepared prepared;
  std::vector<RunRecord> runs;  // sorted by (method, seed)
  double fstar = 0.0;
  bool fstar_overridden = false;
  bool absolute_residual = false;  // F* == 0
  std::vector<std::string> warnings;
  std::int64_t wall_ms = 0;
};

/// Runs every (method, repeat) pair with seed = spec.seed + repeat and fixes F*.
/// Config errors surface before any run starts; divergences are recorded per run.
Session run_session(const ExperimentSpec& spec);

double residual(const Session& s, double F);
/// Header plus rows in (method, seed, epoch) order; successful runs only.
void write_csv(std::ostream& out, const Session& s);
nlohmann::json metadata(const Session& s);

struct MethodSummary {
  Method method = Method::Full;
  std::size_t runs = 0;
  double residual_mean = 0.0, residual_std = 0.0;
  std::optional<double> accuracy_mean, accuracy_std;
};
std::vector<MethodSummary> summarize(const Session& s);

/// Entry point of the svrmm executable. Returns the process exit code.
int main(int argc, char** argv);

}  // namespace svrmm::cli
