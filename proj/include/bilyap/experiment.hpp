#pragma once

// Experiment harness: parses benchmark and method descriptions, runs the
// selected solvers against the direct oracle, and writes deterministic
// CSV/JSON reports (doubles at full round-trip precision, timing columns zero
// unless explicitly requested).

#include "bilyap/solve_report.hpp"
#include "bilyap/types.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace bilyap {

// --- benchmark descriptions ---------------------------------------------------

struct Heat2DSpec {
  int nx = 8;
};
struct FokkerPlanck1DSpec {
  int n = 100;
  double nu = 1.0;
};
struct BurgersCarlemanSpec {
  int n_grid = 10;
  double nu = 0.1;
  double alpha = 0.25;
};
using BenchmarkSpec = std::variant<Heat2DSpec, FokkerPlanck1DSpec, BurgersCarlemanSpec>;

// "heat2d:nx=8", "fokker_planck:n=100,nu=1", "burgers:n_grid=10,nu=0.1,alpha=0.25".
// Omitted keys keep their defaults; unknown names or keys throw
// std::invalid_argument with the accepted grammar in the message.
BenchmarkSpec parse_benchmark(const std::string& text);
std::string benchmark_label(const BenchmarkSpec& spec);  // canonical round-trip form
BilinearSystem build_benchmark(const BenchmarkSpec& spec);

// --- method descriptions --------------------------------------------------------

struct MethodSpec {
  enum class Kind { als, fixed_point, birka, rk };
  Kind kind = Kind::als;
  char rk_variant = 'A';  // rk only
  int birka_kmin = 1;     // birka only: reduced dimensions swept inclusively
  int birka_kmax = 10;
  std::string token;  // canonical token, also the report label
};

// "als", "fixed-point", "birka" (default 1:10), "birka:K", "birka:KMIN:KMAX",
// "rk-A" .. "rk-F". Case-insensitive variant letter; throws
// std::invalid_argument on anything else.
MethodSpec parse_method(const std::string& token);

// --- experiment configuration ----------------------------------------------------

struct ExperimentConfig {
  std::string benchmark = "heat2d:nx=8";
  std::vector<std::string> methods;
  bool oracle = true;  // direct reference solution (skipped above oracle_cap)
  std::filesystem::path out_dir = "out";
  unsigned seed = 20160318;  // reduced-basis draws and spectral estimators
  int oracle_cap = 500;      // largest n the direct solve may attempt
  double stop_tol = 1e-8;    // relative-residual stopping tolerance
  int max_dim = 40;          // subspace budget (rk dims, greedy ranks, birka cap)
  int max_iters = 500;       // fixed-point pass budget
  bool timings = false;      // stamp wall times (breaks byte-determinism)

  // Strict JSON object with exactly the keys above (all optional); unknown
  // keys throw std::invalid_argument naming the offender.
  static ExperimentConfig from_json_file(const std::filesystem::path& path);
  static ExperimentConfig from_json_text(const std::string& text);
};

// --- runs -------------------------------------------------------------------------

struct MethodOutcome {
  std::string token;
  bool ok = false;
  std::string error;  // failure description when ok is false
  SolveReport report;
  std::filesystem::path csv_path;
  std::filesystem::path detail_csv_path;  // rk methods only; empty otherwise
};

struct ExperimentResult {
  std::string benchmark_label;
  Eigen::Index n = 0;
  double contraction = 0.0;
  bool oracle_used = false;
  double oracle_residual = report_nan();
  std::string oracle_note;  // reason when the oracle was skipped
  std::vector<MethodOutcome> outcomes;
  std::filesystem::path summary_path;
  int exit_code = 0;  // 0 all methods ok, 2 at least one failed
};

// Builds the benchmark, runs every method (continuing past per-method solver
// failures), writes one CSV per method plus summary.json into cfg.out_dir.
// Configuration mistakes (bad benchmark/method grammar, empty method list)
// throw std::invalid_argument before anything runs.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct OracleOutput {
  std::filesystem::path solution_path;  // MatrixMarket dense array
  std::filesystem::path profile_path;   // CSV: rank, sigma, rel_error
  double residual = 0.0;                // relative residual of the written solution
};

// Solves the benchmark directly and writes the solution with its
// singular-value profile (the best-rank-k baseline). Throws SolveError when n
// exceeds the cap.
OracleOutput run_oracle(const std::string& benchmark, const std::filesystem::path& out_dir,
                        int oracle_cap = 500);

// Writes the benchmark system as a MatrixMarket directory (system.manifest
// plus one .mtx per matrix) so external tools consume identical instances.
std::filesystem::path run_bench_export(const std::string& benchmark,
                                       const std::filesystem::path& out_dir);

}  // namespace bilyap
