// Command-line driver: runs solver experiments against the built-in
// benchmark generators, writes the direct reference solution, verifies the
// mathematical property suite, and exports benchmark instances as matrix
// files. Exit codes: 0 success, 1 usage error, 2 solver failure, 3 property
// failure.

#include "bilyap/experiment.hpp"
#include "bilyap/types.hpp"
#include "bilyap/verify_suite.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolver = 2;
constexpr int kExitProperty = 3;

int cmd_solve(const CLI::App& cmd, bilyap::ExperimentConfig cfg) {
  const bilyap::ExperimentResult result = bilyap::run_experiment(cfg);
  std::printf("benchmark %s  (n = %lld, contraction = %.6g)\n",
              result.benchmark_label.c_str(), static_cast<long long>(result.n),
              result.contraction);
  if (result.oracle_used)
    std::printf("oracle: rel residual %.3e\n", result.oracle_residual);
  else
    std::printf("oracle: skipped (%s)\n", result.oracle_note.c_str());
  for (const bilyap::MethodOutcome& outcome : result.outcomes) {
    if (outcome.ok) {
      const auto& last = outcome.report.records.back();
      std::printf("%-12s %-14s dim %-4d rel residual %.3e -> %s\n", outcome.token.c_str(),
                  to_string(outcome.report.status).c_str(), last.dim, last.rel_residual,
                  outcome.csv_path.string().c_str());
    } else {
      std::fprintf(stderr, "%-12s FAILED: %s\n", outcome.token.c_str(),
                   outcome.error.c_str());
    }
  }
  std::printf("summary: %s\n", result.summary_path.string().c_str());
  (void)cmd;
  return result.exit_code;
}

int cmd_oracle(const std::string& benchmark, const std::string& out_dir, int cap) {
  const bilyap::OracleOutput out = bilyap::run_oracle(benchmark, out_dir, cap);
  std::printf("solution: %s  (rel residual %.3e)\n", out.solution_path.string().c_str(),
              out.residual);
  std::printf("singular profile: %s\n", out.profile_path.string().c_str());
  return kExitOk;
}

int cmd_verify(const std::vector<unsigned>& seeds) {
  bool ok = true;
  for (const unsigned seed : seeds) {
    const auto results = bilyap::run_verify_suite(seed);
    std::printf("seed %u\n", seed);
    for (const bilyap::PropertyResult& r : results) {
      if (r.pass)
        std::printf("  PASS  %-30s (%d checks)\n", r.name.c_str(), r.checks);
      else
        std::printf("  FAIL  %-30s %s\n", r.name.c_str(), r.detail.c_str());
    }
    ok = ok && all_passed(results);
  }
  return ok ? kExitOk : kExitProperty;
}

int cmd_bench_export(const std::string& benchmark, const std::string& out_dir) {
  const std::filesystem::path dir = bilyap::run_bench_export(benchmark, out_dir);
  std::printf("exported: %s\n", dir.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank solvers for the bilinear Lyapunov equation "
               "A X + X A^T + sum_i N_i X N_i^T + B B^T = 0"};
  app.require_subcommand(1);

  // --- solve -------------------------------------------------------------------
  auto* solve = app.add_subcommand(
      "solve", "Run the selected methods on a benchmark and write CSV/JSON reports");
  std::string config_path;
  std::string benchmark;
  std::vector<std::string> methods;
  std::string out_dir;
  unsigned seed = 0;
  int oracle_cap = 0;
  double stop_tol = 0.0;
  int max_dim = 0;
  int max_iters = 0;
  bool oracle_flag = true;
  bool timings = false;
  solve->add_option("--config", config_path, "JSON config; flags override its fields")
      ->check(CLI::ExistingFile);
  solve->add_option("--benchmark", benchmark,
                    "heat2d:nx=N | fokker_planck:n=N,nu=X | burgers:n_grid=N,nu=X,alpha=X");
  solve->add_option("--method", methods,
                    "als | fixed-point | birka[:KMIN[:KMAX]] | rk-A..rk-F (repeat or "
                    "comma-separate)")
      ->delimiter(',');
  solve->add_option("--out", out_dir, "output directory");
  solve->add_option("--seed", seed, "random draws for reduced bases and estimators");
  solve->add_option("--oracle-cap", oracle_cap, "largest n the direct solve may attempt");
  solve->add_flag("--oracle,!--no-oracle", oracle_flag,
                  "compute the direct reference solution (error columns need it)");
  solve->add_option("--stop-tol", stop_tol, "relative-residual stopping tolerance");
  solve->add_option("--max-dim", max_dim, "subspace/rank budget");
  solve->add_option("--max-iters", max_iters, "fixed-point iteration budget");
  solve->add_flag("--timings", timings,
                  "stamp wall-clock millis into the CSVs (breaks byte determinism)");

  // --- oracle ------------------------------------------------------------------
  auto* oracle = app.add_subcommand(
      "oracle", "Solve a benchmark directly; write the solution and its singular profile");
  std::string o_benchmark;
  std::string o_out = "out";
  int o_cap = 500;
  oracle->add_option("--benchmark", o_benchmark, "benchmark description")->required();
  oracle->add_option("--out", o_out, "output directory");
  oracle->add_option("--oracle-cap", o_cap, "largest n the direct solve may attempt");

  // --- verify ------------------------------------------------------------------
  auto* verify = app.add_subcommand(
      "verify", "Re-derive the mathematical guarantees on fresh random instances");
  std::vector<unsigned> v_seeds;
  verify->add_option("--seed", v_seeds, "instance seeds (repeat or comma-separate)")
      ->delimiter(',');

  // --- bench-export ------------------------------------------------------------
  auto* bench = app.add_subcommand(
      "bench-export", "Write a benchmark instance as a directory of matrix files");
  std::string b_benchmark;
  std::string b_out = "out";
  bench->add_option("--benchmark", b_benchmark, "benchmark description")->required();
  bench->add_option("--out", b_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve->parsed()) {
      bilyap::ExperimentConfig cfg;
      if (solve->count("--config")) cfg = bilyap::ExperimentConfig::from_json_file(config_path);
      if (solve->count("--benchmark")) cfg.benchmark = benchmark;
      if (solve->count("--method")) cfg.methods = methods;
      if (solve->count("--out")) cfg.out_dir = out_dir;
      if (solve->count("--seed")) cfg.seed = seed;
      if (solve->count("--oracle-cap")) cfg.oracle_cap = oracle_cap;
      if (solve->count("--oracle") || solve->count("--no-oracle")) cfg.oracle = oracle_flag;
      if (solve->count("--stop-tol")) cfg.stop_tol = stop_tol;
      if (solve->count("--max-dim")) cfg.max_dim = max_dim;
      if (solve->count("--max-iters")) cfg.max_iters = max_iters;
      if (solve->count("--timings")) cfg.timings = timings;
      return cmd_solve(*solve, std::move(cfg));
    }
    if (oracle->parsed()) return cmd_oracle(o_benchmark, o_out, o_cap);
    if (verify->parsed()) {
      if (v_seeds.empty()) v_seeds.push_back(20160318u);
      return cmd_verify(v_seeds);
    }
    if (bench->parsed()) return cmd_bench_export(b_benchmark, b_out);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitUsage;
}
