#include "bilyap/experiment.hpp"

#include "bilyap/als.hpp"
#include "bilyap/benchmarks.hpp"
#include "bilyap/birka.hpp"
#include "bilyap/core_operators.hpp"
#include "bilyap/fixed_point.hpp"
#include "bilyap/galerkin.hpp"
#include "bilyap/matrix_market.hpp"
#include "bilyap/rk_subspace.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bilyap {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

[[noreturn]] void bad_benchmark(const std::string& text, const std::string& why) {
  throw std::invalid_argument(
      "benchmark '" + text + "': " + why +
      " (expected heat2d:nx=N | fokker_planck:n=N,nu=X | burgers:n_grid=N,nu=X,alpha=X)");
}

int parse_int(const std::string& text, const std::string& value) {
  std::size_t pos = 0;
  int out = 0;
  try {
    out = std::stoi(value, &pos);
  } catch (const std::exception&) {
    bad_benchmark(text, "'" + value + "' is not an integer");
  }
  if (pos != value.size()) bad_benchmark(text, "'" + value + "' is not an integer");
  return out;
}

double parse_double(const std::string& text, const std::string& value) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &pos);
  } catch (const std::exception&) {
    bad_benchmark(text, "'" + value + "' is not a number");
  }
  if (pos != value.size()) bad_benchmark(text, "'" + value + "' is not a number");
  return out;
}

// key=value pairs, comma-separated; keys validated by the caller.
std::vector<std::pair<std::string, std::string>> parse_params(const std::string& text,
                                                              const std::string& params) {
  std::vector<std::pair<std::string, std::string>> out;
  if (params.empty()) return out;
  for (const std::string& item : split(params, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      bad_benchmark(text, "parameter '" + item + "' is not key=value");
    out.emplace_back(lower(item.substr(0, eq)), item.substr(eq + 1));
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

std::string sanitize_token(std::string token) {
  for (char& c : token)
    if (c == ':' || c == '/' || c == '\\') c = '_';
  return token;
}

}  // namespace

// --- benchmarks -----------------------------------------------------------------

BenchmarkSpec parse_benchmark(const std::string& text) {
  auto colon = text.find(':');
  const std::string name = lower(text.substr(0, colon));
  const std::string params = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (name == "heat2d") {
    Heat2DSpec spec;
    for (const auto& [key, value] : parse_params(text, params)) {
      if (key == "nx")
        spec.nx = parse_int(text, value);
      else
        bad_benchmark(text, "unknown key '" + key + "' (heat2d accepts nx)");
    }
    return spec;
  }
  if (name == "fokker_planck" || name == "fokker_planck_1d") {
    FokkerPlanck1DSpec spec;
    for (const auto& [key, value] : parse_params(text, params)) {
      if (key == "n")
        spec.n = parse_int(text, value);
      else if (key == "nu")
        spec.nu = parse_double(text, value);
      else
        bad_benchmark(text, "unknown key '" + key + "' (fokker_planck accepts n, nu)");
    }
    return spec;
  }
  if (name == "burgers" || name == "burgers_carleman") {
    BurgersCarlemanSpec spec;
    for (const auto& [key, value] : parse_params(text, params)) {
      if (key == "n_grid")
        spec.n_grid = parse_int(text, value);
      else if (key == "nu")
        spec.nu = parse_double(text, value);
      else if (key == "alpha")
        spec.alpha = parse_double(text, value);
      else
        bad_benchmark(text, "unknown key '" + key + "' (burgers accepts n_grid, nu, alpha)");
    }
    return spec;
  }
  bad_benchmark(text, "unknown benchmark '" + name + "'");
}

std::string benchmark_label(const BenchmarkSpec& spec) {
  if (const auto* h = std::get_if<Heat2DSpec>(&spec))
    return "heat2d:nx=" + std::to_string(h->nx);
  if (const auto* f = std::get_if<FokkerPlanck1DSpec>(&spec))
    return "fokker_planck:n=" + std::to_string(f->n) + ",nu=" + format_double(f->nu);
  const auto& b = std::get<BurgersCarlemanSpec>(spec);
  return "burgers:n_grid=" + std::to_string(b.n_grid) + ",nu=" + format_double(b.nu) +
         ",alpha=" + format_double(b.alpha);
}

BilinearSystem build_benchmark(const BenchmarkSpec& spec) {
  if (const auto* h = std::get_if<Heat2DSpec>(&spec)) return heat2d(h->nx);
  if (const auto* f = std::get_if<FokkerPlanck1DSpec>(&spec))
    return fokker_planck_1d(f->n, f->nu);
  const auto& b = std::get<BurgersCarlemanSpec>(spec);
  return burgers_carleman(b.n_grid, b.nu, b.alpha);
}

// --- methods ---------------------------------------------------------------------

MethodSpec parse_method(const std::string& token) {
  const std::string t = lower(token);
  const auto usage = [&]() -> std::invalid_argument {
    return std::invalid_argument("method '" + token +
                                 "': expected als | fixed-point | birka[:KMIN[:KMAX]] | rk-A..rk-F");
  };
  MethodSpec spec;
  if (t == "als") {
    spec.kind = MethodSpec::Kind::als;
    spec.token = "als";
    return spec;
  }
  if (t == "fixed-point" || t == "fixed_point") {
    spec.kind = MethodSpec::Kind::fixed_point;
    spec.token = "fixed-point";
    return spec;
  }
  if (t == "birka" || t.rfind("birka:", 0) == 0) {
    spec.kind = MethodSpec::Kind::birka;
    if (t != "birka") {
      const auto parts = split(t.substr(6), ':');
      if (parts.empty() || parts.size() > 2) throw usage();
      try {
        std::size_t pos = 0;
        spec.birka_kmin = std::stoi(parts[0], &pos);
        if (pos != parts[0].size()) throw usage();
        if (parts.size() == 2) {
          spec.birka_kmax = std::stoi(parts[1], &pos);
          if (pos != parts[1].size()) throw usage();
        } else {
          spec.birka_kmax = spec.birka_kmin;
        }
      } catch (const std::invalid_argument&) {
        throw usage();
      } catch (const std::out_of_range&) {
        throw usage();
      }
    }
    if (spec.birka_kmin < 1 || spec.birka_kmax < spec.birka_kmin) throw usage();
    spec.token = spec.birka_kmin == spec.birka_kmax
                     ? "birka:" + std::to_string(spec.birka_kmin)
                     : "birka:" + std::to_string(spec.birka_kmin) + ":" +
                           std::to_string(spec.birka_kmax);
    return spec;
  }
  if (t.size() == 4 && t.rfind("rk-", 0) == 0) {
    const char v = static_cast<char>(std::toupper(static_cast<unsigned char>(t[3])));
    if (v < 'A' || v > 'F') throw usage();
    spec.kind = MethodSpec::Kind::rk;
    spec.rk_variant = v;
    spec.token = std::string("rk-") + v;
    return spec;
  }
  throw usage();
}

// --- configuration ----------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
  ExperimentConfig cfg;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "benchmark")
        cfg.benchmark = value.get<std::string>();
      else if (key == "methods")
        cfg.methods = value.get<std::vector<std::string>>();
      else if (key == "oracle")
        cfg.oracle = value.get<bool>();
      else if (key == "out_dir")
        cfg.out_dir = value.get<std::string>();
      else if (key == "seed")
        cfg.seed = value.get<unsigned>();
      else if (key == "oracle_cap")
        cfg.oracle_cap = value.get<int>();
      else if (key == "stop_tol")
        cfg.stop_tol = value.get<double>();
      else if (key == "max_dim")
        cfg.max_dim = value.get<int>();
      else if (key == "max_iters")
        cfg.max_iters = value.get<int>();
      else if (key == "timings")
        cfg.timings = value.get<bool>();
      else
        throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

// --- experiment run ----------------------------------------------------------------

namespace {

SolveReport run_als_method(const BilinearSystem& sys, const ExperimentConfig& cfg,
                           const MatrixXd* oracle) {
  AlsConfig als;
  als.subspace_mode = true;
  als.stop_rel_residual = cfg.stop_tol;
  als.max_outer_ranks = cfg.max_dim;
  als.seed = cfg.seed;
  als.collect_timings = cfg.timings;
  return als_greedy(sys, als, oracle).report;
}

SolveReport run_fixed_point_method(const BilinearSystem& sys, const ExperimentConfig& cfg,
                                   const MatrixXd* oracle) {
  FixedPointConfig fp;
  fp.max_iters = cfg.max_iters;
  fp.stop_tol = cfg.stop_tol;
  fp.collect_timings = cfg.timings;
  return fixed_point_solve(sys, fp, oracle).report;
}

SolveReport run_birka_method(const BilinearSystem& sys, const MethodSpec& method,
                             const ExperimentConfig& cfg, const MatrixXd* oracle) {
  SolveReport report;
  report.method = method.token;
  const int kmax = std::min(method.birka_kmax, cfg.max_dim);
  std::string last_error = "reduced dimension range is empty";
  bool all_converged = true;
  for (int k = method.birka_kmin; k <= kmax; ++k) {
    const auto started = std::chrono::steady_clock::now();
    try {
      BirkaConfig bk;
      bk.seed = cfg.seed;
      const BirkaResult reduced = birka(sys, k, bk);
      const GalerkinSolution sol = galerkin_solve(sys, reduced.V);
      SolveRecord rec;
      rec.dim = static_cast<int>(sol.basis.dim());
      rec.rel_residual = galerkin_residual(sys, sol).relative;
      if (oracle != nullptr)
        rec.rel_error = (sol.to_dense() - *oracle).norm() / oracle->norm();
      if (cfg.timings) {
        const auto elapsed = std::chrono::steady_clock::now() - started;
        rec.millis = std::chrono::duration<double, std::milli>(elapsed).count();
      }
      report.records.push_back(rec);
      ++report.iterations;
      if (reduced.status != SolveStatus::converged) all_converged = false;
    } catch (const std::exception& e) {
      last_error = e.what();  // one degenerate size does not abort the sweep
      all_converged = false;
    }
  }
  if (report.records.empty())
    throw SolveError("every reduced dimension in " + method.token + " failed; last: " +
                     last_error);
  report.status = all_converged ? SolveStatus::converged : SolveStatus::max_iterations;
  return report;
}

SolveReport run_rk_method(const BilinearSystem& sys, const MethodSpec& method,
                          const ExperimentConfig& cfg, const MatrixXd* oracle) {
  const ShiftStrategy strategy =
      method.rk_variant == 'F' ? variant_f(sys) : variant(method.rk_variant);
  RkConfig rk;
  rk.stop_tol = cfg.stop_tol;
  rk.max_dim = cfg.max_dim;
  rk.collect_timings = cfg.timings;
  return rk_solve(sys, strategy, rk, oracle).report;
}

std::string status_or_error(const MethodOutcome& outcome) {
  return outcome.ok ? to_string(outcome.report.status) : "error";
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.methods.empty())
    throw std::invalid_argument("config: at least one method is required");
  const BenchmarkSpec bench = parse_benchmark(cfg.benchmark);
  std::vector<MethodSpec> methods;
  methods.reserve(cfg.methods.size());
  for (const std::string& token : cfg.methods) methods.push_back(parse_method(token));
  if (cfg.oracle_cap < 1) throw std::invalid_argument("config: oracle_cap must be positive");
  if (cfg.max_dim < 1) throw std::invalid_argument("config: max_dim must be positive");
  if (cfg.max_iters < 1) throw std::invalid_argument("config: max_iters must be positive");
  if (!(cfg.stop_tol > 0)) throw std::invalid_argument("config: stop_tol must be positive");

  const BilinearSystem sys = build_benchmark(bench);
  ExperimentResult result;
  result.benchmark_label = benchmark_label(bench);
  result.n = sys.n();

  ContractionOptions contraction_opts;
  contraction_opts.seed = cfg.seed;
  result.contraction = check_contraction(sys, contraction_opts);

  MatrixXd oracle_solution;
  const MatrixXd* oracle = nullptr;
  if (!cfg.oracle) {
    result.oracle_note = "disabled by configuration";
  } else if (sys.n() > cfg.oracle_cap) {
    result.oracle_note = "n = " + std::to_string(sys.n()) + " exceeds oracle_cap = " +
                         std::to_string(cfg.oracle_cap);
  } else {
    DirectSolveOptions direct;
    direct.cap = cfg.oracle_cap;
    oracle_solution = direct_solve(sys, direct);
    oracle = &oracle_solution;
    result.oracle_used = true;
    result.oracle_residual = relative_residual(sys, oracle_solution);
  }

  std::filesystem::create_directories(cfg.out_dir);
  for (const MethodSpec& method : methods) {
    MethodOutcome outcome;
    outcome.token = method.token;
    try {
      switch (method.kind) {
        case MethodSpec::Kind::als:
          outcome.report = run_als_method(sys, cfg, oracle);
          break;
        case MethodSpec::Kind::fixed_point:
          outcome.report = run_fixed_point_method(sys, cfg, oracle);
          break;
        case MethodSpec::Kind::birka:
          outcome.report = run_birka_method(sys, method, cfg, oracle);
          break;
        case MethodSpec::Kind::rk:
          outcome.report = run_rk_method(sys, method, cfg, oracle);
          break;
      }
      outcome.report.method = method.token;
      outcome.ok = true;
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error = e.what();
    }
    if (outcome.ok) {
      outcome.csv_path = cfg.out_dir / (sanitize_token(method.token) + ".csv");
      outcome.report.write_csv(outcome.csv_path, /*detail=*/false);
      if (method.kind == MethodSpec::Kind::rk) {
        outcome.detail_csv_path = cfg.out_dir / (sanitize_token(method.token) + "_detail.csv");
        outcome.report.write_csv(outcome.detail_csv_path, /*detail=*/true);
      }
    }
    result.outcomes.push_back(std::move(outcome));
  }

  ordered_json summary;
  summary["settings"] = {
      {"benchmark", cfg.benchmark},  {"methods", cfg.methods},
      {"oracle", cfg.oracle},        {"out_dir", cfg.out_dir.generic_string()},
      {"seed", cfg.seed},            {"oracle_cap", cfg.oracle_cap},
      {"stop_tol", cfg.stop_tol},    {"max_dim", cfg.max_dim},
      {"max_iters", cfg.max_iters},  {"timings", cfg.timings},
  };
  summary["benchmark_label"] = result.benchmark_label;
  summary["n"] = result.n;
  summary["m"] = sys.m();
  summary["contraction"] = result.contraction;
  ordered_json oracle_json;
  oracle_json["used"] = result.oracle_used;
  if (result.oracle_used)
    oracle_json["rel_residual"] = result.oracle_residual;
  else
    oracle_json["note"] = result.oracle_note;
  summary["oracle"] = oracle_json;
  ordered_json method_rows = ordered_json::array();
  for (const MethodOutcome& outcome : result.outcomes) {
    ordered_json row;
    row["method"] = outcome.token;
    row["status"] = status_or_error(outcome);
    if (outcome.ok) {
      row["iterations"] = outcome.report.iterations;
      row["records"] = outcome.report.records.size();
      if (!outcome.report.records.empty()) {
        const SolveRecord& last = outcome.report.records.back();
        row["final_dim"] = last.dim;
        if (std::isfinite(last.rel_residual)) row["final_rel_residual"] = last.rel_residual;
        if (std::isfinite(last.rel_error)) row["final_rel_error"] = last.rel_error;
      }
      row["csv"] = outcome.csv_path.filename().generic_string();
      if (!outcome.detail_csv_path.empty())
        row["detail_csv"] = outcome.detail_csv_path.filename().generic_string();
    } else {
      row["error"] = outcome.error;
    }
    method_rows.push_back(std::move(row));
  }
  summary["results"] = std::move(method_rows);

  result.summary_path = cfg.out_dir / "summary.json";
  {
    std::ofstream out(result.summary_path);
    if (!out)
      throw SolveError("cannot write '" + result.summary_path.string() + "'");
    out << summary.dump(2) << '\n';
  }

  result.exit_code = 0;
  for (const MethodOutcome& outcome : result.outcomes)
    if (!outcome.ok) result.exit_code = 2;
  return result;
}

// --- oracle run ----------------------------------------------------------------------

OracleOutput run_oracle(const std::string& benchmark, const std::filesystem::path& out_dir,
                        int oracle_cap) {
  const BenchmarkSpec bench = parse_benchmark(benchmark);
  const BilinearSystem sys = build_benchmark(bench);
  if (sys.n() > oracle_cap)
    throw SolveError("oracle: n = " + std::to_string(sys.n()) + " exceeds the cap " +
                     std::to_string(oracle_cap));
  DirectSolveOptions direct;
  direct.cap = oracle_cap;
  const MatrixXd X = direct_solve(sys, direct);

  std::filesystem::create_directories(out_dir);
  OracleOutput out;
  out.residual = relative_residual(sys, X);
  out.solution_path = out_dir / "X.mtx";
  mm::write_matrix(out.solution_path, X,
                   "reference solution for " + benchmark_label(bench));

  const SingularProfile profile = singular_value_profile(X);
  out.profile_path = out_dir / "singular_profile.csv";
  std::ofstream csv(out.profile_path);
  if (!csv) throw SolveError("cannot write '" + out.profile_path.string() + "'");
  csv << "rank,sigma,rel_error\n";
  char buf[128];
  for (Eigen::Index k = 1; k <= profile.sigma.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", static_cast<int>(k),
                  profile.sigma(k - 1), profile.tail(k));
    csv << buf;
  }
  return out;
}

// --- raw export ------------------------------------------------------------------------

std::filesystem::path run_bench_export(const std::string& benchmark,
                                       const std::filesystem::path& out_dir) {
  const BenchmarkSpec bench = parse_benchmark(benchmark);
  const BilinearSystem sys = build_benchmark(bench);
  const std::filesystem::path dir = out_dir / sanitize_token(benchmark_label(bench));
  mm::write_system(dir, sys);
  return dir;
}

}  // namespace bilyap
