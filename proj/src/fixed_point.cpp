#include "bilyap/fixed_point.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bilyap/core_operators.hpp"

namespace bilyap {

namespace {

double elapsed_ms(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

FixedPointResult fixed_point_solve(const BilinearSystem& sys, const FixedPointConfig& cfg,
                                   const MatrixXd* oracle) {
  if (cfg.max_iters < 1) throw std::invalid_argument("fixed_point: max_iters must be positive");
  if (!(cfg.stop_tol > 0.0))
    throw std::invalid_argument("fixed_point: stop_tol must be positive");
  if (cfg.divergence_window < 1)
    throw std::invalid_argument("fixed_point: divergence_window must be positive");
  if (oracle && (oracle->rows() != sys.n() || oracle->cols() != sys.n()))
    throw std::invalid_argument("fixed_point: oracle has wrong dimensions");

  const auto t0 = std::chrono::steady_clock::now();
  const int n = sys.n();
  const MatrixXd bbt = sys.B() * sys.B().transpose();
  const double scale = bbt.norm();
  const double oracle_scale = oracle ? std::max(oracle->norm(), 1e-300) : 0.0;
  const LyapunovSchurSolver lyap(sys.A());

  FixedPointResult out;
  out.X = MatrixXd::Zero(n, n);
  out.report.method = cfg.mode == FixedPointMode::splitting ? "fixed_point_splitting"
                                                            : "fixed_point_residual";
  out.report.status = SolveStatus::max_iterations;

  MatrixXd R = bbt;  // residual at X_0 = 0
  double prev_res = std::numeric_limits<double>::infinity();
  int growth_streak = 0;

  while (true) {
    const double relres = scale > 0.0 ? R.norm() / scale : 0.0;

    SolveRecord rec;
    rec.dim = out.report.iterations;
    rec.rel_residual = relres;
    if (oracle) rec.rel_error = (out.X - *oracle).norm() / oracle_scale;
    if (cfg.collect_timings) rec.millis = elapsed_ms(t0);
    out.report.records.push_back(rec);

    if (!std::isfinite(relres)) {
      out.report.status = SolveStatus::diverged;
      break;
    }
    if (relres <= cfg.stop_tol) {
      out.report.status = SolveStatus::converged;
      break;
    }
    if (out.report.iterations >= cfg.max_iters) break;
    if (relres > prev_res) {
      if (++growth_streak >= cfg.divergence_window) {
        out.report.status = SolveStatus::diverged;
        break;
      }
    } else {
      growth_streak = 0;
    }
    prev_res = relres;

    if (cfg.mode == FixedPointMode::splitting) {
      out.X = lyap.solve(apply_pi(sys, out.X) + bbt);
    } else {
      out.X += lyap.solve(R);  // lyap.solve(R) = -L^{-1}(R)
    }
    R = residual(sys, out.X);
    ++out.report.iterations;
  }

  return out;
}

}  // namespace bilyap
