#pragma once

#include <Eigen/Dense>

#include "bilyap/solve_report.hpp"
#include "bilyap/types.hpp"

namespace bilyap {

using Eigen::MatrixXd;

enum class FixedPointMode {
  splitting,      // L(X_{k+1}) = -Pi(X_k) - BB^T
  residual_form,  // X_{k+1} = X_k - L^{-1}(R_k)
};

struct FixedPointConfig {
  int max_iters = 500;
  double stop_tol = 1e-8;  // on ||R_k||_F / ||BB^T||_F
  FixedPointMode mode = FixedPointMode::splitting;
  int divergence_window = 5;  // consecutive residual-growth steps before bailing
  bool collect_timings = false;
};

struct FixedPointResult {
  MatrixXd X;
  SolveReport report;
};

// Fixed-point chain started at X_0 = 0.  The two modes are algebraically the
// same update written against different right-hand sides; both are kept so the
// equivalence is testable.  One record is written per pass with dim = the
// iteration index; rel_error is filled when an oracle solution is supplied.
FixedPointResult fixed_point_solve(const BilinearSystem& sys, const FixedPointConfig& cfg = {},
                                   const MatrixXd* oracle = nullptr);

}  // namespace bilyap
