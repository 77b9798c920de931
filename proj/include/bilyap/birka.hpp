#pragma once

// Bilinear iterative rational Krylov: fixed-point iteration on a k-dimensional
// reduced model. Each pass projects the system onto the current bases,
//   Atil = (W^T V)^{-1} W^T A V,  Ntil_i likewise,  Btil = (W^T V)^{-1} W^T B,
//   Ctil = C V,
// diagonalizes Atil = R Lam R^{-1}, transforms Bhat = R^{-T} Btil,
// Chat = Ctil R, Nhat_i = R^{-1} Ntil_i R, solves the coupled equations
//   V Lam + A V + sum_i N_i V Nhat_i^T + B Bhat^T = 0
//   W Lam + A^T W + sum_i N_i^T W Nhat_i + C^T Chat = 0
// and orthonormalizes. The loop stops when the reduced eigenvalues settle.

#include <complex>
#include <vector>

#include "bilyap/solve_report.hpp"
#include "bilyap/types.hpp"

namespace bilyap {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

struct BirkaConfig {
  double tol = 1e-3;   // relative change of the sorted reduced eigenvalues
  int max_iters = 100; // sweep budget
  unsigned seed = 20160318;  // initial-basis seed for the dimension overload
  bool collect_trace = true; // per-pass instrumentation (cheap at these sizes)
  bool force_two_sided = false;  // run the W-solve even when symmetry makes it
                                 // a copy of the V-solve
};

// One entry per pass through the loop top.
struct BirkaIterationTrace {
  double cond_wv = report_nan();         // condition number of W^T V
  double eig_change = report_nan();      // stopping metric (nan on first pass)
  double eig_vector_cond = report_nan(); // cond of the eigenvector matrix; 1 when k = 1
  double transform_delta = report_nan(); // max ||hat - tilde|| over B, C, N_i
  double orth_eig_delta = report_nan();  // eigenvalue drift caused by the orth step
};

struct BirkaReducedModel {
  MatrixXd A;               // k x k
  std::vector<MatrixXd> N;  // k x k each
  MatrixXd B;               // k x r
  MatrixXd C;               // outputs x k
};

struct BirkaResult {
  MatrixXd V, W;  // orthonormal n x k bases
  BirkaReducedModel reduced;
  int iterations = 0;
  SolveStatus status = SolveStatus::converged;
  double final_change = report_nan();
  double max_cond_wv = 0.0;
  std::vector<BirkaIterationTrace> trace;
};

// Solves V*Lambda + A*V + sum_i N_list[i]*V*NhatT_list[i] + RHS = 0 for V via
// the dense n*k Kronecker system I(x)A + Lambda^T(x)I + sum NhatT^T(x)N.
// Verifies the back-substituted residual to 1e-9 relative; a failure means an
// eigenvalue of -Lambda collides with the operator spectrum.
MatrixXcd gen_sylvester_solve(const MatrixXcd& A, const MatrixXcd& Lambda,
                              const std::vector<MatrixXcd>& N_list,
                              const std::vector<MatrixXcd>& NhatT_list,
                              const MatrixXcd& RHS);

// Two-sided iteration from explicit starting bases (orthonormalized on
// entry). Complex reduced quantities are handled internally; the returned
// bases are real, conjugate eigenvalue pairs contributing (Re, Im) column
// pairs. Non-convergence is flagged max_iterations, a basis rank collapse
// degenerate; a singular W^T V or defective reduced matrix throws.
BirkaResult birka(const BilinearSystem& sys, const MatrixXd& V0, const MatrixXd& W0,
                  const BirkaConfig& cfg = {});

// Convenience overload: V0 = W0 = orthonormalized Gaussian basis of dimension
// k drawn from cfg.seed.
BirkaResult birka(const BilinearSystem& sys, int k, const BirkaConfig& cfg = {});

// Relates the projected solution error to reduced-model quality on symmetric
// systems: for the Galerkin-reduced model on an orthonormal V,
//   ||X - V Xhat V^T||_M^2 = h2_full_sq - h2_reduced_sq,
// and the squared output-error norm h2_error_system_sq (computed through the
// stacked 2n x 2n error-system Gramian) is bounded by that difference.
struct H2ErrorTerms {
  double m_norm_error_sq;
  double h2_full_sq;
  double h2_reduced_sq;
  double h2_error_system_sq;
};
H2ErrorTerms reduced_h2_error_terms(const BilinearSystem& sys, const MatrixXd& V);

}  // namespace bilyap
