#pragma once

// Operator applications, Kronecker forms, direct solves and spectral
// diagnostics for A X + X A^T + sum_i N_i X N_i^T + B B^T = 0.
//
// Conventions: L(X) = A X + X A^T, Pi(X) = sum_i N_i X N_i^T,
// M(X) = -L(X) - Pi(X). vec() stacks columns, so L corresponds to
// I (x) A + A (x) I and Pi to sum_i N_i (x) N_i.

#include "bilyap/types.hpp"

#include <complex>
#include <functional>

namespace bilyap {

MatrixXd apply_lyap(const BilinearSystem& sys, const MatrixXd& X);
MatrixXd apply_pi(const BilinearSystem& sys, const MatrixXd& X);
MatrixXd apply_m(const BilinearSystem& sys, const MatrixXd& X);

// L(Xhat) + Pi(Xhat) + B B^T.
MatrixXd residual(const BilinearSystem& sys, const MatrixXd& Xhat);

// Residual norm relative to ||B B^T||_F.
double relative_residual(const BilinearSystem& sys, const MatrixXd& Xhat);

// <X, Y>_M = trace(X^T M(Y)). Defined for declared-symmetric systems only;
// the form is generally indefinite otherwise and this throws.
double m_inner(const BilinearSystem& sys, const MatrixXd& X, const MatrixXd& Y);
double m_norm(const BilinearSystem& sys, const MatrixXd& X);

// Dense Kronecker forms (n^2 x n^2); callers must keep n small.
MatrixXd kron_lyap_matrix(const BilinearSystem& sys);
MatrixXd kron_pi_matrix(const BilinearSystem& sys);
MatrixXd kron_m_matrix(const BilinearSystem& sys);

// max Re(eig(A)); negative for stable A.
double spectral_abscissa(const MatrixXd& A);

// Solves A X + X A^T + RHS = 0 through a real Schur form of A that is
// factored once and reused across right-hand sides.
class LyapunovSchurSolver {
 public:
  explicit LyapunovSchurSolver(const MatrixXd& A);
  MatrixXd solve(const MatrixXd& rhs) const;

 private:
  MatrixXd U_;  // orthogonal
  MatrixXd T_;  // quasi upper triangular
};

// One-shot A X + X A^T + RHS = 0. Below kron_threshold the dense Kronecker
// system is solved directly; at or above it the Schur path is used.
MatrixXd lyap_solve(const MatrixXd& A, const MatrixXd& rhs, int kron_threshold = 64);

struct DirectSolveOptions {
  enum class Mode {
    automatic,   // kronecker up to kron_cap, refinement above
    kronecker,   // dense n^2 x n^2 factorization
    refinement,  // Schur-accelerated residual correction (needs contraction < 1)
  };
  Mode mode = Mode::automatic;
  int kron_cap = 64;    // largest n routed to the Kronecker path in automatic mode
  int cap = 500;        // size guard (absolute maximum 2500)
  double residual_tol = 1e-10;  // relative residual the result must satisfy
  int max_refinement_steps = 500;
};

// Reference solution of the full equation. The result is symmetrized and its
// relative residual is verified against opts.residual_tol; failures raise.
MatrixXd direct_solve(const BilinearSystem& sys, const DirectSolveOptions& opts = {});

struct ContractionOptions {
  enum class Mode { automatic, dense, iterative };
  Mode mode = Mode::automatic;
  int dense_cap = 24;     // largest n for the dense Kronecker eigenproblem in automatic mode
  int krylov_dim = 80;
  int max_restarts = 10;
  double tol = 1e-9;      // relative accuracy of the dominant eigenvalue estimate
  unsigned seed = 20160318;  // start vector for the matrix-free path
};

// Spectral radius of L^{-1} Pi; the equation is uniquely solvable with a
// convergent fixed point when this is below one. Returns 0 for m = 0.
double check_contraction(const BilinearSystem& sys, const ContractionOptions& opts = {});

// ||Sigma||_{H2}^2 = trace(C P C^T) with P the controllability Gramian,
// cross-checked against trace(B^T Q B) with Q the observability Gramian.
double h2_norm_squared(const BilinearSystem& sys, double cross_check_rel_tol = 1e-8,
                       const DirectSolveOptions& opts = {});

// Leading left singular vectors, ordered by decreasing singular value.
MatrixXd dominant_left_singular_vectors(const MatrixXd& R, int count);
// Exact path for symmetric Z D Z^T factors: thin QR plus a small eigenproblem.
MatrixXd dominant_left_singular_vectors(const LowRankFactorization& R, int count);
// Matrix-free path for a symmetric operator given by its matrix-vector
// product, iterated until the singular-value residual drops below tol.
MatrixXd dominant_left_singular_vectors(const std::function<VectorXd(const VectorXd&)>& apply,
                                        Eigen::Index n, int count, double tol = 1e-8,
                                        unsigned seed = 20160318);

// Singular values of a symmetric matrix (by magnitude, descending) together
// with the relative Frobenius error of the best rank-k truncation for every k;
// tail(k) is the error at rank k, tail(0) = 1 for nonzero X.
struct SingularProfile {
  VectorXd sigma;  // size n
  VectorXd tail;   // size n + 1
};
SingularProfile singular_value_profile(const MatrixXd& X);

}  // namespace bilyap
