#pragma once

// Core value types for bilinear Lyapunov solvers: the system
//
//   A X + X A^T + sum_i N_i X N_i^T + B B^T = 0
//
// together with low-rank factorizations and the shared tolerance record.

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bilyap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Numerical failure: singular operator, residual check not met, divergence.
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Default thresholds, collected in one record so tests can tighten or loosen
// them without hunting for magic numbers.
struct Tolerances {
  double symmetry_declare = 1e-12;  // relative check when a system is declared symmetric
  double symmetry_result = 1e-10;   // relative symmetry a symmetric result must satisfy
  double solve_residual = 1e-10;    // relative residual a direct solve must reach
  double orthonormality = 1e-10;    // ||V^T V - I||_F bound for bases
  double basis_drop = 1e-10;        // relative norm below which a candidate column is dropped
  double galerkin_check = 1e-9;     // bound on ||V^T R V||_F / ||B B^T||_F for Galerkin solutions
};

inline const Tolerances& default_tolerances() {
  static const Tolerances t{};
  return t;
}

inline double relative_asymmetry(const MatrixXd& X) {
  const double n = X.norm();
  if (n == 0.0) return 0.0;
  return (X - X.transpose()).norm() / n;
}

inline bool is_symmetric(const MatrixXd& X, double rel_tol) {
  return X.rows() == X.cols() && relative_asymmetry(X) <= rel_tol;
}

inline MatrixXd symmetrize(const MatrixXd& X) { return 0.5 * (X + X.transpose()); }

// Exact representation Z D Z^T with a small symmetric core D. D may be
// indefinite (signed truncations); width is bounded by the row count because
// wider factors are compressed on construction.
struct LowRankFactorization {
  MatrixXd Z;  // n x k
  MatrixXd D;  // k x k, symmetric

  LowRankFactorization() = default;
  LowRankFactorization(MatrixXd Z_in, MatrixXd D_in);

  Eigen::Index rows() const { return Z.rows(); }
  Eigen::Index rank_bound() const { return Z.cols(); }

  MatrixXd to_dense() const { return Z * D * Z.transpose(); }
  VectorXd apply(const VectorXd& x) const { return Z * (D * (Z.transpose() * x)); }

  // Frobenius norm of Z D Z^T from the k x k Gram matrix; no n x n product.
  double frobenius_norm() const;
  // Spectral norm of the (symmetric) represented matrix.
  double spectral_norm() const;
};

// Bilinear control system (A, {N_i}, B) with optional output map C.
// A symmetric declaration asserts A = A^T and N_i = N_i^T and makes C default
// to B^T; the constructor enforces the declaration.
class BilinearSystem {
 public:
  BilinearSystem(MatrixXd A, std::vector<MatrixXd> N, MatrixXd B,
                 std::optional<MatrixXd> C = std::nullopt, bool symmetric = false,
                 const Tolerances& tol = default_tolerances());

  Eigen::Index n() const { return A_.rows(); }
  Eigen::Index m() const { return static_cast<Eigen::Index>(N_.size()); }
  Eigen::Index r() const { return B_.cols(); }

  const MatrixXd& A() const { return A_; }
  const std::vector<MatrixXd>& N_list() const { return N_; }
  const MatrixXd& N(std::size_t i) const { return N_.at(i); }
  const MatrixXd& B() const { return B_; }

  bool symmetric() const { return symmetric_; }
  bool has_output() const { return C_.has_value() || symmetric_; }
  // Stored C, or B^T for declared-symmetric systems. Throws when undefined.
  MatrixXd output_matrix() const;

  // The adjoint system (A^T, {N_i^T}, C^T) with output B^T; its controllability
  // Gramian is this system's observability Gramian.
  BilinearSystem transposed() const;

 private:
  MatrixXd A_;
  std::vector<MatrixXd> N_;
  MatrixXd B_;
  std::optional<MatrixXd> C_;
  bool symmetric_ = false;
};

}  // namespace bilyap
