#pragma once

// Orthonormal bases for projection subspaces: incremental extension with a
// relative drop rule, and a sine-based principal angle that stays accurate
// down to ~1e-12 radians (a cosine-based angle bottoms out near 1e-8).

#include "bilyap/types.hpp"

namespace bilyap {

struct SubspaceBasis {
  MatrixXd V;  // n x k with orthonormal columns

  Eigen::Index rows() const { return V.rows(); }
  Eigen::Index dim() const { return V.cols(); }
  bool empty() const { return V.cols() == 0; }
};

struct ExtendResult {
  int added = 0;          // columns appended to the basis
  std::vector<int> kept;  // candidate column indices that survived
};

// Appends the candidate columns through twice-applied modified Gram-Schmidt.
// A candidate is dropped when its residual after projection falls below
// drop_tol times its original norm (or when it is zero / non-finite).
ExtendResult extend_orthonormal(SubspaceBasis& basis, const MatrixXd& candidates,
                                double drop_tol = default_tolerances().basis_drop);

// Rank-revealing orthonormalization of the columns of M.
SubspaceBasis orthonormalize(const MatrixXd& M,
                             double drop_tol = default_tolerances().basis_drop);

// ||V^T V - I||_F, the departure of V from orthonormal columns.
double orthonormality_defect(const MatrixXd& V);

// Sine of the largest principal angle by which span(W) leaves span(U): zero
// iff span(W) is contained in span(U); the symmetric largest principal angle
// when the spans have equal dimension. Returned in radians.
double subspace_angle(const MatrixXd& U, const MatrixXd& W);

}  // namespace bilyap
