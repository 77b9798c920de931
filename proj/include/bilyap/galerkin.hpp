#pragma once

// Galerkin projection of the bilinear equation onto an orthonormal subspace:
// with V^T V = I the projected solution Y satisfies V^T R(V Y V^T) V = 0 up
// to roundoff of the projected solve, which is checked on every call.

#include "bilyap/core_operators.hpp"
#include "bilyap/subspace.hpp"
#include "bilyap/types.hpp"

namespace bilyap {

// (V^T A V, {V^T N_i V}, V^T B), output C V when available; the symmetric
// declaration survives projection (projected blocks are re-symmetrized).
BilinearSystem project(const BilinearSystem& sys, const MatrixXd& V);

// Exact dense-Kronecker solve of the projected equation (k x k, so the
// Kronecker system is k^2 x k^2); V must have orthonormal columns.
MatrixXd solve_projected(const BilinearSystem& sys, const MatrixXd& V,
                         double residual_tol = default_tolerances().solve_residual);

struct GalerkinSolution {
  SubspaceBasis basis;
  MatrixXd Y;  // projected solution, symmetric
  MatrixXd to_dense() const { return basis.V * Y * basis.V.transpose(); }
};

// Orthonormalizes raw_V, solves the projected equation, and verifies the
// defining property ||V^T R V||_F <= galerkin_check * ||B B^T||_F.
GalerkinSolution galerkin_solve(const BilinearSystem& sys, const MatrixXd& raw_V,
                                double galerkin_check = default_tolerances().galerkin_check);

struct GalerkinResidual {
  LowRankFactorization factored;  // R(V Y V^T) = Z D Z^T exactly
  double frobenius = 0.0;
  double relative = 0.0;  // vs ||B B^T||_F
};

// Residual of X = V Y V^T without forming any n x n matrix:
//   R = [A V | V] [[0, Y], [Y, 0]] [A V | V]^T + sum_i (N_i V) Y (N_i V)^T + B B^T.
GalerkinResidual galerkin_residual(const BilinearSystem& sys, const GalerkinSolution& sol);

}  // namespace bilyap
