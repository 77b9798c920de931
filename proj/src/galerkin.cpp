#include "bilyap/galerkin.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace bilyap {

BilinearSystem project(const BilinearSystem& sys, const MatrixXd& V) {
  if (V.rows() != sys.n()) throw std::invalid_argument("project: V rows do not match the system");
  if (V.cols() == 0) throw std::invalid_argument("project: V must have at least one column");
  MatrixXd Ah = V.transpose() * sys.A() * V;
  if (sys.symmetric()) Ah = symmetrize(Ah);
  std::vector<MatrixXd> Nh;
  Nh.reserve(sys.N_list().size());
  for (const MatrixXd& Ni : sys.N_list()) {
    MatrixXd proj = V.transpose() * Ni * V;
    Nh.push_back(sys.symmetric() ? symmetrize(proj) : std::move(proj));
  }
  std::optional<MatrixXd> Ch;
  if (sys.has_output() && !sys.symmetric()) Ch = sys.output_matrix() * V;
  return BilinearSystem(std::move(Ah), std::move(Nh), V.transpose() * sys.B(), std::move(Ch),
                        sys.symmetric());
}

MatrixXd solve_projected(const BilinearSystem& sys, const MatrixXd& V, double residual_tol) {
  DirectSolveOptions opts;
  opts.mode = DirectSolveOptions::Mode::kronecker;
  opts.residual_tol = residual_tol;
  opts.cap = 128;  // Kronecker-path bound; projection dimensions stay small
  return direct_solve(project(sys, V), opts);
}

GalerkinSolution galerkin_solve(const BilinearSystem& sys, const MatrixXd& raw_V,
                                double galerkin_check) {
  GalerkinSolution sol;
  sol.basis = orthonormalize(raw_V);
  if (sol.basis.empty()) throw std::invalid_argument("galerkin_solve: the subspace is empty");
  sol.Y = solve_projected(sys, sol.basis.V);

  // Defining Galerkin property; failure means the projected solve lied.
  const MatrixXd& V = sol.basis.V;
  const MatrixXd proj_res = V.transpose() * residual(sys, sol.to_dense()) * V;
  const double scale = (sys.B() * sys.B().transpose()).norm();
  if (proj_res.norm() > galerkin_check * std::max(scale, 1e-300))
    throw SolveError("galerkin_solve: projected residual check failed");
  return sol;
}

GalerkinResidual galerkin_residual(const BilinearSystem& sys, const GalerkinSolution& sol) {
  const MatrixXd& V = sol.basis.V;
  const Eigen::Index n = V.rows(), k = V.cols(), r = sys.r();
  const Eigen::Index m = sys.m();
  MatrixXd Z(n, (m + 2) * k + r);
  Z.leftCols(k) = sys.A() * V;
  Z.middleCols(k, k) = V;
  for (Eigen::Index i = 0; i < m; ++i) Z.middleCols((2 + i) * k, k) = sys.N(i) * V;
  Z.rightCols(r) = sys.B();

  MatrixXd D = MatrixXd::Zero(Z.cols(), Z.cols());
  D.block(0, k, k, k) = sol.Y;
  D.block(k, 0, k, k) = sol.Y;
  for (Eigen::Index i = 0; i < m; ++i) D.block((2 + i) * k, (2 + i) * k, k, k) = sol.Y;
  D.bottomRightCorner(r, r) = MatrixXd::Identity(r, r);

  GalerkinResidual out{LowRankFactorization(std::move(Z), std::move(D)), 0.0, 0.0};
  out.frobenius = out.factored.frobenius_norm();
  // ||B B^T||_F == ||B^T B||_F via the Gram trick, so no n x n product.
  const double scale = (sys.B().transpose() * sys.B()).norm();
  out.relative = out.frobenius / std::max(scale, 1e-300);
  return out;
}

}  // namespace bilyap
