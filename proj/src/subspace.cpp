#include "bilyap/subspace.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace bilyap {

ExtendResult extend_orthonormal(SubspaceBasis& basis, const MatrixXd& candidates,
                                double drop_tol) {
  const Eigen::Index n = basis.empty() ? candidates.rows() : basis.rows();
  if (candidates.rows() != n)
    throw std::invalid_argument("extend_orthonormal: candidate rows do not match the basis");
  ExtendResult result;
  for (Eigen::Index j = 0; j < candidates.cols(); ++j) {
    VectorXd c = candidates.col(j);
    const double base = c.norm();
    if (!(base > 0.0) || !c.allFinite()) continue;
    for (int pass = 0; pass < 2; ++pass)
      if (!basis.empty()) c -= basis.V * (basis.V.transpose() * c);
    const double rem = c.norm();
    if (rem <= drop_tol * base) continue;
    basis.V.conservativeResize(n, basis.dim() + 1);
    basis.V.col(basis.dim() - 1) = c / rem;
    result.kept.push_back(static_cast<int>(j));
    ++result.added;
  }
  return result;
}

SubspaceBasis orthonormalize(const MatrixXd& M, double drop_tol) {
  SubspaceBasis basis;
  basis.V.resize(M.rows(), 0);
  extend_orthonormal(basis, M, drop_tol);
  return basis;
}

double orthonormality_defect(const MatrixXd& V) {
  if (V.cols() == 0) return 0.0;
  return (V.transpose() * V - MatrixXd::Identity(V.cols(), V.cols())).norm();
}

double subspace_angle(const MatrixXd& U, const MatrixXd& W) {
  const SubspaceBasis qu = orthonormalize(U);
  const SubspaceBasis qw = orthonormalize(W);
  if (qw.empty()) return 0.0;
  if (qu.empty()) return std::asin(1.0);
  const MatrixXd resid = qw.V - qu.V * (qu.V.transpose() * qw.V);
  const double s = Eigen::BDCSVD<MatrixXd>(resid).singularValues().maxCoeff();
  return std::asin(std::min(1.0, s));
}

}  // namespace bilyap
