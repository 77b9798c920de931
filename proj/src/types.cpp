#include "bilyap/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>

namespace bilyap {

namespace {

// Compress a factor wider than its row count: Z = Q S gives
// Z D Z^T = Q (S D S^T) Q^T with Q no wider than n.
void compress(MatrixXd& Z, MatrixXd& D) {
  const Eigen::Index n = Z.rows();
  const Eigen::Index k = Z.cols();
  if (k <= n) return;
  Eigen::HouseholderQR<MatrixXd> qr(Z);
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, n);
  MatrixXd S = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  Z = std::move(Q);
  D = symmetrize(S * D * S.transpose());
}

}  // namespace

LowRankFactorization::LowRankFactorization(MatrixXd Z_in, MatrixXd D_in)
    : Z(std::move(Z_in)), D(std::move(D_in)) {
  if (D.rows() != D.cols() || D.rows() != Z.cols())
    throw std::invalid_argument("LowRankFactorization: core must be k x k for Z with k columns");
  if (!is_symmetric(D, 1e-12)) throw std::invalid_argument("LowRankFactorization: core must be symmetric");
  compress(Z, D);
}

namespace {

// Small congruent core: Z = Q T gives Z D Z^T = Q (T D T^T) Q^T. Norms taken
// from T D T^T cancel at entry level, so near-cancelling factors resolve down
// to roundoff of the factor scale; Gram-trace formulas like
// ||Z D Z^T||_F^2 = tr((D Z^T Z)^2) bottom out near sqrt(machine epsilon).
MatrixXd congruent_core(const MatrixXd& Z, const MatrixXd& D) {
  Eigen::HouseholderQR<MatrixXd> qr(Z);
  const Eigen::Index w = std::min(Z.rows(), Z.cols());
  const MatrixXd T = qr.matrixQR().topRows(w).triangularView<Eigen::Upper>();
  return symmetrize(T * D * T.transpose());
}

}  // namespace

double LowRankFactorization::frobenius_norm() const {
  if (Z.cols() == 0) return 0.0;
  return congruent_core(Z, D).norm();
}

double LowRankFactorization::spectral_norm() const {
  if (Z.cols() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(congruent_core(Z, D), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

BilinearSystem::BilinearSystem(MatrixXd A, std::vector<MatrixXd> N, MatrixXd B,
                               std::optional<MatrixXd> C, bool symmetric, const Tolerances& tol)
    : A_(std::move(A)), N_(std::move(N)), B_(std::move(B)), C_(std::move(C)), symmetric_(symmetric) {
  const Eigen::Index n = A_.rows();
  if (A_.cols() != n) throw std::invalid_argument("BilinearSystem: A must be square");
  for (const MatrixXd& Ni : N_)
    if (Ni.rows() != n || Ni.cols() != n)
      throw std::invalid_argument("BilinearSystem: every N_i must match the dimension of A");
  if (B_.rows() != n) throw std::invalid_argument("BilinearSystem: B must have n rows");
  if (C_ && C_->cols() != n) throw std::invalid_argument("BilinearSystem: C must have n columns");
  if (symmetric_) {
    if (relative_asymmetry(A_) > tol.symmetry_declare)
      throw std::invalid_argument("BilinearSystem: A violates the symmetric declaration");
    for (const MatrixXd& Ni : N_)
      if (relative_asymmetry(Ni) > tol.symmetry_declare)
        throw std::invalid_argument("BilinearSystem: an N_i violates the symmetric declaration");
  }
}

MatrixXd BilinearSystem::output_matrix() const {
  if (C_) return *C_;
  if (symmetric_) return B_.transpose();
  throw std::invalid_argument("BilinearSystem: no output matrix; set C or declare the system symmetric");
}

BilinearSystem BilinearSystem::transposed() const {
  std::vector<MatrixXd> Nt;
  Nt.reserve(N_.size());
  for (const MatrixXd& Ni : N_) Nt.push_back(Ni.transpose());
  return BilinearSystem(A_.transpose(), std::move(Nt), output_matrix().transpose(),
                        B_.transpose(), symmetric_);
}

}  // namespace bilyap
