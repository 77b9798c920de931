#include "bilyap/core_operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace bilyap {

namespace {

using Eigen::Index;

VectorXd vec(const MatrixXd& X) {
  return Eigen::Map<const VectorXd>(X.data(), X.size());
}

MatrixXd unvec(const VectorXd& x, Index n) {
  return Eigen::Map<const MatrixXd>(x.data(), n, n);
}

// K += scale * (A (x) B), written blockwise to avoid expression temporaries
// at n^2 x n^2 sizes.
void add_kron(MatrixXd& K, const MatrixXd& A, const MatrixXd& B, double scale = 1.0) {
  const Index na = A.rows(), nb = B.rows();
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < na; ++i) {
      const double a = A(i, j);
      if (a != 0.0) K.block(i * nb, j * nb, nb, B.cols()) += (scale * a) * B;
    }
}

double floor_norm(double x) { return std::max(x, 1e-300); }

// Symmetric Lanczos with full reorthogonalization. Returns Ritz values and
// vectors of the `count` eigenvalues largest in magnitude once their residual
// bounds drop below tol * |theta|; restarts from the dominant Ritz vector.
struct LanczosResult {
  VectorXd values;   // by decreasing magnitude
  MatrixXd vectors;  // corresponding Ritz vectors
  bool converged = false;
};

LanczosResult lanczos_extreme(const std::function<VectorXd(const VectorXd&)>& apply, Index dim,
                              int count, double tol, unsigned seed, int max_dim, int max_restarts) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  VectorXd start(dim);
  for (Index i = 0; i < dim; ++i) start[i] = gauss(rng);
  start.normalize();

  LanczosResult out;
  const int kmax = static_cast<int>(std::min<Index>(max_dim, dim));
  for (int restart = 0; restart <= max_restarts; ++restart) {
    std::vector<VectorXd> basis;
    basis.reserve(kmax);
    std::vector<double> alpha, beta;  // beta[j]: coupling between v_j and v_{j+1}
    VectorXd v = start;
    for (int j = 0; j < kmax; ++j) {
      basis.push_back(v);
      VectorXd w = apply(v);
      const double a = v.dot(w);
      alpha.push_back(a);
      w -= a * v;
      if (j > 0) w -= beta[j - 1] * basis[j - 1];
      for (const VectorXd& q : basis) w -= q.dot(w) * q;  // full reorthogonalization
      const double b = w.norm();

      const int k = j + 1;
      bool check_now = (b <= 1e-14) || k >= count + 2 || k == kmax;
      if (check_now && k >= count) {
        MatrixXd Tk = MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) Tk(i, i) = alpha[i];
        for (int i = 0; i + 1 < k; ++i) {
          Tk(i, i + 1) = beta[i];
          Tk(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(Tk);
        std::vector<int> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int p, int q) {
          return std::abs(es.eigenvalues()[p]) > std::abs(es.eigenvalues()[q]);
        });
        const int take = std::min(count, k);
        bool ok = true;
        for (int t = 0; t < take; ++t) {
          const double theta = es.eigenvalues()[order[t]];
          const double resid = std::abs(b * es.eigenvectors()(k - 1, order[t]));
          if (resid > tol * std::max(std::abs(theta), 1e-300)) ok = false;
        }
        if ((ok && take == count) || b <= 1e-14 || k == kmax) {
          out.values.resize(take);
          out.vectors.resize(dim, take);
          for (int t = 0; t < take; ++t) {
            out.values[t] = es.eigenvalues()[order[t]];
            VectorXd y = VectorXd::Zero(dim);
            for (int i = 0; i < k; ++i) y += es.eigenvectors()(i, order[t]) * basis[i];
            y.normalize();
            out.vectors.col(t) = y;
          }
          out.converged = ok || b <= 1e-14;
          if (out.converged || b <= 1e-14) return out;
          start = out.vectors.col(0);  // restart toward the dominant pair
          break;
        }
      }
      if (b <= 1e-14) break;
      beta.push_back(b);
      v = w / b;
    }
    if (out.converged) return out;
  }
  return out;
}

}  // namespace

MatrixXd apply_lyap(const BilinearSystem& sys, const MatrixXd& X) {
  return sys.A() * X + X * sys.A().transpose();
}

MatrixXd apply_pi(const BilinearSystem& sys, const MatrixXd& X) {
  MatrixXd P = MatrixXd::Zero(X.rows(), X.cols());
  for (const MatrixXd& Ni : sys.N_list()) P += Ni * X * Ni.transpose();
  return P;
}

MatrixXd apply_m(const BilinearSystem& sys, const MatrixXd& X) {
  return -apply_lyap(sys, X) - apply_pi(sys, X);
}

MatrixXd residual(const BilinearSystem& sys, const MatrixXd& Xhat) {
  return apply_lyap(sys, Xhat) + apply_pi(sys, Xhat) + sys.B() * sys.B().transpose();
}

double relative_residual(const BilinearSystem& sys, const MatrixXd& Xhat) {
  const double scale = (sys.B() * sys.B().transpose()).norm();
  return residual(sys, Xhat).norm() / floor_norm(scale);
}

double m_inner(const BilinearSystem& sys, const MatrixXd& X, const MatrixXd& Y) {
  if (!sys.symmetric())
    throw std::invalid_argument("m_inner: the energy inner product requires a symmetric system");
  return (X.array() * apply_m(sys, Y).array()).sum();
}

double m_norm(const BilinearSystem& sys, const MatrixXd& X) {
  return std::sqrt(std::max(m_inner(sys, X, X), 0.0));
}

MatrixXd kron_lyap_matrix(const BilinearSystem& sys) {
  const Index n = sys.n();
  MatrixXd K = MatrixXd::Zero(n * n, n * n);
  const MatrixXd I = MatrixXd::Identity(n, n);
  add_kron(K, I, sys.A());
  add_kron(K, sys.A(), I);
  return K;
}

MatrixXd kron_pi_matrix(const BilinearSystem& sys) {
  const Index n = sys.n();
  MatrixXd K = MatrixXd::Zero(n * n, n * n);
  for (const MatrixXd& Ni : sys.N_list()) add_kron(K, Ni, Ni);
  return K;
}

MatrixXd kron_m_matrix(const BilinearSystem& sys) {
  MatrixXd K = kron_lyap_matrix(sys);
  K += kron_pi_matrix(sys);
  return -K;
}

double spectral_abscissa(const MatrixXd& A) {
  Eigen::EigenSolver<MatrixXd> es(A, false);
  return es.eigenvalues().real().maxCoeff();
}

LyapunovSchurSolver::LyapunovSchurSolver(const MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("LyapunovSchurSolver: A must be square");
  Eigen::RealSchur<MatrixXd> schur(A);
  if (schur.info() != Eigen::Success) throw SolveError("LyapunovSchurSolver: Schur decomposition failed");
  U_ = schur.matrixU();
  T_ = schur.matrixT();
}

MatrixXd LyapunovSchurSolver::solve(const MatrixXd& rhs) const {
  const Index n = T_.rows();
  if (rhs.rows() != n || rhs.cols() != n)
    throw std::invalid_argument("LyapunovSchurSolver: RHS dimension mismatch");

  // T Y + Y T^T = F with T quasi upper triangular, solved blockwise from the
  // trailing corner; diagonal couplings are 1x1, 1x2, 2x1 or 2x2 Sylvester
  // systems handled through their (at most 4x4) Kronecker forms.
  const MatrixXd F = -(U_.transpose() * rhs * U_);
  std::vector<std::pair<Index, Index>> blocks;  // (start, size)
  for (Index i = 0; i < n;) {
    const Index size = (i + 1 < n && T_(i + 1, i) != 0.0) ? 2 : 1;
    blocks.emplace_back(i, size);
    i += size;
  }
  MatrixXd Y = MatrixXd::Zero(n, n);
  for (auto jb = blocks.rbegin(); jb != blocks.rend(); ++jb) {
    const auto [bj, nj] = *jb;
    for (auto ib = blocks.rbegin(); ib != blocks.rend(); ++ib) {
      const auto [bi, ni] = *ib;
      MatrixXd C = F.block(bi, bj, ni, nj);
      const Index ri = bi + ni, rj = bj + nj;  // trailing ranges already solved
      if (ri < n) C.noalias() -= T_.block(bi, ri, ni, n - ri) * Y.block(ri, bj, n - ri, nj);
      if (rj < n) C.noalias() -= Y.block(bi, rj, ni, n - rj) * T_.block(bj, rj, nj, n - rj).transpose();

      MatrixXd K = MatrixXd::Zero(ni * nj, ni * nj);
      const MatrixXd Tii = T_.block(bi, bi, ni, ni);
      const MatrixXd Tjj = T_.block(bj, bj, nj, nj);
      add_kron(K, MatrixXd::Identity(nj, nj), Tii);
      add_kron(K, Tjj, MatrixXd::Identity(ni, ni));
      Eigen::FullPivLU<MatrixXd> lu(K);
      lu.setThreshold(1e-12);
      if (!lu.isInvertible())
        throw SolveError("lyap_solve: singular operator (an eigenvalue sum of A is zero)");
      const VectorXd y = lu.solve(Eigen::Map<const VectorXd>(C.data(), C.size()));
      Y.block(bi, bj, ni, nj) = Eigen::Map<const MatrixXd>(y.data(), ni, nj);
    }
  }
  return U_ * Y * U_.transpose();
}

MatrixXd lyap_solve(const MatrixXd& A, const MatrixXd& rhs, int kron_threshold) {
  const Index n = A.rows();
  if (A.cols() != n || rhs.rows() != n || rhs.cols() != n)
    throw std::invalid_argument("lyap_solve: dimension mismatch");
  MatrixXd X;
  if (n < kron_threshold) {
    MatrixXd K = MatrixXd::Zero(n * n, n * n);
    const MatrixXd I = MatrixXd::Identity(n, n);
    add_kron(K, I, A);
    add_kron(K, A, I);
    Eigen::PartialPivLU<MatrixXd> lu(std::move(K));
    X = unvec(lu.solve(-vec(rhs)), n);
  } else {
    X = LyapunovSchurSolver(A).solve(rhs);
  }
  const double scale = floor_norm(rhs.norm());
  const double rel = (A * X + X * A.transpose() + rhs).norm() / scale;
  if (!std::isfinite(rel) || rel > 1e-8)
    throw SolveError("lyap_solve: residual check failed (operator singular or ill conditioned)");
  return X;
}

MatrixXd direct_solve(const BilinearSystem& sys, const DirectSolveOptions& opts) {
  const Index n = sys.n();
  if (opts.cap > 2500) throw std::invalid_argument("direct_solve: cap exceeds the absolute guard of 2500");
  if (n > opts.cap)
    throw std::invalid_argument("direct_solve: system size " + std::to_string(n) +
                                " exceeds the cap of " + std::to_string(opts.cap));
  const MatrixXd BBt = sys.B() * sys.B().transpose();
  const double scale = BBt.norm();
  if (scale == 0.0) return MatrixXd::Zero(n, n);

  using Mode = DirectSolveOptions::Mode;
  Mode mode = opts.mode;
  if (mode == Mode::automatic) {
    if (sys.m() == 0 || n <= opts.kron_cap) mode = (sys.m() == 0) ? Mode::refinement : Mode::kronecker;
    else mode = Mode::refinement;
  }

  MatrixXd X;
  if (mode == Mode::kronecker) {
    if (n > 128)
      throw std::invalid_argument("direct_solve: Kronecker path limited to n <= 128; use refinement");
    MatrixXd K = kron_lyap_matrix(sys);
    K += kron_pi_matrix(sys);
    Eigen::PartialPivLU<Eigen::Ref<MatrixXd>> lu(K);  // factor in place
    X = symmetrize(unvec(lu.solve(-vec(BBt)), n));
  } else {
    // X <- X - L^{-1}(R) converges geometrically when rho(L^{-1} Pi) < 1.
    const LyapunovSchurSolver lyap(sys.A());
    X = lyap.solve(BBt);
    if (sys.m() > 0) {
      double prev = std::numeric_limits<double>::infinity();
      double best = prev;
      int rises = 0;
      for (int it = 0; it < opts.max_refinement_steps; ++it) {
        const MatrixXd R = residual(sys, X);
        const double rel = R.norm() / scale;
        if (!std::isfinite(rel)) throw SolveError("direct_solve: refinement produced non-finite iterates");
        if (rel <= 0.3 * opts.residual_tol) break;
        best = std::min(best, rel);
        rises = (rel > prev) ? rises + 1 : 0;
        if (rises >= 5 && rel > 10.0 * best)
          throw SolveError("direct_solve: refinement diverged; contraction factor is likely >= 1");
        prev = rel;
        X = symmetrize(X + lyap.solve(R));
      }
    }
    X = symmetrize(X);
  }

  const double rel = residual(sys, X).norm() / scale;
  if (!std::isfinite(rel) || rel > opts.residual_tol)
    throw SolveError("direct_solve: relative residual " + std::to_string(rel) +
                     " misses the tolerance; the Kronecker operator may be singular or "
                     "the contraction factor >= 1");
  return X;
}

double check_contraction(const BilinearSystem& sys, const ContractionOptions& opts) {
  const Index n = sys.n();
  if (sys.m() == 0) return 0.0;

  using Mode = ContractionOptions::Mode;
  Mode mode = opts.mode;
  if (mode == Mode::automatic) mode = (n <= opts.dense_cap) ? Mode::dense : Mode::iterative;

  if (mode == Mode::dense) {
    MatrixXd L = kron_lyap_matrix(sys);
    const MatrixXd P = kron_pi_matrix(sys);
    Eigen::PartialPivLU<MatrixXd> lu(std::move(L));
    const MatrixXd T = lu.solve(P);
    if (!T.allFinite()) throw SolveError("check_contraction: Kronecker Lyapunov matrix is singular");
    Eigen::EigenSolver<MatrixXd> es(T, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }

  if (sys.symmetric()) {
    // rho(L^{-1} Pi) equals the largest eigenvalue of the congruent PSD
    // operator (-L)^{-1/2} Pi (-L)^{-1/2}, evaluated in the eigenbasis of A.
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sys.A());
    const VectorXd lam = es.eigenvalues();
    if (lam.maxCoeff() >= 0.0)
      throw SolveError("check_contraction: A is not negative definite; L is not invertible this way");
    const MatrixXd& Q = es.eigenvectors();
    MatrixXd W(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) W(i, j) = 1.0 / std::sqrt(-(lam[i] + lam[j]));
    auto half_inverse = [&](const MatrixXd& X) -> MatrixXd {
      return Q * ((Q.transpose() * X * Q).cwiseProduct(W)) * Q.transpose();
    };
    auto apply = [&](const VectorXd& x) -> VectorXd {
      const MatrixXd X = unvec(x, n);
      return vec(half_inverse(apply_pi(sys, half_inverse(X))));
    };
    const LanczosResult lr =
        lanczos_extreme(apply, n * n, 1, opts.tol, opts.seed, opts.krylov_dim, opts.max_restarts);
    if (lr.values.size() == 0) throw SolveError("check_contraction: Lanczos produced no Ritz value");
    return std::abs(lr.values[0]);
  }

  // General case: Arnoldi on X -> L^{-1}(Pi(X)).
  const LyapunovSchurSolver lyap(sys.A());
  auto apply = [&](const VectorXd& x) -> VectorXd {
    const MatrixXd X = unvec(x, n);
    return vec(-lyap.solve(apply_pi(sys, X)));
  };
  const Index dim = n * n;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  VectorXd start(dim);
  for (Index i = 0; i < dim; ++i) start[i] = gauss(rng);
  start.normalize();

  double estimate = 0.0;
  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    const int kmax = static_cast<int>(std::min<Index>(opts.krylov_dim, dim));
    std::vector<VectorXd> V;
    V.reserve(kmax);
    MatrixXd H = MatrixXd::Zero(kmax + 1, kmax);
    V.push_back(start);
    int k = 0;
    bool invariant = false;
    for (int j = 0; j < kmax; ++j) {
      VectorXd w = apply(V[j]);
      for (int i = 0; i <= j; ++i) {
        const double h = V[i].dot(w);
        H(i, j) = h;
        w -= h * V[i];
      }
      for (int i = 0; i <= j; ++i) {  // one refinement pass
        const double h = V[i].dot(w);
        H(i, j) += h;
        w -= h * V[i];
      }
      H(j + 1, j) = w.norm();
      k = j + 1;
      if (H(j + 1, j) <= 1e-14) {
        invariant = true;
        break;
      }
      V.push_back(w / H(j + 1, j));
    }
    Eigen::EigenSolver<MatrixXd> es(H.topLeftCorner(k, k));
    Index which = 0;
    es.eigenvalues().cwiseAbs().maxCoeff(&which);
    estimate = std::abs(es.eigenvalues()[which]);
    if (invariant) return estimate;
    const double resid = H(k, k - 1) * std::abs(es.eigenvectors()(k - 1, which));
    if (resid <= opts.tol * std::max(estimate, 1e-300)) return estimate;
    // Restart from the dominant Ritz vector.
    Eigen::VectorXcd y = es.eigenvectors().col(which);
    VectorXd next = VectorXd::Zero(dim);
    for (int i = 0; i < k; ++i) next += y[i].real() * V[i];
    if (next.norm() <= 1e-14)
      for (int i = 0; i < k; ++i) next += y[i].imag() * V[i];
    start = next.normalized();
  }
  return estimate;
}

double h2_norm_squared(const BilinearSystem& sys, double cross_check_rel_tol,
                       const DirectSolveOptions& opts) {
  const MatrixXd P = direct_solve(sys, opts);
  const MatrixXd Q = direct_solve(sys.transposed(), opts);
  const MatrixXd C = sys.output_matrix();
  const double from_p = (C * P * C.transpose()).trace();
  const double from_q = (sys.B().transpose() * Q * sys.B()).trace();
  const double denom = std::max({std::abs(from_p), std::abs(from_q), 1e-300});
  if (std::abs(from_p - from_q) > cross_check_rel_tol * denom)
    throw SolveError("h2_norm_squared: controllability and observability forms disagree");
  return from_q;
}

MatrixXd dominant_left_singular_vectors(const MatrixXd& R, int count) {
  const int take = static_cast<int>(std::min<Index>(count, std::min(R.rows(), R.cols())));
  Eigen::BDCSVD<MatrixXd> svd(R, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(take);
}

MatrixXd dominant_left_singular_vectors(const LowRankFactorization& R, int count) {
  const Index n = R.rows(), k = R.rank_bound();
  if (k == 0) return MatrixXd(n, 0);
  Eigen::HouseholderQR<MatrixXd> qr(R.Z);
  const Index q = std::min(n, k);
  const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, q);
  const MatrixXd S = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(S * R.D * S.transpose()));
  std::vector<Index> order(q);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
  });
  const Index take = std::min<Index>(count, q);
  MatrixXd U(n, take);
  for (Index t = 0; t < take; ++t) U.col(t) = Q * es.eigenvectors().col(order[t]);
  return U;
}

MatrixXd dominant_left_singular_vectors(const std::function<VectorXd(const VectorXd&)>& apply,
                                        Eigen::Index n, int count, double tol, unsigned seed) {
  const LanczosResult lr =
      lanczos_extreme(apply, n, count, tol, seed, static_cast<int>(std::min<Index>(n, 200)), 6);
  if (!lr.converged)
    throw SolveError("dominant_left_singular_vectors: Lanczos did not meet the residual tolerance");
  return lr.vectors;
}

SingularProfile singular_value_profile(const MatrixXd& X) {
  const Index n = X.rows();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(X), Eigen::EigenvaluesOnly);
  VectorXd sigma = es.eigenvalues().cwiseAbs();
  std::sort(sigma.data(), sigma.data() + n, std::greater<double>());
  SingularProfile out;
  out.sigma = sigma;
  out.tail = VectorXd::Zero(n + 1);
  double acc = 0.0;
  for (Index k = n; k-- > 0;) {
    acc += sigma[k] * sigma[k];
    out.tail[k] = std::sqrt(acc);
  }
  const double total = floor_norm(out.tail[0]);
  for (Index k = 0; k <= n; ++k) out.tail[k] /= total;
  return out;
}

}  // namespace bilyap
