#include "bilyap/birka.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <random>

#include "bilyap/core_operators.hpp"
#include "bilyap/subspace.hpp"

namespace bilyap {

namespace {

using cd = std::complex<double>;

// Sorted copy for the stopping metric; the natural (conjugate-adjacent) order
// is kept for the solves and realification.
VectorXcd sorted_eigenvalues(VectorXcd v) {
  std::sort(v.data(), v.data() + v.size(), [](const cd& a, const cd& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return v;
}

double relative_eig_change(const VectorXcd& now, const VectorXcd& prev) {
  return (now - prev).norm() / std::max(now.norm(), 1e-300);
}

double condition_number(const Eigen::JacobiSVD<MatrixXcd>& svd) {
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

struct Projected {
  MatrixXd At, Bt, Ct;
  std::vector<MatrixXd> Nt;
  double cond_wv = 0.0;
};

Projected project_pair(const BilinearSystem& sys, const MatrixXd& C, const MatrixXd& V,
                       const MatrixXd& W) {
  const MatrixXd WtV = W.transpose() * V;
  Eigen::JacobiSVD<MatrixXd> svd(WtV);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0 || s(s.size() - 1) <= 1e-14 * s(0))
    throw SolveError("birka: W^T V is singular");
  Projected p;
  p.cond_wv = s(0) / s(s.size() - 1);
  const Eigen::PartialPivLU<MatrixXd> lu(WtV);
  p.At = lu.solve(W.transpose() * (sys.A() * V));
  p.Nt.reserve(sys.m());
  for (int i = 0; i < sys.m(); ++i)
    p.Nt.push_back(lu.solve(W.transpose() * (sys.N(i) * V)));
  p.Bt = lu.solve(W.transpose() * sys.B());
  p.Ct = C * V;
  return p;
}

struct EigenStep {
  VectorXcd lambda;  // natural order, conjugate pairs adjacent
  MatrixXcd R;
  double evec_cond = 1.0;
};

// k = 1 takes Lambda = At and R = I literally, making the transform step an
// exact identity; defectiveness shows up as a numerically singular R.
EigenStep reduced_eigendecomposition(const MatrixXd& At) {
  EigenStep e;
  if (At.rows() == 1) {
    e.lambda = VectorXcd::Constant(1, cd(At(0, 0), 0.0));
    e.R = MatrixXcd::Identity(1, 1);
    return e;
  }
  const Eigen::EigenSolver<MatrixXd> es(At);
  if (es.info() != Eigen::Success)
    throw SolveError("birka: eigendecomposition of the reduced matrix failed");
  e.lambda = es.eigenvalues();
  e.R = es.eigenvectors();
  const Eigen::JacobiSVD<MatrixXcd> svd(e.R);
  e.evec_cond = condition_number(svd);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-13 * s(0))
    throw SolveError("birka: reduced matrix is defective");
  return e;
}

// Real basis with the same span as the columns of Vc: a real eigenvalue keeps
// its (real) column, a conjugate pair contributes (Re, Im) of its first
// column. Eigen marks real eigenvalues with an exact zero imaginary part.
MatrixXd realify_columns(const MatrixXcd& Vc, const VectorXcd& lambda) {
  const Eigen::Index n = Vc.rows(), k = Vc.cols();
  MatrixXd out(n, k);
  Eigen::Index col = 0, j = 0;
  while (j < k) {
    if (lambda(j).imag() == 0.0) {
      out.col(col++) = Vc.col(j).real();
      ++j;
    } else {
      if (j + 1 >= k ||
          std::abs(lambda(j + 1) - std::conj(lambda(j))) > 1e-8 * (1.0 + std::abs(lambda(j))))
        throw SolveError("birka: eigenvalues are not conjugate-adjacent");
      out.col(col++) = Vc.col(j).real();
      out.col(col++) = Vc.col(j).imag();
      j += 2;
    }
  }
  return out;
}

}  // namespace

MatrixXcd gen_sylvester_solve(const MatrixXcd& A, const MatrixXcd& Lambda,
                              const std::vector<MatrixXcd>& N_list,
                              const std::vector<MatrixXcd>& NhatT_list,
                              const MatrixXcd& RHS) {
  const Eigen::Index n = A.rows(), k = Lambda.rows();
  if (A.cols() != n || Lambda.cols() != k || RHS.rows() != n || RHS.cols() != k ||
      N_list.size() != NhatT_list.size())
    throw std::invalid_argument("gen_sylvester_solve: dimension mismatch");
  for (std::size_t i = 0; i < N_list.size(); ++i)
    if (N_list[i].rows() != n || N_list[i].cols() != n || NhatT_list[i].rows() != k ||
        NhatT_list[i].cols() != k)
      throw std::invalid_argument("gen_sylvester_solve: dimension mismatch");
  if (n * k > 4000)
    throw std::invalid_argument(
        "gen_sylvester_solve: coupled system too large for the dense solver");
  if (RHS.norm() == 0.0) return MatrixXcd::Zero(n, k);

  const Eigen::Index nk = n * k;
  MatrixXcd K = MatrixXcd::Zero(nk, nk);
  for (Eigen::Index q = 0; q < k; ++q) {
    K.block(q * n, q * n, n, n) += A;  // I (x) A
    for (Eigen::Index p = 0; p < k; ++p) {
      K.block(p * n, q * n, n, n).diagonal().array() += Lambda(q, p);  // Lambda^T (x) I
      for (std::size_t i = 0; i < N_list.size(); ++i)
        K.block(p * n, q * n, n, n) += NhatT_list[i](q, p) * N_list[i];
    }
  }
  VectorXcd rhs(nk);
  for (Eigen::Index j = 0; j < k; ++j) rhs.segment(j * n, n) = -RHS.col(j);

  const Eigen::PartialPivLU<Eigen::Ref<MatrixXcd>> lu(K);  // in-place
  const VectorXcd x = lu.solve(rhs);
  MatrixXcd V(n, k);
  for (Eigen::Index j = 0; j < k; ++j) V.col(j) = x.segment(j * n, n);

  MatrixXcd res = V * Lambda + A * V + RHS;
  for (std::size_t i = 0; i < N_list.size(); ++i) res += N_list[i] * V * NhatT_list[i];
  if (!V.allFinite() || res.norm() > 1e-9 * RHS.norm())
    throw SolveError(
        "gen_sylvester_solve: singular coupled operator (shift collides with the spectrum)");
  return V;
}

BirkaResult birka(const BilinearSystem& sys, const MatrixXd& V0, const MatrixXd& W0,
                  const BirkaConfig& cfg) {
  const int n = sys.n(), m = sys.m();
  const Eigen::Index k = V0.cols();
  if (V0.rows() != n || W0.rows() != n || W0.cols() != k || k < 1 || k > n)
    throw std::invalid_argument("birka: bad initial basis dimensions");
  const MatrixXd C = sys.output_matrix();

  MatrixXd V = orthonormalize(V0).V, W = orthonormalize(W0).V;
  if (V.cols() != k || W.cols() != k)
    throw std::invalid_argument("birka: rank-deficient initial basis");

  // Symmetric data with equal starts keeps V = W at every rank: the projected
  // model is symmetric with C-tilde = B-tilde^T, its eigenbasis R is
  // orthogonal, and then the V- and W-equations coincide term by term.  The
  // W-solve is skipped so the identity holds exactly in floating point;
  // force_two_sided runs both solves anyway (the spans then agree only up to
  // roundoff accumulated through the eigensolver).
  const bool collapse = !cfg.force_two_sided && sys.symmetric() &&
                        (V0.array() == W0.array()).all() && C == sys.B().transpose();

  // Constant complex casts for the coupled solves.
  const MatrixXcd A_c = sys.A().cast<cd>(), AT_c = sys.A().transpose().cast<cd>();
  const MatrixXcd B_c = sys.B().cast<cd>(), CT_c = C.transpose().cast<cd>();
  std::vector<MatrixXcd> N_c, NT_c;
  for (int i = 0; i < m; ++i) {
    N_c.push_back(sys.N(i).cast<cd>());
    NT_c.push_back(sys.N(i).transpose().cast<cd>());
  }

  BirkaResult out;
  out.status = SolveStatus::max_iterations;
  std::optional<VectorXcd> prev_sorted;
  std::optional<VectorXcd> raw_sorted;  // eigenvalues before the previous orth step

  while (true) {
    const Projected p = project_pair(sys, C, V, W);
    const EigenStep eig = reduced_eigendecomposition(p.At);
    const VectorXcd sorted = sorted_eigenvalues(eig.lambda);

    out.max_cond_wv = std::max(out.max_cond_wv, p.cond_wv);
    out.reduced = BirkaReducedModel{p.At, p.Nt, p.Bt, p.Ct};
    if (cfg.collect_trace) {
      BirkaIterationTrace t;
      t.cond_wv = p.cond_wv;
      t.eig_vector_cond = eig.evec_cond;
      out.trace.push_back(t);
      if (raw_sorted && out.trace.size() >= 2)
        out.trace[out.trace.size() - 2].orth_eig_delta =
            relative_eig_change(sorted, *raw_sorted);
      raw_sorted.reset();
    }

    if (prev_sorted) {
      const double change = relative_eig_change(sorted, *prev_sorted);
      out.final_change = change;
      if (cfg.collect_trace) out.trace.back().eig_change = change;
      if (change <= cfg.tol) {
        out.status = SolveStatus::converged;
        break;
      }
    }
    if (out.iterations >= cfg.max_iters) break;
    prev_sorted = sorted;

    // Re-realize the reduced model in the eigenbasis of the reduced matrix:
    // the similarity x -> R^{-1} x maps (At, Nt, Bt, Ct) to
    // (Lambda, R^{-1} Nt R, R^{-1} Bt, Ct R).  Using the same R^{-1} on B is
    // what makes the solve below span the error-system cross-Gramian block.
    const Eigen::PartialPivLU<MatrixXcd> luR(eig.R);
    const MatrixXcd Bhat = luR.solve(p.Bt.cast<cd>());
    const MatrixXcd Chat = p.Ct.cast<cd>() * eig.R;
    std::vector<MatrixXcd> Nhat, NhatT;
    double tdelta = std::max((Bhat - p.Bt.cast<cd>()).norm(), (Chat - p.Ct.cast<cd>()).norm());
    for (int i = 0; i < m; ++i) {
      Nhat.push_back(luR.solve(p.Nt[i].cast<cd>() * eig.R));
      NhatT.push_back(Nhat.back().transpose());
      tdelta = std::max(tdelta, (Nhat.back() - p.Nt[i].cast<cd>()).norm());
    }
    if (cfg.collect_trace) out.trace.back().transform_delta = tdelta;

    const MatrixXcd LamD = eig.lambda.asDiagonal();
    const MatrixXd V_raw =
        realify_columns(gen_sylvester_solve(A_c, LamD, N_c, NhatT, B_c * Bhat.transpose()),
                        eig.lambda);
    const MatrixXd W_raw =
        collapse ? V_raw
                 : realify_columns(gen_sylvester_solve(AT_c, LamD, NT_c, Nhat, CT_c * Chat),
                                   eig.lambda);

    if (cfg.collect_trace) {
      // Stash pre-orth eigenvalues; the next loop top diffs them against the
      // post-orth ones, exposing the orthonormalization step's (lack of)
      // effect on the iteration.
      try {
        raw_sorted = sorted_eigenvalues(
            reduced_eigendecomposition(project_pair(sys, C, V_raw, W_raw).At).lambda);
      } catch (const SolveError&) {
        raw_sorted.reset();
      }
    }

    const MatrixXd Vn = orthonormalize(V_raw).V, Wn = orthonormalize(W_raw).V;
    if (Vn.cols() < k || Wn.cols() < k) {
      out.status = SolveStatus::degenerate;
      break;
    }
    V = Vn;
    W = Wn;
    ++out.iterations;
  }

  out.V = V;
  out.W = W;
  return out;
}

BirkaResult birka(const BilinearSystem& sys, int k, const BirkaConfig& cfg) {
  if (k < 1 || k > sys.n()) throw std::invalid_argument("birka: bad target dimension");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd V0(sys.n(), k);
  for (Eigen::Index j = 0; j < V0.cols(); ++j)
    for (Eigen::Index i = 0; i < V0.rows(); ++i) V0(i, j) = gauss(rng);
  return birka(sys, V0, V0, cfg);
}

H2ErrorTerms reduced_h2_error_terms(const BilinearSystem& sys, const MatrixXd& V) {
  const int n = sys.n(), m = sys.m();
  const Eigen::Index k = V.cols();
  if (!sys.symmetric())
    throw std::invalid_argument("reduced_h2_error_terms: symmetric system required");
  if (V.rows() != n || k < 1 || k > n)
    throw std::invalid_argument("reduced_h2_error_terms: bad basis dimensions");
  if (orthonormality_defect(V) > 1e-8)
    throw std::invalid_argument("reduced_h2_error_terms: basis must be orthonormal");

  const MatrixXd X = direct_solve(sys);

  // Galerkin-reduced symmetric model on V.
  const MatrixXd Ah = symmetrize(V.transpose() * sys.A() * V);
  std::vector<MatrixXd> Nh;
  for (int i = 0; i < m; ++i) Nh.push_back(symmetrize(V.transpose() * sys.N(i) * V));
  const MatrixXd Bh = V.transpose() * sys.B();
  const BilinearSystem rsys(Ah, Nh, Bh, std::nullopt, true);
  const MatrixXd Xh = direct_solve(rsys);

  H2ErrorTerms t{};
  const MatrixXd E = X - V * Xh * V.transpose();
  t.m_norm_error_sq = m_inner(sys, E, E);
  t.h2_full_sq = (sys.B().transpose() * X * sys.B()).trace();
  t.h2_reduced_sq = (Bh.transpose() * Xh * Bh).trace();

  // Squared output-error norm through the stacked error-system Gramian; the
  // trace is taken directly so cancellation on tiny errors cannot trip a
  // relative cross-check.
  const Eigen::Index ne = n + k;
  MatrixXd Ae = MatrixXd::Zero(ne, ne), Be(ne, sys.r());
  Ae.topLeftCorner(n, n) = sys.A();
  Ae.bottomRightCorner(k, k) = Ah;
  Be.topRows(n) = sys.B();
  Be.bottomRows(k) = Bh;
  std::vector<MatrixXd> Ne;
  for (int i = 0; i < m; ++i) {
    MatrixXd Ni = MatrixXd::Zero(ne, ne);
    Ni.topLeftCorner(n, n) = sys.N(i);
    Ni.bottomRightCorner(k, k) = Nh[i];
    Ne.push_back(std::move(Ni));
  }
  MatrixXd Ce(sys.r(), ne);
  Ce.leftCols(n) = sys.B().transpose();
  Ce.rightCols(k) = -Bh.transpose();
  const BilinearSystem esys(Ae, Ne, Be, Ce, true);
  const MatrixXd Pe = direct_solve(esys);
  t.h2_error_system_sq = (Ce * Pe * Ce.transpose()).trace();
  return t;
}

}  // namespace bilyap
