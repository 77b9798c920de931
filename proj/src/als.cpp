#include "bilyap/als.hpp"

#include <Eigen/Dense>

#include "bilyap/galerkin.hpp"
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace bilyap {

namespace {

bool all_finite(const VectorXd& x) { return x.allFinite(); }

// Shifted operator A + theta I + sum_i eta_i N_i built from the unit vector u.
MatrixXd shifted_operator(const BilinearSystem& sys, const VectorXd& u) {
  MatrixXd S = sys.A();
  const double theta = u.dot(sys.A() * u);
  S.diagonal().array() += theta;
  for (int i = 0; i < sys.m(); ++i) S += u.dot(sys.N(i) * u) * sys.N(i);
  return S;
}

// Solve S x = rhs and insist the solve actually succeeded: the shifted
// operators can be singular when a Rayleigh shift hits the spectrum.
VectorXd checked_solve(const MatrixXd& S, const VectorXd& rhs) {
  VectorXd x = S.partialPivLu().solve(rhs);
  const double scale = rhs.norm();
  if (!all_finite(x) || (S * x - rhs).norm() > 1e-8 * std::max(scale, 1e-300))
    throw SolveError("als: shifted operator is singular");
  return x;
}

double elapsed_ms(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

double als_metric(const BilinearSystem& sys, const VectorXd& v, const VectorXd& w) {
  const double nv = v.squaredNorm(), nw = w.squaredNorm();
  if (nv == 0.0 || nw == 0.0) return report_nan();
  return 0.5 * (v.dot(sys.A() * v) / nv + w.dot(sys.A() * w) / nw);
}

double als_objective(const BilinearSystem& sys, const MatrixXd& R, const VectorXd& v,
                     const VectorXd& w) {
  const MatrixXd U = v * w.transpose();
  return m_inner(sys, U, U) - 2.0 * v.dot(R * w);
}

AlsResult als_rank1(const BilinearSystem& sys, const MatrixXd& R, const VectorXd& v0,
                    const VectorXd& w0, const AlsConfig& cfg) {
  const int n = sys.n();
  if (R.rows() != n || R.cols() != n || v0.size() != n || w0.size() != n)
    throw std::invalid_argument("als_rank1: dimension mismatch");

  AlsResult out;
  out.v = v0;
  out.w = w0;
  auto degenerate = [&]() {
    out.v = VectorXd::Zero(n);
    out.w = VectorXd::Zero(n);
    out.status = SolveStatus::degenerate;
    return out;
  };
  if (R.norm() == 0.0 || v0.norm() == 0.0 || w0.norm() == 0.0 || !all_finite(v0) ||
      !all_finite(w0))
    return degenerate();

  // With a symmetric system, equal starts, and a symmetric residual the two
  // sweep halves are identical, so the collapsed sweep is the same procedure
  // with half the solves -- and it keeps v = w exact.
  const bool collapse =
      cfg.tie_vw ||
      (!cfg.force_full_sweep && sys.symmetric() && (v0.array() == w0.array()).all() &&
       is_symmetric(R, default_tolerances().symmetry_declare));

  double prev = report_nan();
  out.status = SolveStatus::max_iterations;
  while (true) {
    const double theta = als_metric(sys, out.v, out.w);
    if (!std::isnan(prev)) {
      double change = std::abs(theta - prev);
      if (cfg.relative_change) change /= std::max(std::abs(theta), 1e-300);
      out.final_change = change;
      if (change <= cfg.tol) {
        out.status = SolveStatus::converged;
        break;
      }
    }
    if (out.iterations >= cfg.max_inner_iters) break;
    prev = theta;

    out.w.normalize();
    if (collapse) {
      // Collapsed sweep: one solve, both factors carry the new direction. The
      // unit direction lives in v and the solve's scale in w, so v w^T keeps
      // the magnitude a two-half sweep would produce.
      VectorXd u = checked_solve(shifted_operator(sys, out.w), -(R * out.w));
      if (u.norm() == 0.0) return degenerate();
      out.v = u.normalized();
      out.w = u;
    } else {
      out.v = checked_solve(shifted_operator(sys, out.w), -(R * out.w));
      if (out.v.norm() == 0.0) return degenerate();
      out.v.normalize();
      out.w = checked_solve(shifted_operator(sys, out.v), -(R.transpose() * out.v));
      if (out.w.norm() == 0.0) return degenerate();
    }
    ++out.iterations;
  }

  // Rebalance so ||v|| == ||w|| without changing v w^T.
  const double nv = out.v.norm(), nw = out.w.norm();
  if (nv > 0.0 && nw > 0.0) {
    const double alpha = std::sqrt(nw / nv);
    out.v *= alpha;
    out.w /= alpha;
  }
  return out;
}

AlsGreedyResult als_greedy(const BilinearSystem& sys, const AlsConfig& cfg,
                           const MatrixXd* oracle) {
  const int n = sys.n();
  const auto t0 = std::chrono::steady_clock::now();

  AlsGreedyResult out;
  out.report.method = cfg.subspace_mode ? "als_greedy_subspace" : "als_greedy";
  out.report.status = SolveStatus::max_iterations;

  const MatrixXd BBt = sys.B() * sys.B().transpose();
  const double scale = BBt.norm();
  const double oracle_scale = oracle != nullptr ? std::max(oracle->norm(), 1e-300) : 0.0;

  AlsConfig inner_cfg = cfg;
  inner_cfg.tie_vw = true;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  MatrixXd X = MatrixXd::Zero(n, n);
  MatrixXd Z(n, 0);
  MatrixXd Y(0, 0);
  MatrixXd Rk = BBt;
  int rank = 0;

  while (true) {
    SolveRecord rec;
    rec.dim = rank;
    rec.rel_residual = scale > 0.0 ? Rk.norm() / scale : 0.0;
    if (oracle != nullptr) rec.rel_error = (X - *oracle).norm() / oracle_scale;
    if (cfg.collect_timings) rec.millis = elapsed_ms(t0);
    out.report.records.push_back(rec);

    if (rec.rel_residual <= cfg.stop_rel_residual) {
      out.report.status = SolveStatus::converged;
      break;
    }
    if (rank >= cfg.max_outer_ranks) {
      out.report.status = SolveStatus::max_dimension;
      break;
    }

    VectorXd v0(n);
    if (cfg.random_start) {
      for (int i = 0; i < n; ++i) v0[i] = gauss(rng);
    } else {
      v0 = dominant_left_singular_vectors(Rk, 1).col(0);
    }

    const AlsResult step = als_rank1(sys, Rk, v0, v0, inner_cfg);
    ++out.report.iterations;
    if (step.status == SolveStatus::degenerate) {
      out.report.status = SolveStatus::degenerate;
      break;
    }

    if (cfg.subspace_mode) {
      if (extend_orthonormal(out.basis, step.v).added == 0) {
        out.report.status = SolveStatus::stagnated;
        break;
      }
      Y = solve_projected(sys, out.basis.V);
      X = out.basis.V * Y * out.basis.V.transpose();
      rank = out.basis.dim();
    } else {
      X += step.v * step.w.transpose();
      Z.conservativeResize(n, Z.cols() + 1);
      Z.col(Z.cols() - 1) = step.v;
      ++rank;
    }
    Rk = residual(sys, X);
  }

  if (cfg.subspace_mode) {
    out.X = out.basis.empty()
                ? LowRankFactorization(MatrixXd(n, 0), MatrixXd(0, 0))
                : LowRankFactorization(out.basis.V, Y);
  } else {
    out.X = LowRankFactorization(Z, MatrixXd::Identity(Z.cols(), Z.cols()));
  }
  return out;
}

}  // namespace bilyap
