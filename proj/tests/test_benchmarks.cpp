#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "bilyap/als.hpp"
#include "bilyap/benchmarks.hpp"
#include "bilyap/core_operators.hpp"
#include "bilyap/fixed_point.hpp"
#include "bilyap/rk_subspace.hpp"
#include "test_helpers.hpp"

using namespace bilyap;

namespace {

double min_eig(const MatrixXd& S) {
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (S + S.transpose()))
      .eigenvalues()
      .minCoeff();
}

// The potential gradient the drift is sampled from, restated for the tests.
double ground_gradient(double x) {
  const double x2 = x * x;
  return (((3.0 * x2 - 60.0) * x2 + 398.0) * x + 28.0) / 200.0;
}

}  // namespace

TEST_SUITE_BEGIN("benchmarks");

TEST_CASE("heat system: dimensions, exact symmetry, and boundary support") {
  for (const int nx : {4, 8, 16}) {
    CAPTURE(nx);
    const BilinearSystem sys = heat2d(nx);
    CHECK(sys.n() == nx * nx);
    CHECK(sys.m() == 1);
    CHECK(sys.r() == 1);
    CHECK(sys.symmetric());
    CHECK(sys.has_output());
    CHECK(relative_asymmetry(sys.A()) == 0.0);
    CHECK(relative_asymmetry(sys.N(0)) == 0.0);

    // The control enters through the x = 0 boundary nodes only: one diagonal
    // entry of N and one entry of B per horizontal grid line, value nx/2.
    MatrixXd N = sys.N(0);
    MatrixXd B = sys.B();
    for (int j = 0; j < nx; ++j) {
      const Eigen::Index at = static_cast<Eigen::Index>(j) * nx;
      CHECK(N(at, at) == doctest::Approx(0.5 * nx).epsilon(1e-14));
      CHECK(B(at, 0) == doctest::Approx(-0.5 * nx).epsilon(1e-14));
      N(at, at) = 0.0;
      B(at, 0) = 0.0;
    }
    CHECK(N.norm() == 0.0);
    CHECK(B.norm() == 0.0);
  }
  CHECK_THROWS_AS(heat2d(2), std::invalid_argument);
}

TEST_CASE("heat system: the conduction operator is negative definite") {
  for (const int nx : {4, 8, 16}) {
    CAPTURE(nx);
    const BilinearSystem sys = heat2d(nx);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> es(sys.A(), Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().maxCoeff() < -1.0);
  }
}

TEST_CASE("heat system: the fixed-point operator contracts") {
  const double rho = check_contraction(heat2d(8));
  CHECK(rho > 0.0);
  CHECK(rho < 1.0);
}

TEST_CASE("density system: raw operator conserves mass with nonnegative couplings") {
  const FokkerPlanckParts parts = fokker_planck_parts(60);
  const int n = 60;
  const double h = 12.0 / n;

  const double a_scale = parts.A_raw.cwiseAbs().maxCoeff();
  CHECK(parts.A_raw.colwise().sum().cwiseAbs().maxCoeff() <= 1e-12 * a_scale);
  CHECK(parts.N_raw.colwise().sum().cwiseAbs().maxCoeff() <= 1e-12 * a_scale);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) {
        CHECK(parts.A_raw(i, j) >= 0.0);
        CHECK(parts.N_raw(i, j) >= 0.0);
      }
    }
  }

  // The control drift has constant positive gradient 1/6, so its operator is
  // the plain upwind transport chain: superdiagonal 1/(6h), matching diagonal.
  const double c = 1.0 / (6.0 * h);
  CHECK(parts.N_raw(0, 1) == doctest::Approx(c).epsilon(1e-14));
  CHECK(parts.N_raw(0, 0) == 0.0);
  CHECK(parts.N_raw(n - 1, n - 1) == doctest::Approx(-c).epsilon(1e-14));
  CHECK(parts.N_raw(1, 1) == doctest::Approx(-c).epsilon(1e-14));
}

TEST_CASE("density system: stationary density solves the zero-flux recurrence") {
  const int n = 60;
  const double nu = 1.0;
  const FokkerPlanckParts parts = fokker_planck_parts(n, nu);

  CHECK(parts.stationary.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(parts.stationary.maxCoeff() > 0.0);
  CHECK(parts.stationary.minCoeff() >= -1e-12 * parts.stationary.maxCoeff());

  // In one dimension the stationary state carries zero flux through every
  // interior face, which fixes each neighbor ratio in closed form:
  //   W' > 0 (right cell upwind):  rho_{f+1} = rho_f / (1 + W' h / nu)
  //   W' < 0 (left cell upwind):   rho_{f+1} = rho_f (1 - W' h / nu).
  const double h = 12.0 / n;
  VectorXd chain(n);
  chain(0) = 1.0;
  for (int f = 0; f + 1 < n; ++f) {
    const double w = ground_gradient(-6.0 + (f + 1) * h);
    chain(f + 1) = w > 0.0 ? chain(f) / (1.0 + w * h / nu) : chain(f) * (1.0 - w * h / nu);
  }
  chain /= chain.sum();
  CHECK((chain - parts.stationary).norm() <= 1e-8 * chain.norm());
}

TEST_CASE("density system: one zero mode, removed exactly by the reduction") {
  const int n = 60;
  const FokkerPlanckParts parts = fokker_planck_parts(n);

  const Eigen::EigenSolver<MatrixXd> raw(parts.A_raw, /*computeEigenvectors=*/false);
  int near_zero = 0;
  double next_real = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lam = raw.eigenvalues()(i);
    if (std::abs(lam) <= 1e-8) {
      ++near_zero;
    } else {
      next_real = std::max(next_real, lam.real());
    }
  }
  CHECK(near_zero == 1);
  CHECK(next_real < -1e-3);

  const BilinearSystem& red = parts.reduced;
  CHECK(red.n() == n - 1);
  CHECK_FALSE(red.symmetric());
  CHECK(red.has_output());
  CHECK((red.output_matrix() - red.B().transpose()).norm() == 0.0);
  CHECK(spectral_abscissa(red.A()) < -1e-3);

  // The mass-zero subspace is invariant, so the reduction is a spectral split:
  // every reduced eigenvalue must reappear among the raw nonzero eigenvalues.
  const Eigen::EigenSolver<MatrixXd> proj(red.A(), /*computeEigenvectors=*/false);
  for (Eigen::Index i = 0; i < red.n(); ++i) {
    const std::complex<double> lam = proj.eigenvalues()(i);
    double best = 1e300;
    for (Eigen::Index j = 0; j < n; ++j) {
      best = std::min(best, std::abs(lam - raw.eigenvalues()(j)));
    }
    CHECK(best <= 1e-6 * (1.0 + std::abs(lam)));
  }
}

TEST_CASE("density system: input column survives the projection at full norm") {
  const FokkerPlanckParts parts = fokker_planck_parts(48, 0.5);
  const VectorXd b_raw = parts.N_raw * parts.stationary;
  // b_raw has zero total mass (its entries telescope), so projecting onto the
  // mass-zero complement loses nothing.
  CHECK(std::abs(b_raw.sum()) <= 1e-12 * b_raw.cwiseAbs().maxCoeff());
  CHECK(parts.reduced.B().norm() == doctest::Approx(b_raw.norm()).epsilon(1e-12));

  // The one-argument generator returns exactly the reduced part.
  const BilinearSystem direct = fokker_planck_1d(48, 0.5);
  CHECK((direct.A() - parts.reduced.A()).norm() == 0.0);
  CHECK((direct.B() - parts.reduced.B()).norm() == 0.0);

  CHECK_THROWS_AS(fokker_planck_1d(9), std::invalid_argument);
  CHECK_THROWS_AS(fokker_planck_1d(60, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fokker_planck_1d(60, -1.0), std::invalid_argument);
}

TEST_CASE("advection system: dimensions and block structure") {
  const int g = 10;
  const double nu = 0.1;
  const double alpha = 0.25;
  const BilinearSystem sys = burgers_carleman(g, nu, alpha);
  const double h = 1.0 / (g + 1);

  CHECK(sys.n() == g + g * g);
  CHECK(burgers_carleman(5).n() == 30);
  CHECK(sys.m() == 1);
  CHECK(sys.r() == 1);
  CHECK_FALSE(sys.symmetric());
  CHECK(sys.has_output());
  CHECK((sys.output_matrix() - sys.B().transpose()).norm() == 0.0);

  // Block triangular drift: the first-order block never feeds back from the
  // lifted block, and the first-order row is the familiar diffusion stencil.
  CHECK(sys.A().block(g, 0, g * g, g).norm() == 0.0);
  CHECK(sys.A()(0, 0) == doctest::Approx(-2.0 * nu / (h * h)).epsilon(1e-14));
  CHECK(sys.A()(0, 1) == doctest::Approx(nu / (h * h)).epsilon(1e-14));
  CHECK(sys.A()(1, 0) == doctest::Approx(nu / (h * h)).epsilon(1e-14));

  // The control touches the lifted block but not the reverse coupling.
  CHECK(sys.N(0).block(0, g, g, g * g).norm() == 0.0);
  CHECK(sys.N(0)(0, 0) == doctest::Approx(alpha / (2.0 * h)).epsilon(1e-14));

  // B carries the boundary forcing in its single first-order entry.
  CHECK(sys.B()(0, 0) == doctest::Approx(alpha * nu / (h * h)).epsilon(1e-14));
  CHECK(sys.B().col(0).tail(sys.n() - 1).norm() == 0.0);

  CHECK_THROWS_AS(burgers_carleman(4), std::invalid_argument);
  CHECK_THROWS_AS(burgers_carleman(10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(burgers_carleman(10, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("advection system: lifted derivative matches the discretized pde") {
  const int g = 9;
  const double nu = 0.1;
  const double alpha = 0.25;
  const double h = 1.0 / (g + 1);
  const BilinearSystem sys = burgers_carleman(g, nu, alpha);

  std::mt19937_64 rng(1101);
  const VectorXd w = th::randn(rng, g, 1);
  const double u = 0.8;
  const double v = alpha * u;  // scaling N and B by alpha rescales the input

  VectorXd x(g + g * g);
  x.head(g) = w;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) x(g + i * g + j) = w(i) * w(j);
  }
  const VectorXd lifted = sys.A() * x + u * (sys.N(0) * x) + sys.B() * u;

  // First-principles right-hand side on the grid, split into the part that is
  // linear in (w, v) and the pure quadratic advection part.
  auto at = [&](int i) -> double {  // w_i with boundary values folded in
    if (i == 0) return v;
    if (i == g + 1) return 0.0;
    return w(i - 1);
  };
  VectorXd lin(g), quad(g);
  for (int i = 1; i <= g; ++i) {
    lin(i - 1) = nu * (at(i - 1) - 2.0 * at(i) + at(i + 1)) / (h * h);
    if (i == 1) lin(0) += v * w(0) / (2.0 * h);  // the u-side of -w_1(w_2 - u)/2h
    const double right = i + 1 <= g ? w(i) : 0.0;
    const double left = i - 1 >= 1 ? w(i - 2) : 0.0;
    quad(i - 1) = -w(i - 1) * (right - left) / (2.0 * h);
  }
  const double scale = lifted.norm();

  // First-order block: kept exactly, quadratic part included.
  CHECK((lifted.head(g) - (lin + quad)).norm() <= 1e-13 * scale);

  // Lifted block: d/dt (w x w) with only the linear part of the derivative on
  // both sides -- the dropped remainder quad (x) w + w (x) quad is order three.
  VectorXd kept(g * g);
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      kept(i * g + j) = lin(i) * w(j) + w(i) * lin(j);
    }
  }
  CHECK((lifted.tail(g * g) - kept).norm() <= 1e-13 * scale);
}

TEST_CASE("advection system: stable drift, control path scales with alpha") {
  for (const int g : {10, 20}) {
    CAPTURE(g);
    CHECK(spectral_abscissa(burgers_carleman(g, 0.1, 0.25).A()) < 0.0);
  }
  const BilinearSystem base = burgers_carleman(8, 0.1, 0.25);
  const BilinearSystem twice = burgers_carleman(8, 0.1, 0.5);
  CHECK((base.A() - twice.A()).norm() == 0.0);
  CHECK((2.0 * base.N(0) - twice.N(0)).norm() <= 1e-14 * twice.N(0).norm());
  CHECK((2.0 * base.B() - twice.B()).norm() <= 1e-14 * twice.B().norm());
}

TEST_CASE("all three benchmarks contract at desk resolutions") {
  const double heat = check_contraction(heat2d(20));
  CHECK(heat > 0.0);
  CHECK(heat < 1.0);
  const double density = check_contraction(fokker_planck_1d(200));
  CHECK(density > 0.0);
  CHECK(density < 1.0);
  const double advection = check_contraction(burgers_carleman(15));
  CHECK(advection > 0.0);
  CHECK(advection < 1.0);
}

TEST_CASE("greedy rank-one chain on the heat system keeps its residuals psd") {
  const BilinearSystem sys = heat2d(8);
  AlsConfig cfg;
  cfg.stop_rel_residual = 1e-8;
  // The chain property assumes stationary rank-one pairs, so sweep tightly:
  // at loose sweep tolerances the near-stationarity error shows up as
  // eigenvalue dips of order (residual of the sweep), not of roundoff.
  cfg.tol = 1e-8;
  cfg.max_inner_iters = 200;
  const AlsGreedyResult res = als_greedy(sys, cfg);

  CHECK((res.X.D - MatrixXd::Identity(res.X.D.rows(), res.X.D.cols())).norm() == 0.0);
  const double bb = (sys.B() * sys.B().transpose()).norm();
  double previous = 2.0 * bb;
  for (Eigen::Index k = 0; k <= res.X.Z.cols(); ++k) {
    CAPTURE(k);
    const MatrixXd Xk = res.X.Z.leftCols(k) * res.X.Z.leftCols(k).transpose();
    const MatrixXd Rk = residual(sys, Xk);
    CHECK(relative_asymmetry(Rk) <= 1e-12);
    CHECK(min_eig(Rk) >= -1e-8 * Rk.norm());
    CHECK(Rk.norm() <= previous * (1.0 + 1e-12));
    previous = Rk.norm();
  }
  // Recorded residual column mirrors the recomputation and is non-increasing.
  for (std::size_t i = 1; i < res.report.records.size(); ++i) {
    CHECK(res.report.records[i].rel_residual <=
          res.report.records[i - 1].rel_residual * (1.0 + 1e-12));
  }
}

TEST_CASE("splitting iterates on the heat system increase toward the solution") {
  const BilinearSystem sys = heat2d(8);
  DirectSolveOptions oracle_opts;
  oracle_opts.mode = DirectSolveOptions::Mode::refinement;
  const MatrixXd X = direct_solve(sys, oracle_opts);

  MatrixXd prev = MatrixXd::Zero(sys.n(), sys.n());
  double prev_gap = X.norm();
  const double bb = (sys.B() * sys.B().transpose()).norm();
  for (int k = 1; k <= 10; ++k) {
    CAPTURE(k);
    FixedPointConfig cfg;
    cfg.max_iters = k;
    cfg.stop_tol = 1e-300;
    const MatrixXd Xk = fixed_point_solve(sys, cfg).X;

    // The residual decays geometrically while the roundoff of evaluating it
    // stays at the scale of the terms that form it, so psd holds down to that
    // absolute floor rather than relative to the shrinking ||R_k||.
    const MatrixXd Rk = residual(sys, Xk);
    const double eval_floor = 1e-12 * (sys.A().norm() * Xk.norm() + bb);
    CHECK(min_eig(Xk) >= -1e-10 * Xk.norm());         // iterate psd
    CHECK(min_eig(Rk) >= -eval_floor);                // residual psd
    CHECK(min_eig(Xk - prev) >= -1e-12 * Xk.norm());  // monotone up
    CHECK(min_eig(X - Xk) >= -1e-8 * X.norm());       // below the solution
    const double gap = (X - Xk).norm();
    CHECK(gap <= prev_gap * (1.0 + 1e-12));
    prev = Xk;
    prev_gap = gap;
  }
}

TEST_CASE("greedy shifted solves reach 1e-6 on the heat system within 30 dims") {
  const BilinearSystem sys = heat2d(8);
  RkConfig cfg;
  cfg.stop_tol = 1e-6;
  cfg.max_dim = 30;
  const RkResult res = rk_solve(sys, variant('A'), cfg);
  CHECK(res.report.status == SolveStatus::converged);
  CHECK(res.report.records.back().rel_residual <= 1e-6);
  CHECK(res.report.records.back().dim <= 30);
}

TEST_SUITE_END();
