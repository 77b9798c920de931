#include "test_helpers.hpp"

#include <bilyap/core_operators.hpp>
#include <bilyap/galerkin.hpp>

#include <doctest.h>

using bilyap::BilinearSystem;
using bilyap::GalerkinResidual;
using bilyap::GalerkinSolution;
using bilyap::MatrixXd;

TEST_SUITE("galerkin") {

TEST_CASE("projection computes the compressed blocks") {
  const BilinearSystem sys = th::random_contractive(71, {.n = 10, .m = 2, .r = 2, .outputs = 3});
  std::mt19937_64 rng(72);
  const MatrixXd V = bilyap::orthonormalize(th::randn(rng, 10, 4)).V;
  const BilinearSystem proj = bilyap::project(sys, V);
  REQUIRE(proj.n() == 4);
  REQUIRE(proj.m() == 2);
  REQUIRE(proj.r() == 2);
  CHECK((proj.A() - V.transpose() * sys.A() * V).norm() <= 1e-14 * proj.A().norm());
  CHECK((proj.N(1) - V.transpose() * sys.N(1) * V).norm() <= 1e-14 * proj.N(1).norm());
  CHECK((proj.B() - V.transpose() * sys.B()).norm() <= 1e-14 * proj.B().norm());
  CHECK((proj.output_matrix() - sys.output_matrix() * V).norm() <= 1e-14);

  const BilinearSystem sym = th::random_contractive(73, {.n = 8, .m = 1, .symmetric = true});
  const MatrixXd Vs = bilyap::orthonormalize(th::randn(rng, 8, 3)).V;
  CHECK(bilyap::project(sym, Vs).symmetric());
}

TEST_CASE("projected residual vanishes and the factored residual is exact") {
  const BilinearSystem sys = th::random_contractive(74, {.n = 14, .m = 2, .r = 2});
  std::mt19937_64 rng(75);
  const GalerkinSolution sol = bilyap::galerkin_solve(sys, th::randn(rng, 14, 5));
  const MatrixXd X = sol.to_dense();
  const MatrixXd R = bilyap::residual(sys, X);
  const double scale = (sys.B() * sys.B().transpose()).norm();

  // Defining property of the Galerkin solution.
  CHECK((sol.basis.V.transpose() * R * sol.basis.V).norm() <= 1e-10 * scale);

  const GalerkinResidual gr = bilyap::galerkin_residual(sys, sol);
  CHECK((gr.factored.to_dense() - R).norm() <= 1e-12 * R.norm());
  CHECK(gr.frobenius == doctest::Approx(R.norm()).epsilon(1e-10));
  CHECK(gr.relative == doctest::Approx(bilyap::relative_residual(sys, X)).epsilon(1e-10));
  CHECK(gr.factored.rows() == 14);
}

TEST_CASE("full-space projection reproduces the direct solution") {
  const BilinearSystem sys = th::random_contractive(76, {.n = 9, .m = 1});
  std::mt19937_64 rng(77);
  const GalerkinSolution sol = bilyap::galerkin_solve(sys, th::randn(rng, 9, 9));
  REQUIRE(sol.basis.dim() == 9);
  const MatrixXd X = bilyap::direct_solve(sys);
  CHECK((sol.to_dense() - X).norm() <= 1e-8 * X.norm());
  CHECK(bilyap::relative_residual(sys, sol.to_dense()) <= 1e-9);
}

TEST_CASE("degenerate inputs are rejected") {
  const BilinearSystem sys = th::random_contractive(78, {.n = 6, .m = 1});
  CHECK_THROWS_AS(bilyap::galerkin_solve(sys, MatrixXd::Zero(6, 2)), std::invalid_argument);
  CHECK_THROWS_AS(bilyap::project(sys, MatrixXd::Zero(5, 2)), std::invalid_argument);
}

}  // TEST_SUITE
