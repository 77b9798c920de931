#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "bilyap/core_operators.hpp"
#include "bilyap/random_instance.hpp"
#include "test_helpers.hpp"

using namespace bilyap;

TEST_SUITE_BEGIN("random_instance");

TEST_CASE("same seed reproduces the instance, different seeds differ") {
  RandomInstanceOptions o;
  o.n = 11;
  o.m = 2;
  o.r = 2;
  const BilinearSystem a = random_instance(7, o);
  const BilinearSystem b = random_instance(7, o);
  const BilinearSystem c = random_instance(8, o);
  CHECK((a.A() - b.A()).norm() == 0.0);
  CHECK((a.N(0) - b.N(0)).norm() == 0.0);
  CHECK((a.N(1) - b.N(1)).norm() == 0.0);
  CHECK((a.B() - b.B()).norm() == 0.0);
  CHECK((a.A() - c.A()).norm() > 0.0);
  CHECK((a.B() - c.B()).norm() > 0.0);
}

TEST_CASE("the coupling is scaled to the requested contraction factor") {
  for (const bool symmetric : {false, true}) {
    CAPTURE(symmetric);
    RandomInstanceOptions o;
    o.n = 13;
    o.m = symmetric ? 1 : 2;
    o.symmetric = symmetric;
    o.target_rho = symmetric ? 0.35 : 0.6;
    const BilinearSystem sys = random_instance(31, o);
    // Independent dense Kronecker evaluation of the contraction factor.
    CHECK(th::dense_rho(sys.A(), sys.N_list()) ==
          doctest::Approx(o.target_rho).epsilon(1e-6));
  }
}

TEST_CASE("stability margin and symmetry declarations are honored") {
  RandomInstanceOptions o;
  o.n = 12;
  o.margin = 1.5;
  const BilinearSystem sys = random_instance(5, o);
  CHECK(th::abscissa(sys.A()) <= -1.5 + 1e-9);
  CHECK_FALSE(sys.symmetric());

  o.symmetric = true;
  const BilinearSystem sym = random_instance(5, o);
  CHECK(sym.symmetric());
  CHECK(relative_asymmetry(sym.A()) == 0.0);
  CHECK(relative_asymmetry(sym.N(0)) == 0.0);
  CHECK(th::abscissa(sym.A()) <= -1.5 + 1e-9);
  CHECK(sym.has_output());  // symmetric systems default their output to B^T
}

TEST_CASE("outputs attach a random C on non-symmetric instances only") {
  RandomInstanceOptions o;
  o.n = 9;
  o.outputs = 3;
  const BilinearSystem sys = random_instance(12, o);
  CHECK(sys.has_output());
  CHECK(sys.output_matrix().rows() == 3);
  CHECK(sys.output_matrix().cols() == 9);

  o.symmetric = true;
  const BilinearSystem sym = random_instance(12, o);
  CHECK((sym.output_matrix() - sym.B().transpose()).norm() == 0.0);
}

TEST_CASE("a linear draw has no coupling and zero contraction factor") {
  RandomInstanceOptions o;
  o.n = 8;
  o.m = 0;
  const BilinearSystem sys = random_instance(3, o);
  CHECK(sys.m() == 0);
  CHECK(check_contraction(sys) == 0.0);
}

TEST_CASE("invalid options are rejected") {
  RandomInstanceOptions o;
  o.n = 0;
  CHECK_THROWS_AS(random_instance(1, o), std::invalid_argument);
  o.n = 8;
  o.r = 0;
  CHECK_THROWS_AS(random_instance(1, o), std::invalid_argument);
  o.r = 1;
  o.target_rho = 1.0;
  CHECK_THROWS_AS(random_instance(1, o), std::invalid_argument);
  o.target_rho = 0.0;
  CHECK_THROWS_AS(random_instance(1, o), std::invalid_argument);
  o.target_rho = 0.5;
  o.margin = 0.0;
  CHECK_THROWS_AS(random_instance(1, o), std::invalid_argument);
  CHECK_THROWS_AS(random_stable_matrix(1, 0), std::invalid_argument);

  // target_rho is irrelevant without coupling blocks.
  RandomInstanceOptions lin;
  lin.n = 6;
  lin.m = 0;
  lin.target_rho = 7.0;
  CHECK(random_instance(2, lin).m() == 0);
}

TEST_SUITE_END();
