#pragma once

// Seeded random problem instances with a prescribed contraction factor, used
// by the verification suite and the experiment harness. Deterministic in the
// seed for a fixed standard library.

#include "bilyap/types.hpp"

#include <random>

namespace bilyap {

struct RandomInstanceOptions {
  int n = 10;
  int m = 1;        // bilinear coupling terms
  int r = 1;        // input columns
  int outputs = 0;  // rows of a random output map (non-symmetric systems only)
  bool symmetric = false;
  double target_rho = 0.5;  // contraction factor of the fixed-point operator
  double margin = 0.5;      // spectral abscissa of A is pushed to -margin or lower
};

// Gaussian matrix, filled column-major from the engine.
MatrixXd random_gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols);

// Stable matrix: a scaled Gaussian draw shifted so its spectral abscissa is
// exactly -margin (symmetric variant: a negated Gram matrix, margin-shifted).
MatrixXd random_stable_matrix(unsigned seed, int n, double margin = 0.5);

// A is stable (symmetric negative definite when requested), the N blocks are
// rescaled so the contraction factor of X -> -L^{-1} Pi(X) equals target_rho
// (Pi is quadratic in N, so scaling the blocks by sqrt(target/initial) lands
// exactly on the target), B is Gaussian, and an optional Gaussian C is
// attached. Throws std::invalid_argument on bad sizes or target_rho outside
// (0, 1), and SolveError if the drawn coupling cannot be scaled.
BilinearSystem random_instance(unsigned seed, const RandomInstanceOptions& opts = {});

}  // namespace bilyap
