#pragma once

// Generators for three PDE-derived bilinear test systems at configurable
// resolution: a 2-D heat equation with a bilinear Robin boundary control, a
// 1-D Fokker-Planck equation with an optical-tweezer control, and a
// Carleman-bilinearized viscous Burgers equation with boundary control.

#include "bilyap/types.hpp"

namespace bilyap {

// Heat equation on the unit square with homogeneous Dirichlet conditions on
// three sides and the bilinear Robin condition
//   -d/dx w(0,y,t) = 0.5 (w(0,y,t) - 1) u(t)
// on the fourth. Centered differences with nx unknowns per direction
// (n = nx^2); the Robin boundary is eliminated through a ghost node and the
// boundary row is half-cell lumped, which keeps A and N exactly symmetric.
// A is negative definite; N and B are supported on the controlled boundary.
BilinearSystem heat2d(int nx);

// Intermediate assembly of the Fokker-Planck problem, exposed so the
// structural claims (conservation, simple zero eigenvalue, positive
// stationary density) can be tested on the unreduced operator.
struct FokkerPlanckParts {
  MatrixXd A_raw;       // n x n drift-diffusion operator; columns sum to zero
  MatrixXd N_raw;       // control drift operator; columns sum to zero
  VectorXd stationary;  // kernel vector of A_raw, positive, unit total mass
  BilinearSystem reduced;  // stable (n-1)-dimensional system, C = B^T
};

// Fokker-Planck equation on (-6,6) for a particle density in the potential
//   V(x,t) = W(x) + alpha(x) u(t),
//   W(x) = (((0.5 x^2 - 15) x^2 + 199) x^2 + 28 x + 50) / 200,
// with no-flux boundaries and the linear control shape alpha(x) = x/6.
// Finite volumes with upwinded drift on n cells give a Markov-generator
// transpose: off-diagonal entries nonnegative, columns summing to zero, and a
// simple zero eigenvalue whose kernel is the stationary density rho_inf.
// Shifting the state by rho_inf yields B = N rho_inf, and projecting onto the
// mass-zero complement of the ones vector removes the zero mode, leaving an
// asymptotically stable system of dimension n-1.
FokkerPlanckParts fokker_planck_parts(int n, double nu = 1.0);
BilinearSystem fokker_planck_1d(int n, double nu = 1.0);

// Viscous Burgers equation on (0,1) with Dirichlet control w(0,t) = u(t) and
// w(1,t) = 0, centered differences on n_grid interior points, followed by a
// second-order Carleman bilinearization: state [w; w kron w] of dimension
// n = n_grid + n_grid^2. Terms of combined order three and higher in (w, u)
// are dropped. N and B are scaled by alpha; A is stable and non-symmetric;
// C = B^T.
BilinearSystem burgers_carleman(int n_grid, double nu = 0.1, double alpha = 0.25);

}  // namespace bilyap
