#include "bilyap/benchmarks.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bilyap {

namespace {

// dest.block(r0 + i*qr, c0 + j*qc) += P(i,j) * Q for every nonzero P(i,j);
// writing Kronecker terms straight into a block of the target matrix keeps
// the peak memory at one copy of the assembled operator.
void add_kron(MatrixXd& dest, Eigen::Index r0, Eigen::Index c0, const MatrixXd& P,
              const MatrixXd& Q) {
  for (Eigen::Index j = 0; j < P.cols(); ++j) {
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      const double p = P(i, j);
      if (p == 0.0) continue;
      dest.block(r0 + i * Q.rows(), c0 + j * Q.cols(), Q.rows(), Q.cols()) += p * Q;
    }
  }
}

// (1/h^2) tridiag(1, -2, 1): the 1-D Laplacian with zero Dirichlet values at
// both ends folded in.
MatrixXd dirichlet_laplacian_1d(Eigen::Index n, double h) {
  MatrixXd T = MatrixXd::Zero(n, n);
  const double w = 1.0 / (h * h);
  for (Eigen::Index i = 0; i < n; ++i) {
    T(i, i) = -2.0 * w;
    if (i > 0) T(i, i - 1) = w;
    if (i + 1 < n) T(i, i + 1) = w;
  }
  return T;
}

}  // namespace

BilinearSystem heat2d(int nx) {
  if (nx < 3) throw std::invalid_argument("heat2d: nx must be at least 3");
  const Eigen::Index g = nx;
  // x-unknowns sit at x_i = i*hx, i = 0..nx-1: the controlled boundary node
  // x = 0 is an unknown, the Dirichlet node x = 1 is eliminated, so hx = 1/nx.
  // y-unknowns are interior between two Dirichlet sides: hy = 1/(nx+1).
  const double hx = 1.0 / nx;
  const double hy = 1.0 / (nx + 1);

  // Ghost-node elimination of -w_x(0) = 0.5 (w_0 - 1) u: the centered boundary
  // row becomes 2(w_1 - w_0)/hx^2 + u (w_0 - 1)/hx. Halving that row (the
  // boundary node owns half a cell) keeps the stencil exactly symmetric:
  //   (w_1 - w_0)/hx^2 + u w_0/(2 hx) - u/(2 hx).
  MatrixXd Tx = dirichlet_laplacian_1d(g, hx);
  Tx(0, 0) = -1.0 / (hx * hx);

  const MatrixXd Ty = dirichlet_laplacian_1d(g, hy);

  const Eigen::Index n = g * g;
  MatrixXd A = MatrixXd::Zero(n, n);
  // x-fastest grid ordering: index = i + g*(j-1).
  add_kron(A, 0, 0, MatrixXd::Identity(g, g), Tx);
  add_kron(A, 0, 0, Ty, MatrixXd::Identity(g, g));

  const double boundary_weight = 1.0 / (2.0 * hx);
  MatrixXd N = MatrixXd::Zero(n, n);
  MatrixXd B = MatrixXd::Zero(n, 1);
  for (Eigen::Index j = 0; j < g; ++j) {
    N(j * g, j * g) = boundary_weight;   // u-proportional part of the Robin row
    B(j * g, 0) = -boundary_weight;      // constant (-1) part of the Robin row
  }

  std::vector<MatrixXd> Ns;
  Ns.push_back(std::move(N));
  return BilinearSystem(std::move(A), std::move(Ns), std::move(B), std::nullopt,
                        /*symmetric=*/true);
}

namespace {

// W'(x) for the ground potential W(x) = (((0.5 x^2 - 15) x^2 + 199) x^2 + 28 x + 50)/200.
double potential_gradient(double x) {
  const double x2 = x * x;
  return (((3.0 * x2 - 60.0) * x2 + 398.0) * x + 28.0) / 200.0;
}

}  // namespace

FokkerPlanckParts fokker_planck_parts(int n, double nu) {
  if (n < 10) throw std::invalid_argument("fokker_planck_1d: n must be at least 10");
  if (!(nu > 0.0)) throw std::invalid_argument("fokker_planck_1d: nu must be positive");

  // Finite volumes on (-6, 6): n cells of width h, centers x_i = -6 + (i+1/2)h.
  // The density obeys rho_t = d/dx [ nu rho_x + rho (W' + u alpha') ] with zero
  // flux through both walls, so only the n-1 interior faces carry flux:
  //   J_f = nu (rho_{f+1} - rho_f)/h + W'(x_f) rho_up,
  // upwinded on the transport velocity -W' (positive W' pushes mass left, so
  // the right cell is upwind). Cell f gains J_f/h, cell f+1 loses it; every
  // column of the assembled operator therefore sums to zero and total mass is
  // conserved exactly, with nonnegative off-diagonal entries.
  const double h = 12.0 / n;
  const double control_gradient = 1.0 / 6.0;  // alpha(x) = x/6

  MatrixXd A_raw = MatrixXd::Zero(n, n);
  MatrixXd N_raw = MatrixXd::Zero(n, n);
  for (int f = 0; f + 1 < n; ++f) {
    const double diffusion = nu / (h * h);
    A_raw(f, f) -= diffusion;
    A_raw(f, f + 1) += diffusion;
    A_raw(f + 1, f) += diffusion;
    A_raw(f + 1, f + 1) -= diffusion;

    const double x_face = -6.0 + (f + 1) * h;
    const double drift = potential_gradient(x_face) / h;
    if (drift > 0.0) {  // mass moves left; the right cell is upwind
      A_raw(f, f + 1) += drift;
      A_raw(f + 1, f + 1) -= drift;
    } else if (drift < 0.0) {  // mass moves right; the left cell is upwind
      A_raw(f, f) += drift;
      A_raw(f + 1, f) -= drift;
    }

    // Control drift: alpha' = 1/6 > 0 everywhere, so the right cell is upwind.
    const double cdrift = control_gradient / h;
    N_raw(f, f + 1) += cdrift;
    N_raw(f + 1, f + 1) -= cdrift;
  }

  // Stationary density: the kernel vector of A_raw, normalized to unit total
  // mass by replacing one conservation-redundant row with the mass condition.
  MatrixXd M = A_raw;
  M.row(n - 1).setOnes();
  VectorXd rhs = VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  VectorXd stationary = M.partialPivLu().solve(rhs);

  const double kernel_scale = std::max(A_raw.norm() * stationary.norm(), 1e-300);
  const bool kernel_ok = stationary.allFinite() &&
                         (A_raw * stationary).norm() <= 1e-8 * kernel_scale &&
                         stationary.maxCoeff() > 0.0 &&
                         stationary.minCoeff() >= -1e-10 * stationary.maxCoeff();
  if (!kernel_ok) {
    throw SolveError(
        "fokker_planck_1d: stationary-density solve failed; the zero eigenvalue "
        "is not simple at this resolution");
  }

  // Shift to the stationary density (rho = rho_inf + delta): the control drift
  // acting on rho_inf becomes the input matrix, delta' = A delta + u N delta + u B.
  MatrixXd B_raw = N_raw * stationary;

  // The shifted state keeps zero total mass for all inputs, so the dynamics
  // restrict exactly to the orthogonal complement of the ones vector; a QR
  // factorization of ones gives a deterministic orthonormal basis U of that
  // complement, and the projected system of dimension n-1 drops the zero
  // eigenvalue and is asymptotically stable.
  const Eigen::HouseholderQR<MatrixXd> qr(MatrixXd::Ones(n, 1));
  const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, n);
  const MatrixXd U = Q.rightCols(n - 1);

  MatrixXd A_p = U.transpose() * A_raw * U;
  MatrixXd N_p = U.transpose() * N_raw * U;
  MatrixXd B_p = U.transpose() * B_raw;
  MatrixXd C_p = B_p.transpose();

  std::vector<MatrixXd> Ns;
  Ns.push_back(std::move(N_p));
  BilinearSystem reduced(std::move(A_p), std::move(Ns), std::move(B_p), std::move(C_p),
                         /*symmetric=*/false);
  return FokkerPlanckParts{std::move(A_raw), std::move(N_raw), std::move(stationary),
                           std::move(reduced)};
}

BilinearSystem fokker_planck_1d(int n, double nu) {
  return fokker_planck_parts(n, nu).reduced;
}

BilinearSystem burgers_carleman(int n_grid, double nu, double alpha) {
  if (n_grid < 5) throw std::invalid_argument("burgers_carleman: n_grid must be at least 5");
  if (!(nu > 0.0)) throw std::invalid_argument("burgers_carleman: nu must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("burgers_carleman: alpha must be positive");

  const Eigen::Index g = n_grid;
  const double h = 1.0 / (n_grid + 1);  // interior points x_i = i*h, i = 1..n_grid
  const double adv = 1.0 / (2.0 * h);

  // First-order state w: diffusion with the boundary values w(0) = u and
  // w(1) = 0 folded in. The advection at the first node, -w_1 (w_2 - u)/(2h),
  // contributes the bilinear block N1; all w_i w_j products go through Q.
  const MatrixXd A1 = nu * dirichlet_laplacian_1d(g, h);
  MatrixXd b1 = MatrixXd::Zero(g, 1);
  b1(0, 0) = nu / (h * h);
  MatrixXd N1 = MatrixXd::Zero(g, g);
  N1(0, 0) = adv;

  // Quadratic coefficients: row i maps z = w (x) w (z_{i g + j} = w_i w_j) to
  // the advection term -w_i (w_{i+1} - w_{i-1})/(2h).
  MatrixXd Qc = MatrixXd::Zero(g, g * g);
  for (Eigen::Index i = 0; i < g; ++i) {
    if (i + 1 < g) Qc(i, i * g + (i + 1)) = -adv;
    if (i > 0) Qc(i, i * g + (i - 1)) = adv;
  }

  // Second-order Carleman state [w; z], z = w (x) w, whose derivative is
  // w' (x) w + w (x) w'. Substituting the w-dynamics and dropping the terms of
  // combined order three and higher in (w, u) leaves the Kronecker-sum drift,
  // the boundary coupling u (b1 (x) w + w (x) b1), and the bilinear
  // u (N1 (x) I + I (x) N1) z.
  const Eigen::Index n = g + g * g;
  const MatrixXd I = MatrixXd::Identity(g, g);

  MatrixXd A = MatrixXd::Zero(n, n);
  A.topLeftCorner(g, g) = A1;
  A.block(0, g, g, g * g) = Qc;
  add_kron(A, g, g, A1, I);
  add_kron(A, g, g, I, A1);

  MatrixXd N = MatrixXd::Zero(n, n);
  N.topLeftCorner(g, g) = N1;
  add_kron(N, g, 0, b1, I);
  add_kron(N, g, 0, I, b1);
  add_kron(N, g, g, N1, I);
  add_kron(N, g, g, I, N1);
  N *= alpha;

  MatrixXd B = MatrixXd::Zero(n, 1);
  B(0, 0) = alpha * nu / (h * h);
  MatrixXd C = B.transpose();

  std::vector<MatrixXd> Ns;
  Ns.push_back(std::move(N));
  return BilinearSystem(std::move(A), std::move(Ns), std::move(B), std::move(C),
                        /*symmetric=*/false);
}

}  // namespace bilyap
