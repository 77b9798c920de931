#include "bilyap/random_instance.hpp"

#include "bilyap/core_operators.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bilyap {

MatrixXd random_gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> gauss;
  MatrixXd M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = gauss(rng);
  }
  return M;
}

namespace {

MatrixXd stable_draw(std::mt19937_64& rng, int n, double margin, bool symmetric) {
  if (symmetric) {
    const MatrixXd M = random_gaussian(rng, n, n);
    MatrixXd A = symmetrize(-(M * M.transpose()) / static_cast<double>(n));
    // Already negative semidefinite; the shift makes the abscissa <= -margin.
    A -= margin * MatrixXd::Identity(n, n);
    return A;
  }
  MatrixXd A = random_gaussian(rng, n, n) / std::sqrt(static_cast<double>(n));
  A -= (spectral_abscissa(A) + margin) * MatrixXd::Identity(n, n);
  return A;
}

}  // namespace

MatrixXd random_stable_matrix(unsigned seed, int n, double margin) {
  if (n < 1) throw std::invalid_argument("random_stable_matrix: n must be positive");
  if (!(margin > 0.0)) throw std::invalid_argument("random_stable_matrix: margin must be positive");
  std::mt19937_64 rng(seed);
  return stable_draw(rng, n, margin, /*symmetric=*/false);
}

BilinearSystem random_instance(unsigned seed, const RandomInstanceOptions& o) {
  if (o.n < 1) throw std::invalid_argument("random_instance: n must be positive");
  if (o.m < 0) throw std::invalid_argument("random_instance: m must be nonnegative");
  if (o.r < 1) throw std::invalid_argument("random_instance: r must be positive");
  if (o.outputs < 0) throw std::invalid_argument("random_instance: outputs must be nonnegative");
  if (o.m > 0 && !(o.target_rho > 0.0 && o.target_rho < 1.0)) {
    throw std::invalid_argument("random_instance: target_rho must lie in (0, 1)");
  }
  if (!(o.margin > 0.0)) throw std::invalid_argument("random_instance: margin must be positive");

  std::mt19937_64 rng(seed);
  MatrixXd A = stable_draw(rng, o.n, o.margin, o.symmetric);

  std::vector<MatrixXd> Ns;
  Ns.reserve(static_cast<std::size_t>(o.m));
  for (int i = 0; i < o.m; ++i) {
    MatrixXd N = random_gaussian(rng, o.n, o.n) / std::sqrt(static_cast<double>(o.n));
    if (o.symmetric) N = symmetrize(N);
    Ns.push_back(std::move(N));
  }

  if (o.m > 0) {
    // Measure the drawn contraction factor through a temporary system, then
    // rescale: rho is quadratic in the coupling blocks.
    const BilinearSystem probe(A, Ns, MatrixXd::Zero(o.n, 1), std::nullopt, o.symmetric);
    const double rho0 = check_contraction(probe);
    if (!(rho0 > 0.0) || !std::isfinite(rho0)) {
      throw SolveError("random_instance: drawn coupling has no usable contraction factor");
    }
    const double s = std::sqrt(o.target_rho / rho0);
    for (MatrixXd& N : Ns) N *= s;
  }

  MatrixXd B = random_gaussian(rng, o.n, o.r);
  std::optional<MatrixXd> C;
  if (o.outputs > 0 && !o.symmetric) C = random_gaussian(rng, o.outputs, o.n);
  return BilinearSystem(std::move(A), std::move(Ns), std::move(B), std::move(C), o.symmetric);
}

}  // namespace bilyap
