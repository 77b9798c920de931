#include "bilyap/rk_subspace.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "bilyap/birka.hpp"
#include "bilyap/core_operators.hpp"

namespace bilyap {

namespace {

using cd = std::complex<double>;

double elapsed_ms(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

// r - (A - sigma I) V (V^T A V - sigma I)^{-1} V^T r.  Throws when the
// projected shifted matrix is singular.
MatrixXcd deflected(const MatrixXd& A, const MatrixXd& V, const MatrixXd& Ak,
                    const MatrixXcd& r, cd sigma) {
  if (V.cols() == 0) return r;
  MatrixXcd S = Ak.cast<cd>();
  S.diagonal().array() -= sigma;
  const MatrixXcd rhs = V.transpose() * r;
  const MatrixXcd Z = S.partialPivLu().solve(rhs);
  if (!Z.allFinite() || (S * Z - rhs).norm() > 1e-8 * std::max(rhs.norm(), 1e-300))
    throw SolveError("rk: projected shifted matrix is singular");
  const MatrixXcd VZ = V * Z;
  return r - (A * VZ - sigma * VZ);
}

// Convex hull (monotone chain) of points in the complex plane; collinear
// points collapse onto the extreme vertices.
std::vector<cd> convex_hull(std::vector<cd> pts) {
  std::sort(pts.begin(), pts.end(), [](cd a, cd b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](cd a, cd b) { return std::abs(a - b) <= 1e-14 * (1.0 + std::abs(a)); }),
            pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;

  auto cross = [](cd o, cd a, cd b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) -
           (a.imag() - o.imag()) * (b.real() - o.real());
  };
  std::vector<cd> hull(2 * n);
  std::size_t h = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower chain
    while (h >= 2 && cross(hull[h - 2], hull[h - 1], pts[i]) <= 0.0) --h;
    hull[h++] = pts[i];
  }
  for (std::size_t i = n - 1, lower = h + 1; i-- > 0;) {  // upper chain
    while (h >= lower && cross(hull[h - 2], hull[h - 1], pts[i]) <= 0.0) --h;
    hull[h++] = pts[i];
  }
  hull.resize(h - 1);  // last point repeats the first
  return hull;
}

// Orthonormal basis of the numerical range of M: left singular vectors whose
// singular values exceed both rel_tol times the largest and the absolute
// floor. Column-wise Gram-Schmidt would keep roundoff columns of a
// numerically low-rank matrix, and a purely relative cut fails once the
// matrix itself has decayed toward the roundoff level of the problem scale —
// the floor anchors the cut there. May return zero columns.
MatrixXd numerical_range(const MatrixXd& M, double rel_tol, double abs_floor) {
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > std::max(rel_tol * sv(0), abs_floor)) ++rank;
  return svd.matrixU().leftCols(rank);
}

// Uniform-by-arclength samples along a closed polygon (or segment / point).
std::vector<cd> boundary_samples(const std::vector<cd>& hull, int count) {
  if (hull.size() == 1) return {hull[0]};
  if (hull.size() == 2) {
    std::vector<cd> out;
    out.reserve(count);
    if (count == 1) return {0.5 * (hull[0] + hull[1])};
    for (int i = 0; i < count; ++i)
      out.push_back(hull[0] + (double(i) / double(count - 1)) * (hull[1] - hull[0]));
    return out;
  }
  std::vector<double> cum{0.0};
  for (std::size_t i = 0; i < hull.size(); ++i)
    cum.push_back(cum.back() + std::abs(hull[(i + 1) % hull.size()] - hull[i]));
  const double perimeter = cum.back();
  std::vector<cd> out;
  out.reserve(count);
  std::size_t edge = 0;
  for (int i = 0; i < count; ++i) {
    const double d = perimeter * double(i) / double(count);
    while (edge + 1 < hull.size() && cum[edge + 1] < d) ++edge;
    const cd a = hull[edge], b = hull[(edge + 1) % hull.size()];
    const double len = cum[edge + 1] - cum[edge];
    out.push_back(len > 0.0 ? a + ((d - cum[edge]) / len) * (b - a) : a);
  }
  return out;
}

std::string rule_name(const ShiftStrategy& s) {
  if (!s.name.empty()) return s.name;
  std::string base;
  if (std::holds_alternative<GreedyResidual>(s.rule)) base = "rk_greedy";
  else if (std::holds_alternative<RitzRational>(s.rule)) base = "rk_ritz";
  else if (std::holds_alternative<Prescribed>(s.rule)) base = "rk_prescribed";
  else base = "rk_rhs";
  return s.tangential ? base + "_tangential" : base;
}

}  // namespace

ShiftStrategy variant(char label) {
  switch (label) {
    case 'A': return {GreedyResidual{}, false, 1, "rk-A"};
    case 'B': return {GreedyResidual{}, true, 2, "rk-B"};
    case 'C': return {RitzRational{}, false, 1, "rk-C"};
    case 'D': return {RitzRational{}, true, 2, "rk-D"};
    case 'E': return {RhsDriven{}, false, 1, "rk-E"};
    case 'F':
      throw std::invalid_argument(
          "rk: variant F needs a harvested shift list; build it with variant_f");
    default: throw std::invalid_argument("rk: unknown variant label");
  }
}

ShiftStrategy variant_f(const BilinearSystem& sys, double tol, int max_iters) {
  BirkaConfig cfg;
  cfg.tol = tol;
  cfg.max_iters = max_iters;
  cfg.collect_trace = false;
  const int k = std::min<int>(10, sys.n());
  // Shift harvesting needs a two-sided reduction; systems without an output
  // map borrow C = B^T, which only influences the harvested spectrum.
  const BilinearSystem& harvest =
      sys.has_output() ? sys
                       : BilinearSystem(sys.A(), sys.N_list(), sys.B(),
                                        MatrixXd(sys.B().transpose()));
  const BirkaResult res = birka(harvest, k, cfg);

  const Eigen::EigenSolver<MatrixXd> es(res.reduced.A);
  if (es.info() != Eigen::Success)
    throw SolveError("rk: eigendecomposition of the harvested reduced matrix failed");
  std::vector<cd> shifts;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const cd mirrored = -std::conj(es.eigenvalues()(i));
    if (mirrored.imag() >= 0.0) shifts.push_back(mirrored);  // one per conjugate pair
  }
  std::sort(shifts.begin(), shifts.end(), [](cd a, cd b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  if (shifts.empty()) throw SolveError("rk: harvested shift list is empty");
  return {Prescribed{std::move(shifts)}, false, 1, "rk-F"};
}

ShiftInterval mirrored_spectral_interval(const MatrixXd& A, double lower_factor,
                                         double upper_factor) {
  const Eigen::EigenSolver<MatrixXd> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw SolveError("rk: eigendecomposition of A failed");
  const double max_re = es.eigenvalues().real().maxCoeff();
  const double min_re = es.eigenvalues().real().minCoeff();
  return {-max_re * lower_factor, -min_re * upper_factor};
}

GreedyShiftResult shift_greedy(const MatrixXd& A, const SubspaceBasis& basis, const MatrixXd& r,
                               const ShiftInterval& interval, int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("rk: greedy grid needs at least 2 points");
  if (r.rows() != A.rows()) throw std::invalid_argument("rk: direction has wrong row count");
  const double scale = r.norm();
  if (basis.empty()) return {interval.lo, scale, false};  // constant objective

  const MatrixXd Ak = basis.V.transpose() * A * basis.V;
  const MatrixXcd r_c = r.cast<cd>();
  GreedyShiftResult best{interval.lo, -1.0, false};
  for (int i = 0; i < grid_points; ++i) {
    const double sigma =
        interval.lo + (interval.hi - interval.lo) * double(i) / double(grid_points - 1);
    double obj;
    try {
      obj = deflected(A, basis.V, Ak, r_c, cd(sigma, 0.0)).norm();
    } catch (const SolveError&) {
      continue;  // singular sample
    }
    if (!std::isfinite(obj)) continue;
    if (obj > best.objective) best = {sigma, obj, false};
  }
  if (best.objective < 0.0) return {interval.lo, 0.0, true};  // every sample singular
  if (best.objective <= 1e-12 * std::max(scale, 1e-300)) {
    best.sigma = interval.lo;  // objective is identically ~0: flag, keep lowest
    best.degenerate = true;
  }
  return best;
}

std::complex<double> shift_ritz(const VectorXcd& ritz_values,
                                const std::vector<std::complex<double>>& used_shifts,
                                int boundary_samples_count) {
  if (ritz_values.size() == 0) throw std::invalid_argument("rk: no ritz values");
  if (boundary_samples_count < 1)
    throw std::invalid_argument("rk: boundary sample count must be positive");

  std::vector<cd> mirrored;
  mirrored.reserve(ritz_values.size());
  for (Eigen::Index i = 0; i < ritz_values.size(); ++i)
    mirrored.push_back(-std::conj(ritz_values(i)));
  const std::vector<cd> samples =
      boundary_samples(convex_hull(std::move(mirrored)), boundary_samples_count);

  // arg max 1/|r(z)| = arg min log|numerator| - log|denominator|.
  cd best = samples.front();
  double best_phi = std::numeric_limits<double>::infinity();
  for (const cd z : samples) {
    double phi = 0.0;
    for (Eigen::Index j = 0; j < ritz_values.size(); ++j)
      phi += std::log(std::max(std::abs(z - ritz_values(j)), 1e-300));
    for (const cd s : used_shifts) phi -= std::log(std::max(std::abs(z - s), 1e-300));
    if (phi < best_phi) {
      best_phi = phi;
      best = z;
    }
  }
  return best;
}

MatrixXcd tangential_directions(const MatrixXd& A, const SubspaceBasis& basis, const MatrixXd& R,
                                std::complex<double> sigma, int count) {
  if (count < 1) throw std::invalid_argument("rk: direction count must be positive");
  const MatrixXd Ak =
      basis.empty() ? MatrixXd(0, 0) : MatrixXd(basis.V.transpose() * A * basis.V);
  const MatrixXcd D = deflected(A, basis.V, Ak, R.cast<cd>(), sigma);
  Eigen::JacobiSVD<MatrixXcd> svd(D, Eigen::ComputeThinU);
  const int take = std::min<int>(count, svd.matrixU().cols());
  return svd.matrixU().leftCols(take);
}

ExtendResult expand_with_shift(const MatrixXd& A, SubspaceBasis& basis,
                               const MatrixXcd& directions, std::complex<double> sigma,
                               double drop_tol) {
  if (directions.rows() != A.rows())
    throw std::invalid_argument("rk: direction has wrong row count");
  MatrixXcd S = A.cast<cd>();
  S.diagonal().array() -= sigma;
  const MatrixXcd X = S.partialPivLu().solve(directions);
  if (!X.allFinite() || (S * X - directions).norm() > 1e-8 * std::max(directions.norm(), 1e-300))
    throw SolveError("rk: expansion shift hits the spectrum");

  // Real + imaginary parts per solved column; the pair spans the same space
  // as the two conjugate complex solves.  Purely real columns stay single.
  MatrixXd candidates(A.rows(), 2 * X.cols());
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    candidates.col(c++) = X.col(j).real();
    if (X.col(j).imag().norm() > 0.0) candidates.col(c++) = X.col(j).imag();
  }
  return extend_orthonormal(basis, candidates.leftCols(c), drop_tol);
}

RkResult rk_solve(const BilinearSystem& sys, const ShiftStrategy& strategy, const RkConfig& cfg,
                  const MatrixXd* oracle) {
  if (!(cfg.stop_tol > 0.0)) throw std::invalid_argument("rk: stop_tol must be positive");
  if (cfg.max_dim < 1) throw std::invalid_argument("rk: max_dim must be positive");
  if (strategy.directions_per_step < 1)
    throw std::invalid_argument("rk: directions_per_step must be positive");
  if (const auto* p = std::get_if<Prescribed>(&strategy.rule); p && p->shifts.empty())
    throw std::invalid_argument("rk: prescribed shift list is empty");
  if (oracle && (oracle->rows() != sys.n() || oracle->cols() != sys.n()))
    throw std::invalid_argument("rk: oracle has wrong dimensions");

  const auto t0 = std::chrono::steady_clock::now();
  const MatrixXd& A = sys.A();
  const double oracle_scale = oracle ? std::max(oracle->norm(), 1e-300) : 0.0;

  RkResult out;
  out.report.method = rule_name(strategy);
  out.report.status = SolveStatus::max_dimension;
  out.solution.basis = orthonormalize(sys.B(), cfg.drop_tol);
  out.solution.Y = MatrixXd::Zero(out.solution.basis.dim(), out.solution.basis.dim());

  if (out.solution.basis.empty()) {  // B = 0: the zero solution is exact
    SolveRecord rec;
    rec.dim = 0;
    rec.rel_residual = 0.0;
    if (oracle) rec.rel_error = oracle->norm() / oracle_scale;
    out.report.records.push_back(rec);
    out.report.status = SolveStatus::converged;
    return out;
  }

  // The interval search is only meaningful for the grid-based rules.
  ShiftInterval interval;
  if (const auto* g = std::get_if<GreedyResidual>(&strategy.rule))
    interval = mirrored_spectral_interval(A, g->lower_factor, g->upper_factor);
  else if (const auto* h = std::get_if<RhsDriven>(&strategy.rule))
    interval = mirrored_spectral_interval(A, h->lower_factor, h->upper_factor);

  std::vector<cd> used_shifts;
  std::size_t prescribed_index = 0;
  cd last_shift(report_nan(), report_nan());
  int last_kept = int(out.solution.basis.dim());

  while (true) {
    SubspaceBasis& basis = out.solution.basis;
    out.solution.Y = solve_projected(sys, basis.V);
    const GalerkinResidual gres = galerkin_residual(sys, out.solution);

    SolveRecord rec;
    rec.dim = int(basis.dim());
    rec.rel_residual = gres.relative;
    if (oracle) rec.rel_error = (out.solution.to_dense() - *oracle).norm() / oracle_scale;
    rec.shift_re = last_shift.real();
    rec.shift_im = last_shift.imag();
    rec.kept = last_kept;
    if (cfg.collect_timings) rec.millis = elapsed_ms(t0);
    out.report.records.push_back(rec);

    if (gres.relative <= cfg.stop_tol) {
      out.report.status = SolveStatus::converged;
      break;
    }
    if (basis.dim() >= cfg.max_dim) break;

    // Direction by rule: residual singular vector, or the right-hand side.
    MatrixXd direction;
    if (std::holds_alternative<RhsDriven>(strategy.rule))
      direction = sys.B();
    else
      direction = dominant_left_singular_vectors(gres.factored, 1);

    cd sigma;
    if (const auto* g = std::get_if<GreedyResidual>(&strategy.rule)) {
      sigma = cd(shift_greedy(A, basis, direction, interval, g->grid_points).sigma, 0.0);
    } else if (const auto* h = std::get_if<RhsDriven>(&strategy.rule)) {
      sigma = cd(shift_greedy(A, basis, direction, interval, h->grid_points).sigma, 0.0);
    } else if (const auto* rz = std::get_if<RitzRational>(&strategy.rule)) {
      const MatrixXd Ak = basis.V.transpose() * A * basis.V;
      const Eigen::EigenSolver<MatrixXd> es(Ak, /*computeEigenvectors=*/false);
      if (es.info() != Eigen::Success)
        throw SolveError("rk: projected eigendecomposition failed");
      sigma = shift_ritz(es.eigenvalues(), used_shifts, rz->boundary_samples);
    } else {
      const auto& list = std::get<Prescribed>(strategy.rule).shifts;
      sigma = list[prescribed_index++ % list.size()];
    }

    MatrixXcd expansion;
    if (strategy.tangential)
      expansion = tangential_directions(A, basis, gres.factored.to_dense(), sigma,
                                        strategy.directions_per_step);
    else
      expansion = direction.cast<cd>();

    used_shifts.push_back(sigma);
    const ExtendResult er = expand_with_shift(A, basis, expansion, sigma, cfg.drop_tol);
    last_shift = sigma;
    last_kept = er.added;
    if (er.added == 0) {
      out.report.status = SolveStatus::stagnated;
      break;
    }
    ++out.report.iterations;
  }

  return out;
}

SpanTheoremReport verify_span_theorem(const MatrixXd& A, const VectorXd& b,
                                      const std::vector<double>& shifts) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw std::invalid_argument("rk: bad span-theorem dimensions");
  if (shifts.empty()) throw std::invalid_argument("rk: span theorem needs at least one shift");
  const BilinearSystem sys(A, {}, b);
  const double scale = std::max((b * b.transpose()).norm(), 1e-300);

  SpanTheoremReport rep;
  SubspaceBasis basis = orthonormalize(b);

  // Claim (i): at each step the shifted preimage of the Galerkin residual is
  // contained in the grown space K_{k+1}.
  for (const double s : shifts) {
    GalerkinSolution sol{basis, solve_projected(sys, basis.V)};
    const GalerkinResidual gres = galerkin_residual(sys, sol);
    const MatrixXd R = gres.factored.to_dense();
    rep.step_rel_residuals.push_back(gres.relative);

    MatrixXd S = A;
    S.diagonal().array() -= s;
    const MatrixXd preimage = S.partialPivLu().solve(R);
    if (!preimage.allFinite()) throw SolveError("rk: span-theorem shift hits the spectrum");

    expand_with_shift(A, basis, b.cast<cd>(), cd(s, 0.0));  // K_{k+1} from b
    // The floor sits at roundoff relative to ||b b^T||: residual directions
    // below it are indistinguishable from an exactly satisfied containment.
    const MatrixXd range = numerical_range(preimage, 1e-12, 1e-12 * scale);
    rep.containment_angles.push_back(range.cols() == 0 ? 0.0
                                                       : subspace_angle(basis.V, range));
  }

  // Claim (ii): force range((A - sI)^{-1} R) into the span; the residual of
  // the enlarged space must then vanish.
  const double s_a = shifts.back();
  MatrixXd S = A;
  S.diagonal().array() -= s_a;
  const Eigen::PartialPivLU<MatrixXd> lu(S);
  while (true) {
    GalerkinSolution sol{basis, solve_projected(sys, basis.V)};
    const MatrixXd R = galerkin_residual(sys, sol).factored.to_dense();
    const MatrixXd range = numerical_range(lu.solve(R), 1e-12, 1e-12 * scale);
    if (R.norm() <= 1e-13 * scale || range.cols() == 0 ||
        extend_orthonormal(basis, range).added == 0) {
      rep.forced_relres = R.norm() / scale;
      rep.forced_dim = int(basis.dim());
      break;
    }
  }

  // Claim (iii): the reconstruction identity on a constructed residual that
  // satisfies the range condition exactly: R := (A - sI) V V^T.
  const MatrixXd& V = basis.V;
  const MatrixXd Rc = S * (V * V.transpose());
  MatrixXd Sk = V.transpose() * A * V;
  Sk.diagonal().array() -= s_a;
  const MatrixXd rebuilt = S * (V * Sk.partialPivLu().solve(V.transpose() * Rc));
  rep.lemma_identity_error = (rebuilt - Rc).norm() / std::max(Rc.norm(), 1e-300);
  return rep;
}

}  // namespace bilyap
