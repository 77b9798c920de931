#include "bilyap/verify_suite.hpp"

#include "bilyap/als.hpp"
#include "bilyap/benchmarks.hpp"
#include "bilyap/birka.hpp"
#include "bilyap/core_operators.hpp"
#include "bilyap/fixed_point.hpp"
#include "bilyap/galerkin.hpp"
#include "bilyap/matrix_market.hpp"
#include "bilyap/random_instance.hpp"
#include "bilyap/rk_subspace.hpp"
#include "bilyap/subspace.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>

namespace bilyap {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Collects assertions; keeps the first failure as the property's diagnostic.
class Checker {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && pass_) {
      pass_ = false;
      detail_ = what;
    }
  }
  // value <= bound, with both numbers in the diagnostic.
  void check_le(double value, double bound, const std::string& what) {
    check(std::isfinite(value) && value <= bound,
          what + " (" + fmt(value) + " > " + fmt(bound) + ")");
  }
  void fail(const std::string& what) { check(false, what); }
  PropertyResult result(const std::string& name) const {
    return PropertyResult{name, pass_ && checks_ > 0, checks_,
                          pass_ ? (checks_ > 0 ? "" : "no assertions ran") : detail_};
  }

 private:
  bool pass_ = true;
  int checks_ = 0;
  std::string detail_;
};

double min_eig(const MatrixXd& S) {
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (S + S.transpose()),
                                                 Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

double sin_angle(const VectorXd& a, const VectorXd& b) {
  const VectorXd u = a.normalized();
  const VectorXd w = b.normalized();
  return (w - u * u.dot(w)).norm();
}

// --- properties -----------------------------------------------------------------

// The direct reference solve must meet its residual contract on random
// instances of every flavor it will be trusted on.
void prop_direct_oracle(Checker& c, unsigned seed) {
  for (int i = 0; i < 5; ++i) {
    RandomInstanceOptions o;
    o.n = 10 + 3 * i;
    o.m = (i % 3 == 0) ? 2 : 1;
    o.r = 1 + (i % 2);
    o.symmetric = (i % 2 == 0);
    o.target_rho = 0.4;
    const BilinearSystem sys = random_instance(seed * 101u + unsigned(i), o);
    const MatrixXd X = direct_solve(sys);
    c.check_le(relative_residual(sys, X), 1e-10, "random instance residual");
    c.check_le((X - X.transpose()).norm(), 1e-12 * (1.0 + X.norm()),
               "solution symmetry");
  }
  const BilinearSystem heat = heat2d(5);
  c.check_le(relative_residual(heat, direct_solve(heat)), 1e-10, "heat2d residual");
}

// Greedy rank-one updates fitted to stationarity keep every residual psd and
// climb monotonically toward the reference solution in the psd order.
void prop_psd_residual_chain(Checker& c, unsigned seed) {
  std::vector<BilinearSystem> systems;
  systems.push_back(heat2d(6));
  for (int i = 0; i < 2; ++i) {
    RandomInstanceOptions o;
    o.n = 16;
    o.symmetric = true;
    o.target_rho = 0.5;
    systems.push_back(random_instance(seed * 211u + unsigned(i), o));
  }
  for (const BilinearSystem& sys : systems) {
    const MatrixXd X = direct_solve(sys);
    AlsConfig cfg;
    cfg.tol = 1e-10;  // stationarity slack shows up as psd defect, so fit tightly
    cfg.max_inner_iters = 1000;
    cfg.max_outer_ranks = 10;
    cfg.stop_rel_residual = 1e-8;
    const AlsGreedyResult res = als_greedy(sys, cfg);
    const Eigen::Index n = sys.n();
    MatrixXd Xk = MatrixXd::Zero(n, n);
    double previous_gap = min_eig(X);  // X - X_0 with X_0 = 0
    c.check(previous_gap >= -1e-10 * X.norm(), "reference solution psd");
    for (Eigen::Index k = 0; k < res.X.Z.cols(); ++k) {
      const VectorXd v = res.X.Z.col(k);
      Xk += v * v.transpose();
      const MatrixXd R = residual(sys, Xk);
      c.check_le((R - R.transpose()).norm(), 1e-12 * (1.0 + R.norm()),
                 "residual symmetry");
      c.check(min_eig(R) >= -1e-8 * R.norm(), "residual psd");
      c.check(min_eig(X - Xk) >= -1e-8 * X.norm(), "iterate below the solution");
    }
  }
}

// The rank-one two-sided interpolation iteration and the alternating scheme
// are the same map: matched starts give parallel vectors and equal counts.
void prop_als_birka_match(Checker& c, unsigned seed) {
  for (int i = 0; i < 3; ++i) {
    RandomInstanceOptions o;
    o.n = 12;
    o.symmetric = true;
    o.target_rho = 0.5;
    const BilinearSystem sys = random_instance(seed * 307u + unsigned(i), o);
    std::mt19937_64 rng(seed * 331u + unsigned(i));
    const VectorXd v0 = random_gaussian(rng, 12, 1);

    AlsConfig acfg;
    acfg.tol = 1e-3;
    acfg.max_inner_iters = 100;
    acfg.relative_change = true;
    const AlsResult als =
        als_rank1(sys, sys.B() * sys.B().transpose(), v0, v0, acfg);

    BirkaConfig bcfg;
    bcfg.tol = 1e-3;
    bcfg.max_iters = 100;
    const BirkaResult bk = birka(sys, v0, v0, bcfg);

    c.check(als.status == SolveStatus::converged, "alternating scheme converged");
    c.check(bk.status == SolveStatus::converged, "interpolation scheme converged");
    c.check(als.iterations == bk.iterations, "identical iteration counts");
    c.check_le(sin_angle(als.v, bk.V.col(0)), 1e-8, "vectors parallel");
  }
}

// Projected-solution error in the energy norm equals the drop in the squared
// system norm: ||X - V Xhat V^T||_M^2 = ||S||^2 - ||Shat||^2.
void prop_energy_identity(Checker& c, unsigned seed) {
  for (int i = 0; i < 3; ++i) {
    RandomInstanceOptions o;
    o.n = 12;
    o.m = 1 + (i % 2);
    o.symmetric = true;
    o.target_rho = 0.5;
    const BilinearSystem sys = random_instance(seed * 401u + unsigned(i), o);
    std::mt19937_64 rng(seed * 409u + unsigned(i));
    for (int k = 1; k <= 4; ++k) {
      const SubspaceBasis V = orthonormalize(random_gaussian(rng, 12, k));
      const H2ErrorTerms terms = reduced_h2_error_terms(sys, V.V);
      const double drop = terms.h2_full_sq - terms.h2_reduced_sq;
      c.check_le(std::abs(terms.m_norm_error_sq - drop),
                 1e-8 * std::max(terms.h2_full_sq, 1e-30), "energy identity");
    }
  }
}

// The squared norm of the output-error system never exceeds the norm drop,
// and at converged two-sided interpolation points the bound is tight.
void prop_h2_lower_bound(Checker& c, unsigned seed) {
  for (int i = 0; i < 3; ++i) {
    RandomInstanceOptions o;
    o.n = 12;
    o.m = 1 + (i % 2);
    o.symmetric = true;
    o.target_rho = 0.5;
    const BilinearSystem sys = random_instance(seed * 419u + unsigned(i), o);
    std::mt19937_64 rng(seed * 421u + unsigned(i));
    for (int k = 1; k <= 3; ++k) {
      const SubspaceBasis V = orthonormalize(random_gaussian(rng, 12, k));
      const H2ErrorTerms terms = reduced_h2_error_terms(sys, V.V);
      c.check_le(terms.h2_error_system_sq,
                 terms.h2_full_sq - terms.h2_reduced_sq + 1e-10 * (1.0 + terms.h2_full_sq),
                 "error-system norm bounded by the drop");
    }
    int converged = 0;
    for (int k = 1; k <= 2; ++k) {
      BirkaConfig bcfg;
      bcfg.tol = 1e-8;
      bcfg.max_iters = 500;
      bcfg.seed = seed * 433u + unsigned(k);
      const BirkaResult res = birka(sys, k, bcfg);
      if (res.status != SolveStatus::converged) continue;
      ++converged;
      const H2ErrorTerms terms = reduced_h2_error_terms(sys, res.V);
      const double gap =
          (terms.h2_full_sq - terms.h2_reduced_sq) - terms.h2_error_system_sq;
      c.check_le(std::abs(gap), 1e-6 * std::max(terms.h2_full_sq, 1e-30),
                 "equality at interpolation fixed points");
    }
    c.check(converged >= 1, "at least one reduced dimension converged");
  }
}

// The two algebraic arrangements of the splitting iteration produce the same
// iterates; on symmetric instances the chain is psd-monotone and its error
// contracts no slower than the measured spectral-radius bound allows.
void prop_fixed_point(Checker& c, unsigned seed) {
  RandomInstanceOptions sym;
  sym.n = 14;
  sym.symmetric = true;
  sym.target_rho = 0.6;
  RandomInstanceOptions nonsym;
  nonsym.n = 12;
  nonsym.target_rho = 0.4;
  const BilinearSystem sys_sym = random_instance(seed * 443u, sym);
  const BilinearSystem sys_non = random_instance(seed * 449u + 1u, nonsym);

  for (const BilinearSystem* sys : {&sys_sym, &sys_non}) {
    for (int iters : {3, 10}) {
      FixedPointConfig a;
      a.max_iters = iters;
      a.stop_tol = 1e-300;
      FixedPointConfig b = a;
      b.mode = FixedPointMode::residual_form;
      const MatrixXd Xa = fixed_point_solve(*sys, a).X;
      const MatrixXd Xb = fixed_point_solve(*sys, b).X;
      c.check_le((Xa - Xb).norm(), 1e-11 * (1.0 + Xa.norm()),
                 "splitting and residual forms agree");
    }
  }

  const MatrixXd X = direct_solve(sys_sym);
  MatrixXd prev = MatrixXd::Zero(14, 14);
  for (int k = 1; k <= 6; ++k) {
    FixedPointConfig cfgk;
    cfgk.max_iters = k;
    cfgk.stop_tol = 1e-300;
    const MatrixXd Xk = fixed_point_solve(sys_sym, cfgk).X;
    c.check(min_eig(Xk - prev) >= -1e-12 * (1.0 + Xk.norm()), "psd-monotone chain");
    prev = Xk;
  }

  FixedPointConfig run;
  run.max_iters = 25;
  run.stop_tol = 1e-300;
  const FixedPointResult res = fixed_point_solve(sys_sym, run, &X);
  const auto& rec = res.report.records;
  c.check(rec.size() >= 25, "iteration trail recorded");
  if (rec.size() >= 25) {
    const double e15 = rec[14].rel_error;
    const double e25 = rec[24].rel_error;
    const double rate = std::pow(e25 / e15, 0.1);
    const double rho = check_contraction(sys_sym);
    c.check_le(rate, rho + 0.05, "asymptotic rate within the contraction bound");
  }
}

// In the linear case every shifted-solve preimage of the residual stays in
// the grown space, and forcing that range into the basis collapses the
// residual to zero. Shifts are drawn stratified (one per slot, shuffled):
// the claim assumes distinct shifts, and clustered draws amplify the
// numerical containment defect by divided-difference factors per step.
void prop_span_containment(Checker& c, unsigned seed) {
  for (int i = 0; i < 2; ++i) {
    const MatrixXd A = random_stable_matrix(seed * 457u + unsigned(i), 14);
    std::mt19937_64 rng(seed * 461u + unsigned(i));
    const VectorXd b = random_gaussian(rng, 14, 1);
    std::uniform_real_distribution<double> unif(0.0, 0.7);
    const double width = (5.0 - 0.4) / 5.0;  // pairwise gaps stay >= 0.276
    std::vector<double> shifts;
    for (int s = 0; s < 5; ++s) shifts.push_back(0.4 + width * (s + unif(rng)));
    std::shuffle(shifts.begin(), shifts.end(), rng);
    const SpanTheoremReport rep = verify_span_theorem(A, b, shifts);
    c.check(rep.step_rel_residuals.size() == shifts.size(), "per-step residual trail");
    for (double angle : rep.containment_angles)
      c.check_le(angle, 1e-9, "preimage contained in the grown space");
    c.check_le(rep.forced_relres, 1e-9, "forced containment collapses the residual");
    c.check_le(rep.lemma_identity_error, 1e-12, "projection identity");
  }
}

// Expanding only from the right-hand side saturates on the bilinear heat
// system: the run stalls above the tolerance while the residual-driven rule
// keeps converging on the same budget.
void prop_rhs_driven_stagnation(Checker& c, unsigned /*seed*/) {
  const BilinearSystem sys = heat2d(6);
  RkConfig cfg;
  cfg.stop_tol = 1e-8;
  cfg.max_dim = 30;
  const RkResult rhs_only = rk_solve(sys, variant('E'), cfg);
  const RkResult greedy = rk_solve(sys, variant('A'), cfg);
  c.check(rhs_only.report.status == SolveStatus::stagnated,
          "rhs-driven expansion stalls (zero new columns)");
  c.check(rhs_only.report.records.back().dim <= sys.n(), "stall within the space");
  c.check(greedy.report.status == SolveStatus::converged, "greedy rule converges");
  const double stalled = rhs_only.report.records.back().rel_residual;
  const double reached = greedy.report.records.back().rel_residual;
  c.check_le(reached, 1e-8, "greedy rule meets the tolerance");
  c.check_le(reached, 1e-3 * stalled, "greedy passes the stagnation level");
}

// Structural facts the generators promise: definiteness, the conservation
// zero mode and its removal, and the lifted block layout.
void prop_benchmark_structure(Checker& c, unsigned /*seed*/) {
  const BilinearSystem heat = heat2d(5);
  c.check(heat.symmetric(), "heat system declared symmetric");
  c.check((heat.A() - heat.A().transpose()).norm() == 0.0, "heat operator exactly symmetric");
  c.check(Eigen::SelfAdjointEigenSolver<MatrixXd>(heat.A(), Eigen::EigenvaluesOnly)
                  .eigenvalues()
                  .maxCoeff() < 0.0,
          "heat operator negative definite");

  const FokkerPlanckParts fp = fokker_planck_parts(48);
  c.check_le(fp.A_raw.colwise().sum().cwiseAbs().maxCoeff(),
             1e-12 * fp.A_raw.cwiseAbs().maxCoeff(), "raw drift conserves mass");
  const Eigen::EigenSolver<MatrixXd> es(fp.A_raw);
  int near_zero = 0;
  double next_real = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> lam = es.eigenvalues()(i);
    if (std::abs(lam) <= 1e-8)
      ++near_zero;
    else
      next_real = std::max(next_real, lam.real());
  }
  c.check(near_zero == 1, "exactly one conservation zero mode");
  c.check(next_real < -1e-3, "remaining raw spectrum strictly stable");
  c.check(fp.reduced.n() == 47, "reduction removes one dimension");
  c.check(spectral_abscissa(fp.reduced.A()) < -1e-3, "reduced drift stable");

  const BilinearSystem burgers = burgers_carleman(6);
  c.check(burgers.n() == 42, "lifted dimension n_grid + n_grid^2");
  c.check(burgers.A().bottomLeftCorner(36, 6).norm() == 0.0,
          "lifted drift block-triangular");
  c.check(burgers.N(0).topRightCorner(6, 36).norm() == 0.0,
          "input coupling lower-triangular");
  c.check(burgers.B().col(0).tail(41).norm() == 0.0, "forcing enters the first state");
  c.check(burgers.has_output() &&
              (burgers.output_matrix() - burgers.B().transpose()).norm() == 0.0,
          "output reads the forcing direction");
}

// The projected solution's defining property: its residual is orthogonal to
// the subspace, and the factored residual agrees with the dense one.
void prop_galerkin_orthogonality(Checker& c, unsigned seed) {
  RandomInstanceOptions o;
  o.n = 20;
  o.m = 2;
  o.r = 2;
  o.target_rho = 0.5;
  const BilinearSystem sys = random_instance(seed * 467u, o);
  std::mt19937_64 rng(seed * 479u);
  const GalerkinSolution sol = galerkin_solve(sys, random_gaussian(rng, 20, 5));
  const MatrixXd R = residual(sys, sol.to_dense());
  const double scale = (sys.B() * sys.B().transpose()).norm();
  c.check_le((sol.basis.V.transpose() * R * sol.basis.V).norm(), 1e-9 * scale,
             "projected residual vanishes");
  const GalerkinResidual gres = galerkin_residual(sys, sol);
  c.check_le(std::abs(gres.frobenius - R.norm()), 1e-10 * (1.0 + R.norm()),
             "factored residual matches dense");
  c.check_le(std::abs(gres.relative - R.norm() / scale), 1e-12 * (1.0 + gres.relative),
             "relative residual normalization");
}

// Writing a system to matrix files and reading it back is lossless.
void prop_matrix_io(Checker& c, unsigned seed) {
  RandomInstanceOptions o;
  o.n = 9;
  o.m = 2;
  o.r = 2;
  o.outputs = 2;
  o.target_rho = 0.5;
  const BilinearSystem sys = random_instance(seed * 487u, o);
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("bilyap_verify_io_" + std::to_string(seed));
  std::filesystem::remove_all(dir);
  mm::write_system(dir, sys);
  const BilinearSystem back = mm::read_system(dir);
  c.check((back.A() - sys.A()).norm() == 0.0, "drift round-trip");
  c.check(back.m() == sys.m(), "bilinear count round-trip");
  for (int i = 0; i < back.m(); ++i)
    c.check((back.N(i) - sys.N(i)).norm() == 0.0, "bilinear round-trip");
  c.check((back.B() - sys.B()).norm() == 0.0, "input round-trip");
  c.check(back.has_output() && (back.output_matrix() - sys.output_matrix()).norm() == 0.0,
          "output round-trip");
  c.check(back.symmetric() == sys.symmetric(), "symmetry flag round-trip");
  std::filesystem::remove_all(dir);
}

// Drawn instances land exactly on the requested contraction: the dense
// spectral radius of the preconditioned quadratic operator matches it.
void prop_contraction_scaling(Checker& c, unsigned seed) {
  for (double target : {0.3, 0.7}) {
    RandomInstanceOptions o;
    o.n = 10;
    o.m = 2;
    o.target_rho = target;
    const BilinearSystem sys =
        random_instance(seed * 491u + unsigned(target * 10), o);
    const MatrixXd L = kron_lyap_matrix(sys);
    const MatrixXd P = kron_pi_matrix(sys);
    const MatrixXd G = -L.partialPivLu().solve(P);
    const double rho_dense =
        Eigen::EigenSolver<MatrixXd>(G, false).eigenvalues().cwiseAbs().maxCoeff();
    c.check_le(std::abs(rho_dense - target), 1e-8 * target, "dense radius on target");
    const double rho_est = check_contraction(sys);
    c.check_le(std::abs(rho_est - target), 1e-6 * target, "estimator on target");
  }
}

}  // namespace

std::vector<PropertyResult> run_verify_suite(unsigned seed) {
  using Property = std::function<void(Checker&, unsigned)>;
  const std::vector<std::pair<std::string, Property>> properties = {
      {"direct-oracle-residual", prop_direct_oracle},
      {"psd-residual-chain", prop_psd_residual_chain},
      {"als-birka-rank1-equivalence", prop_als_birka_match},
      {"energy-norm-error-identity", prop_energy_identity},
      {"h2-lower-bound", prop_h2_lower_bound},
      {"fixed-point-splitting", prop_fixed_point},
      {"linear-span-containment", prop_span_containment},
      {"rhs-driven-stagnation", prop_rhs_driven_stagnation},
      {"benchmark-structure", prop_benchmark_structure},
      {"galerkin-orthogonality", prop_galerkin_orthogonality},
      {"matrix-io-roundtrip", prop_matrix_io},
      {"contraction-scaling", prop_contraction_scaling},
  };
  std::vector<PropertyResult> results;
  results.reserve(properties.size());
  for (const auto& [name, fn] : properties) {
    Checker checker;
    try {
      fn(checker, seed);
    } catch (const std::exception& e) {
      checker.fail(std::string("exception: ") + e.what());
    }
    results.push_back(checker.result(name));
  }
  return results;
}

bool all_passed(const std::vector<PropertyResult>& results) {
  for (const PropertyResult& r : results)
    if (!r.pass) return false;
  return !results.empty();
}

}  // namespace bilyap
