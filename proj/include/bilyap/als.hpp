#pragma once

// Alternating rank-1 sweeps for the residual equation and the greedy method
// built on them. One sweep fixes one factor, shifts the operator by the fixed
// factor's Rayleigh data, and solves for the other factor:
//   (A + (w^T A w) I + sum_i (w^T N_i w) N_i) v = -R w   (v-half, w normalized)
//   (A + (v^T A v) I + sum_i (v^T N_i v) N_i) w = -R^T v (w-half, v normalized)
// The sweep metric is the Rayleigh-quotient average (v^TAv/|v|^2+w^TAw/|w|^2)/2
// and the loop stops when its change falls to the tolerance.

#include "bilyap/core_operators.hpp"
#include "bilyap/solve_report.hpp"
#include "bilyap/subspace.hpp"
#include "bilyap/types.hpp"

namespace bilyap {

struct AlsConfig {
  double tol = 1e-2;        // change threshold for the sweep metric
  int max_inner_iters = 20; // sweep budget per rank-1 pair
  int max_outer_ranks = 30; // greedy budget

  // Measure the metric change relative to the current value instead of as an
  // absolute difference (the reduced-eigenvalue methods stop this way, so
  // matched comparisons set this).
  bool relative_change = false;

  // Collapse the sweep to one solve with w tied to v. On a symmetric system
  // with v0 = w0 and symmetric R the two halves coincide, so the collapse
  // happens automatically (and keeps v = w exact per sweep); this flag forces
  // it even when those hypotheses fail, which is how the greedy method runs
  // on non-symmetric systems.
  bool tie_vw = false;

  // Run the literal two-solve sweep even when the symmetric collapse would
  // apply. The halves then drift apart transiently and only realign at
  // convergence.
  bool force_full_sweep = false;

  double stop_rel_residual = 1e-8;  // greedy outer stop
  bool subspace_mode = false;       // greedy: grow a basis and re-project
  bool random_start = false;        // greedy: random v0 instead of the residual direction
  unsigned seed = 20160318;
  bool collect_timings = false;     // stamp cumulative milliseconds on records
};

struct AlsResult {
  VectorXd v, w;  // rebalanced so ||v|| == ||w||; the update is v w^T
  int iterations = 0;
  SolveStatus status = SolveStatus::converged;
  double final_change = report_nan();
};

// Rayleigh-quotient average the sweeps are stopped on.
double als_metric(const BilinearSystem& sys, const VectorXd& v, const VectorXd& w);

// J(v, w) = <v w^T, v w^T>_M - 2 trace(w v^T R); symmetric systems only.
double als_objective(const BilinearSystem& sys, const MatrixXd& R, const VectorXd& v,
                     const VectorXd& w);

// One locally optimal rank-1 pair for residual R. Non-convergence within the
// sweep budget is flagged (max_iterations), not an error; R = 0 or a rank
// collapse yields zero vectors flagged degenerate; a singular shifted
// operator throws.
AlsResult als_rank1(const BilinearSystem& sys, const MatrixXd& R, const VectorXd& v0,
                    const VectorXd& w0, const AlsConfig& cfg = {});

struct AlsGreedyResult {
  LowRankFactorization X;  // rank-one mode: Z = [v_1 ... v_k], D = I
  SubspaceBasis basis;     // subspace mode only
  SolveReport report;      // one record per outer rank, starting at rank 0
};

// Greedy accumulation X_{k+1} = X_k + v v^T (or basis growth plus a projected
// re-solve in subspace mode). Ties v = w, so it runs on non-symmetric systems
// too, where it acts as the symmetrized method. Records rel_error against the
// oracle solution when one is supplied.
AlsGreedyResult als_greedy(const BilinearSystem& sys, const AlsConfig& cfg = {},
                           const MatrixXd* oracle = nullptr);

}  // namespace bilyap
