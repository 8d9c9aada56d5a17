#pragma once

#include <string>
#include <vector>

#include "ecomplex/rca.hpp"
#include "ecomplex/score.hpp"

namespace ecomplex {

enum class FitnessMethod { fcm, mfcm };

enum class FitnessVerdict { converged, zero_convergence, boundary_drift, max_iterations };

const char* to_string(FitnessVerdict v);
const char* to_string(FitnessMethod m);

struct FitnessOptions {
  double tol = 1e-10;            // max-norm of successive differences
  int max_iter = 100000;
  double zero_floor = 1e-9;      // fcm: floor for the zero-convergence verdict
  double boundary_margin = 1e-3; // mfcm: margin to the singular value N_c
};

struct TrajectoryPoint {
  int iteration = 0;
  double min_c = 0.0;
  double max_c = 0.0;
  double residual = 0.0;
};

/// Converged (or terminated) fitness/complexity scores. Both score vectors
/// are mean-normalized every iteration, so sum(c) = N_c and sum(p) = N_p
/// hold throughout. The trajectory is dense for the first 100 iterations,
/// then sampled every 100th plus the final one.
struct FixedPointResult {
  ScoreVector country_scores;
  ScoreVector product_scores;
  int iterations = 0;
  double residual = 0.0;
  FitnessVerdict verdict = FitnessVerdict::max_iterations;
  std::vector<TrajectoryPoint> trajectory;
};

/// Fitness-complexity iteration from c = p = 1:
///   c~_i = sum_j M_ij p_j,   p~_j = 1 / sum_i M_ij (1 / c_i),
/// each step mean-normalized, the p-update reading the freshly normalized c.
/// Unfavorably shaped matrices drive some scores to zero; that regime is
/// reported as the zero_convergence verdict, not as convergence.
FixedPointResult fcm(const IncidenceMatrix& m, const FitnessOptions& opt = {});

/// Modified iteration replacing 1/c_i by (N_c - c_i) in the product update:
///   p~_j = 1 / sum_i M_ij (N_c - c_i).
/// Interior steady states satisfy 0 < c_i < N_c and the pre-normalization
/// bound p~_j >= 1/(N_c u_j); the converged verdict enforces them.
/// Trajectories creeping toward the singular boundary c -> N_c are reported
/// as boundary_drift. Throws singular_update if a product denominator stops
/// being positive (only reachable past the boundary).
FixedPointResult mfcm(const IncidenceMatrix& m, const FitnessOptions& opt = {});

struct TaylorComparison {
  double exact = 0.0;    // 1/c
  double approx = 0.0;   // (4/n_c^2)(n_c - c), the expansion around n_c/2
  double rel_err = 0.0;  // |1/(1+delta) - (1-delta)|, delta = 2c/n_c - 1
};

/// Compares 1/c against its second-order surrogate; the identity
/// rel_err = delta^2/(1+delta) makes the quadratic error explicit.
TaylorComparison taylor_consistency(double c, int n_c);

}  // namespace ecomplex
