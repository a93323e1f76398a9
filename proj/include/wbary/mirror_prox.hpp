#pragma once

// Mirror prox on the product of entropy (plans, barycenter) and Euclidean
// (dual box) geometries. Each iteration is one extrapolation step from the
// current point followed by one main step using the extrapolated gradient;
// the output is the running average of the extrapolation points.

#include "wbary/operators.hpp"
#include "wbary/report.hpp"

namespace wbary {

/// How the multiplicative step exponents are scaled.
///  - printed: gamma = 3 m eta ln n and beta = 6 |d| eta ln n.
///  - derived: both divided by m, which is what the prox geometry
///    (a1 = 1 / (3 m ln n) with the 1/m inside the gradient) gives.
enum class ScalingVariant { printed, derived };

struct MPConfig {
  double eta = 0.0;
  double alpha = 0.0;       // dual step
  double beta = 0.0;        // barycenter exponent scale
  double gamma_mult = 0.0;  // plan exponent scale
  std::size_t iters = 0;
  ScalingVariant scaling_variant = ScalingVariant::derived;
};

/// Step sizes and iteration count from the smoothness constants.
/// Throws ConfigError if eps <= 0 or the cost is identically zero.
MPConfig mp_config(const BarycenterProblem& prob, double eps,
                   ScalingVariant variant = ScalingVariant::derived);

struct MPState {
  PrimalPoint x;
  DualPoint y;
  PrimalPoint u;  // last extrapolation point (plans, s)
  DualPoint v;
  PrimalVector sum_u;
  DualVector sum_v;
  std::size_t k = 0;

  // Log-domain copies of x; probabilities are exp(log_x) normalized.
  PrimalVector log_x;
};

/// Standard start: uniform plans, uniform barycenter, zero duals.
MPState mp_initial_state(const BarycenterProblem& prob);

/// One full iteration (extrapolation then main step); accumulates (u, v).
/// Throws NumericalFailure on a non-finite intermediate.
MPState mp_iteration(MPState state, const MPConfig& cfg, const BarycenterProblem& prob);

struct SaddleResult {
  PrimalPoint x;
  DualPoint y;
  RunReport report;
};

/// Runs mp_config(prob, eps) and then the configured number of iterations
/// (or opts.max_iters), returning the averaged extrapolation points.
SaddleResult run_mirror_prox(const BarycenterProblem& prob, double eps,
                             ScalingVariant variant = ScalingVariant::derived,
                             const RunOptions& opts = {});

}  // namespace wbary
