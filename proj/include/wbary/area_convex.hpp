#pragma once

// Dual extrapolation with an area-convex regularizer.
//
// The regularizer couples each plan to the squares of its dual block:
//
//   r(x, y) = (2|d|/m) ( 10 sum_i <x_i, log x_i> + 5m <p, log p>
//                        + sum_i <A x_i, y_i^2> + sum_i <p, y_i[0..n)^2> )
//
// It is minimized at z_bar = (uniform plans, uniform p, y = 0). Proximal steps
// argmin <v, x> + <u, y> + r(x, y) are solved by alternating exact
// minimization: softmax for each plan and for p, a clipped scalar quadratic
// for each dual entry.

#include <functional>
#include <optional>

#include "wbary/mirror_prox.hpp"
#include "wbary/operators.hpp"
#include "wbary/report.hpp"

namespace wbary {

/// Which bound on the regularizer range to use.
///  - paper: 40 ln n |d| + 6 |d|
///  - exact: 50 ln n |d| + 6 |d| (includes the 10 ln n range of the p entropy)
enum class ThetaVariant { paper, exact };

inline constexpr double kAreaConvexity = 3.0;

double regularizer(const PrimalVector& x, const DualVector& y, double d_inf);

/// Full gradient of the regularizer (requires strictly positive plans and p).
SaddleGradient regularizer_gradient(const PrimalVector& x, const DualVector& y, double d_inf);

double theta(std::size_t n, double d_inf, ThetaVariant variant);

/// Gradient of r at z_bar: plan entries (10|d|/m)(2 - 4 ln n), p entries
/// 10|d|(1 - ln n), dual part zero.
SaddleGradient regularizer_grad_at_min(std::size_t n, std::size_t m, double d_inf);

/// Linear terms of the prox objective H = <v, x> + <u, y> + r(x, y).
struct AMProblem {
  PrimalVector v;
  DualVector u;
};

double am_objective(const AMProblem& prob, const PrimalVector& x, const DualVector& y,
                    double d_inf);

struct AMResult {
  PrimalPoint x;
  DualPoint y;
};

struct AMOptions {
  /// Start point; z_bar when empty.
  std::optional<AMResult> start;
  /// Called after every full sweep with the sweep index (1-based) and iterate.
  std::function<void(std::size_t, const PrimalPoint&, const DualPoint&)> on_sweep;
};

/// M sweeps of alternating minimization on H. Throws ConfigError if sweeps == 0
/// or d_inf <= 0, NumericalFailure on a non-finite update.
AMResult am_prox(const AMProblem& prob, std::size_t sweeps, double d_inf,
                 const AMOptions& opts = {});

/// Closed-form minimizer over [-1, 1] of lin * t + quad * t^2 with quad >= 0.
double box_quadratic_argmin(double lin, double quad);

/// 24 ln((88|d|/eps^2 + 4/eps) theta + 36|d|/eps), rounded up.
std::size_t am_inner_iterations(double eps, double theta_value, double d_inf);

/// Upper bound on the initial suboptimality of every prox call made by the
/// outer loop: (44|d|/eps + 2) theta + 18|d|.
double am_initial_error_bound(double eps, double theta_value, double d_inf);

struct DEConfig {
  double kappa = kAreaConvexity;
  double theta = 0.0;
  std::size_t outer_iters = 0;
  std::size_t inner_iters = 0;
  double eps = 0.0;
  double eps_prime = 0.0;  // total prox error budget
};

DEConfig de_config(const BarycenterProblem& prob, double eps,
                   ThetaVariant variant = ThetaVariant::exact);

struct DEState {
  PrimalVector s_x;
  DualVector s_y;
  PrimalVector sum_wx;
  DualVector sum_wy;
  std::size_t k = 0;
};

struct DEOptions {
  /// Warm-start each prox call from the previous output instead of z_bar.
  bool warm_start = false;
  /// Overrides the theoretical number of AM sweeps.
  std::optional<std::size_t> inner_iters;
  /// Receives the prox subproblems solved by the outer loop (diagnostics).
  std::function<void(const AMProblem&)> on_prox;
};

/// Bound on |G_x|_inf over the feasible set: |d| max(3, 5/m).
double gradient_x_bound(std::size_t m, double d_inf);
/// Bound on |G_y|_1 over the feasible set: 8 |d|.
double gradient_y_bound(double d_inf);

struct DEResult {
  SaddleResult saddle;
  DEConfig config;
  /// Largest observed |s_x|_inf / (k/2kappa * gradient_x_bound) and the s_y analogue.
  double max_sx_ratio = 0.0;
  double max_sy_ratio = 0.0;
};

DEResult run_dual_extrapolation(const BarycenterProblem& prob, double eps,
                                ThetaVariant variant = ThetaVariant::exact,
                                const RunOptions& opts = {}, const DEOptions& de_opts = {});

/// kappa (r(a) + r(b) + r(c) - 3 r(mean)) - <G(a) - G(b), b - c>.
struct ZPoint {
  PrimalPoint x;
  DualPoint y;
};

double area_convexity_residual(const ZPoint& a, const ZPoint& b, const ZPoint& c,
                               const BarycenterProblem& prob, double kappa = kAreaConvexity);

struct HessianForms {
  double q_hess = 0.0;
  double q_diag = 0.0;
};

/// w' Hess r(x, y) w and w' D(x) w for a direction w = (wx, wy), assembled
/// without forming either matrix. Throws DomainError on a zero plan or p entry.
HessianForms hessian_forms(const PrimalVector& x, const DualVector& y, const PrimalVector& wx,
                           const DualVector& wy, double d_inf);

}  // namespace wbary
