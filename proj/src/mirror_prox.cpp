#include "wbary/mirror_prox.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wbary/errors.hpp"
#include "wbary/numerics.hpp"

namespace wbary {

MPConfig mp_config(const BarycenterProblem& prob, double eps, ScalingVariant variant) {
  if (!(eps > 0.0)) throw ConfigError("mirror prox: eps must be positive");
  const double dinf = prob.cost.d_inf;
  if (!(dinf > 0.0)) throw ConfigError("mirror prox: cost matrix is identically zero");

  const double n = static_cast<double>(prob.n);
  const double m = static_cast<double>(prob.m);
  const double root = std::sqrt(6.0 * n * std::log(n));

  MPConfig cfg;
  cfg.scaling_variant = variant;
  cfg.eta = 1.0 / (4.0 * dinf * root);
  cfg.iters = checked_count(8.0 * (dinf / eps) * root, "mirror prox iteration count");
  cfg.alpha = 2.0 * dinf * cfg.eta * n;
  cfg.beta = 6.0 * dinf * cfg.eta * std::log(n);
  cfg.gamma_mult = 3.0 * m * cfg.eta * std::log(n);
  if (variant == ScalingVariant::derived) {
    cfg.beta /= m;
    cfg.gamma_mult /= m;
  }
  return cfg;
}

MPState mp_initial_state(const BarycenterProblem& prob) {
  const std::size_t n = prob.n, m = prob.m;
  MPState s;
  s.x = uniform_primal(n, m);
  s.y = DualVector(n, m);
  s.u = s.x;
  s.v = s.y;
  s.sum_u = PrimalVector(n, m);
  s.sum_v = DualVector(n, m);
  s.log_x = PrimalVector(n, m, -2.0 * std::log(static_cast<double>(n)));
  std::fill(s.log_x.bary.begin(), s.log_x.bary.end(), -std::log(static_cast<double>(n)));
  return s;
}

namespace {

// out_i = clip(y_i + alpha (A x_i - (p; q_i)), -1, 1) for every block.
void dual_step(const DualVector& y, const PrimalVector& x, const BarycenterProblem& prob,
               double alpha, DualVector& out, Vector& marg) {
  const std::size_t n = prob.n;
  for (std::size_t i = 0; i < prob.m; ++i) {
    apply_marginals(n, x.plan(i), marg);
    const auto& q = prob.measures[i].weights();
    auto yi = y.block(i);
    auto oi = out.block(i);
    for (std::size_t j = 0; j < n; ++j) {
      oi[j] = std::clamp(yi[j] + alpha * (marg[j] - x.bary[j]), -1.0, 1.0);
      oi[n + j] = std::clamp(yi[n + j] + alpha * (marg[n + j] - q[j]), -1.0, 1.0);
    }
  }
}

// Multiplicative step from log_x with dual y:
//   plans: exponent -gamma (d + 2|d| A'y_i); bary: exponent beta sum_i y_i[0..n).
void primal_step(const PrimalVector& log_x, const DualVector& y, const BarycenterProblem& prob,
                 const MPConfig& cfg, PrimalVector& out_log, PrimalVector& out,
                 Vector& adj, std::size_t iteration) {
  const std::size_t n = prob.n;
  const double w = 2.0 * prob.cost.d_inf;
  for (std::size_t i = 0; i < prob.m; ++i) {
    apply_marginals_adjoint(n, y.block(i), adj);
    auto lx = log_x.plan(i);
    auto lo = out_log.plan(i);
    for (std::size_t l = 0; l < n * n; ++l) {
      lo[l] = lx[l] - cfg.gamma_mult * (prob.cost.d[l] + w * adj[l]);
    }
    if (!normalize_log_weights(lo, out.plan(i))) {
      throw NumericalFailure("mirror prox: non-finite plan update", iteration);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < prob.m; ++i) s += y.block(i)[j];
    out_log.bary[j] = log_x.bary[j] + cfg.beta * s;
  }
  if (!normalize_log_weights(out_log.bary, out.bary)) {
    throw NumericalFailure("mirror prox: non-finite barycenter update", iteration);
  }
}

}  // namespace

MPState mp_iteration(MPState state, const MPConfig& cfg, const BarycenterProblem& prob) {
  const std::size_t n = prob.n, m = prob.m;
  const std::size_t it = state.k + 1;
  Vector marg(2 * n);
  Vector adj(n * n);

  // Extrapolation from (x, y) with the gradient at (x, y).
  dual_step(state.y, state.x, prob, cfg.alpha, state.v, marg);
  PrimalVector log_u(n, m);
  primal_step(state.log_x, state.y, prob, cfg, log_u, state.u, adj, it);

  // Main step from (x, y) with the gradient at (u, v).
  dual_step(state.y, state.u, prob, cfg.alpha, state.y, marg);
  PrimalVector log_next(n, m);
  primal_step(state.log_x, state.v, prob, cfg, log_next, state.x, adj, it);
  state.log_x = std::move(log_next);

  for (std::size_t l = 0; l < state.u.plans.size(); ++l) state.sum_u.plans[l] += state.u.plans[l];
  for (std::size_t j = 0; j < n; ++j) state.sum_u.bary[j] += state.u.bary[j];
  for (std::size_t l = 0; l < state.v.duals.size(); ++l) state.sum_v.duals[l] += state.v.duals[l];
  state.k = it;
  return state;
}

SaddleResult run_mirror_prox(const BarycenterProblem& prob, double eps, ScalingVariant variant,
                             const RunOptions& opts) {
  const MPConfig cfg = mp_config(prob, eps, variant);
  const std::size_t iters = opts.max_iters.value_or(cfg.iters);
  if (iters == 0) throw ConfigError("mirror prox: iteration count must be positive");
  const std::size_t stride = effective_stride(opts, iters);

  SaddleResult res;
  res.report.algorithm = Algorithm::mp;
  res.report.config = {
      {"eps", format_double(eps)},
      {"eta", format_double(cfg.eta)},
      {"alpha", format_double(cfg.alpha)},
      {"beta", format_double(cfg.beta)},
      {"gamma", format_double(cfg.gamma_mult)},
      {"theory_iters", std::to_string(cfg.iters)},
      {"iters", std::to_string(iters)},
      {"scaling", variant == ScalingVariant::derived ? "derived" : "printed"},
  };

  Stopwatch clock(opts.record_time);
  MPState state = mp_initial_state(prob);
  auto averages = [&] {
    const double inv = 1.0 / static_cast<double>(state.k);
    PrimalVector x = state.sum_u;
    DualVector y = state.sum_v;
    for (double& e : x.plans) e *= inv;
    for (double& e : x.bary) e *= inv;
    for (double& e : y.duals) e *= inv;
    return std::pair{std::move(x), std::move(y)};
  };

  for (std::size_t k = 1; k <= iters; ++k) {
    state = mp_iteration(std::move(state), cfg, prob);
    if (k % stride != 0 && k != iters) continue;

    auto [x, y] = averages();
    IterationRecord rec;
    rec.iteration = k;
    rec.elapsed_seconds = clock.seconds();
    rec.duality_gap = duality_gap(x, y, prob);
    rec.objective = primal_value(x, prob);
    if (opts.bary_observer) rec.optimality_gap = opts.bary_observer(x.bary);
    if (!std::isfinite(*rec.duality_gap)) {
      throw NumericalFailure("mirror prox: non-finite duality gap", k);
    }
    res.report.records.push_back(rec);
    if (opts.early_exit && *rec.duality_gap <= eps && k != iters) {
      res.report.early_exit = true;
      break;
    }
  }

  auto [x, y] = averages();
  res.report.iterations_run = state.k;
  res.report.barycenter = x.bary;
  res.x = std::move(x);
  res.y = std::move(y);
  return res;
}

}  // namespace wbary
