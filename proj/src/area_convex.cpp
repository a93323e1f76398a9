#include "wbary/area_convex.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wbary/errors.hpp"
#include "wbary/numerics.hpp"

namespace wbary {

namespace {

double neg_entropy(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) {
    if (e > 0.0) s += e * std::log(e);
  }
  return s;
}

void require_positive_cost(double d_inf, const char* who) {
  if (!(d_inf > 0.0)) throw ConfigError(std::string(who) + ": cost matrix is identically zero");
}

}  // namespace

double regularizer(const PrimalVector& x, const DualVector& y, double d_inf) {
  const std::size_t n = x.n, m = x.m;
  if (y.n != n || y.m != m) throw ShapeError("regularizer: primal and dual shapes differ");

  double entropy = 0.0;
  for (std::size_t i = 0; i < m; ++i) entropy += 10.0 * neg_entropy(x.plan(i));
  entropy += 5.0 * static_cast<double>(m) * neg_entropy(x.bary);

  double quad = 0.0;
  Vector marg(2 * n);
  for (std::size_t i = 0; i < m; ++i) {
    apply_marginals(n, x.plan(i), marg);
    auto yi = y.block(i);
    for (std::size_t j = 0; j < 2 * n; ++j) quad += marg[j] * yi[j] * yi[j];
    for (std::size_t j = 0; j < n; ++j) quad += x.bary[j] * yi[j] * yi[j];
  }
  return 2.0 * d_inf / static_cast<double>(m) * (entropy + quad);
}

SaddleGradient regularizer_gradient(const PrimalVector& x, const DualVector& y, double d_inf) {
  const std::size_t n = x.n, m = x.m;
  const double scale = 2.0 * d_inf / static_cast<double>(m);
  SaddleGradient g{PrimalVector(n, m), DualVector(n, m)};
  Vector marg(2 * n);
  for (std::size_t i = 0; i < m; ++i) {
    auto xi = x.plan(i);
    auto yi = y.block(i);
    auto gi = g.gx.plan(i);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t l = j * n + k;
        if (!(xi[l] > 0.0)) throw DomainError("regularizer_gradient: plan entry is not positive");
        gi[l] = scale * (10.0 * (std::log(xi[l]) + 1.0) + yi[j] * yi[j] + yi[n + k] * yi[n + k]);
      }
    }
    apply_marginals(n, xi, marg);
    auto gyi = g.gy.block(i);
    for (std::size_t j = 0; j < n; ++j) {
      gyi[j] = scale * 2.0 * yi[j] * (marg[j] + x.bary[j]);
      gyi[n + j] = scale * 2.0 * yi[n + j] * marg[n + j];
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(x.bary[j] > 0.0)) throw DomainError("regularizer_gradient: p entry is not positive");
    double sq = 0.0;
    for (std::size_t i = 0; i < m; ++i) sq += y.block(i)[j] * y.block(i)[j];
    g.gx.bary[j] = scale * (5.0 * static_cast<double>(m) * (std::log(x.bary[j]) + 1.0) + sq);
  }
  return g;
}

double theta(std::size_t n, double d_inf, ThetaVariant variant) {
  const double ln_n = std::log(static_cast<double>(n));
  const double coef = variant == ThetaVariant::paper ? 40.0 : 50.0;
  return coef * ln_n * d_inf + 6.0 * d_inf;
}

SaddleGradient regularizer_grad_at_min(std::size_t n, std::size_t m, double d_inf) {
  const double ln_n = std::log(static_cast<double>(n));
  const double md = static_cast<double>(m);
  SaddleGradient g{PrimalVector(n, m, 10.0 * d_inf / md * (-4.0 * ln_n + 2.0)),
                   DualVector(n, m)};
  std::fill(g.gx.bary.begin(), g.gx.bary.end(), 10.0 * d_inf * (-ln_n + 1.0));
  return g;
}

double am_objective(const AMProblem& prob, const PrimalVector& x, const DualVector& y,
                    double d_inf) {
  double lin = 0.0;
  for (std::size_t l = 0; l < x.plans.size(); ++l) lin += prob.v.plans[l] * x.plans[l];
  for (std::size_t j = 0; j < x.bary.size(); ++j) lin += prob.v.bary[j] * x.bary[j];
  for (std::size_t l = 0; l < y.duals.size(); ++l) lin += prob.u.duals[l] * y.duals[l];
  return lin + regularizer(x, y, d_inf);
}

double box_quadratic_argmin(double lin, double quad) {
  if (quad > 0.0) return std::clamp(-lin / (2.0 * quad), -1.0, 1.0);
  if (lin > 0.0) return -1.0;
  if (lin < 0.0) return 1.0;
  return 0.0;
}

AMResult am_prox(const AMProblem& prob, std::size_t sweeps, double d_inf, const AMOptions& opts) {
  if (sweeps == 0) throw ConfigError("am_prox: need at least one sweep");
  require_positive_cost(d_inf, "am_prox");
  const std::size_t n = prob.v.n, m = prob.v.m;
  const double md = static_cast<double>(m);
  const double cx = md / (20.0 * d_inf);
  const double cp = 1.0 / (10.0 * d_inf);
  const double quad_scale = 2.0 * d_inf / md;

  AMResult z = opts.start ? *opts.start : AMResult{uniform_primal(n, m), DualVector(n, m)};
  Vector logits(n * n);
  Vector logits_p(n);
  Vector ysq(2 * n);
  Vector marg(2 * n);
  Vector y_prev;

  for (std::size_t t = 1; t <= sweeps; ++t) {
    y_prev = z.y.duals;
    for (std::size_t i = 0; i < m; ++i) {
      auto yi = z.y.block(i);
      for (std::size_t j = 0; j < 2 * n; ++j) ysq[j] = yi[j] * yi[j];
      auto vi = prob.v.plan(i);
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t l = j * n + k;
          logits[l] = -(cx * vi[l] + 0.1 * (ysq[j] + ysq[n + k]));
        }
      }
      if (!normalize_log_weights(logits, z.x.plan(i))) {
        throw NumericalFailure("am_prox: non-finite plan update", t);
      }
    }

    for (std::size_t j = 0; j < n; ++j) {
      double sq = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double e = z.y.block(i)[j];
        sq += e * e;
      }
      logits_p[j] = -(cp * prob.v.bary[j] + sq / (5.0 * md));
    }
    if (!normalize_log_weights(logits_p, z.x.bary)) {
      throw NumericalFailure("am_prox: non-finite barycenter update", t);
    }

    for (std::size_t i = 0; i < m; ++i) {
      apply_marginals(n, z.x.plan(i), marg);
      auto ui = prob.u.block(i);
      auto yi = z.y.block(i);
      for (std::size_t j = 0; j < n; ++j) {
        yi[j] = box_quadratic_argmin(ui[j], quad_scale * (marg[j] + z.x.bary[j]));
        yi[n + j] = box_quadratic_argmin(ui[n + j], quad_scale * marg[n + j]);
      }
    }
    if (opts.on_sweep) opts.on_sweep(t, z.x, z.y);
    // The next plans depend on y alone, so an unchanged y is a fixed point of
    // the sweep map and the remaining sweeps would reproduce it bit for bit.
    if (t > 1 && z.y.duals == y_prev && !opts.on_sweep) break;
  }
  for (double e : z.y.duals) {
    if (!std::isfinite(e)) throw NumericalFailure("am_prox: non-finite dual update", sweeps);
  }
  return z;
}

std::size_t am_inner_iterations(double eps, double theta_value, double d_inf) {
  if (!(eps > 0.0)) throw ConfigError("am_inner_iterations: eps must be positive");
  const double arg =
      (88.0 * d_inf / (eps * eps) + 4.0 / eps) * theta_value + 36.0 * d_inf / eps;
  return std::max<std::size_t>(1, checked_count(24.0 * std::log(arg), "AM sweep count"));
}

double am_initial_error_bound(double eps, double theta_value, double d_inf) {
  return (44.0 * d_inf / eps + 2.0) * theta_value + 18.0 * d_inf;
}

DEConfig de_config(const BarycenterProblem& prob, double eps, ThetaVariant variant) {
  if (!(eps > 0.0)) throw ConfigError("dual extrapolation: eps must be positive");
  require_positive_cost(prob.cost.d_inf, "dual extrapolation");
  DEConfig cfg;
  cfg.eps = eps;
  cfg.eps_prime = eps / 2.0;
  cfg.theta = theta(prob.n, prob.cost.d_inf, variant);
  cfg.outer_iters = checked_count(12.0 * cfg.theta / eps, "dual extrapolation iteration count");
  cfg.inner_iters = am_inner_iterations(eps, cfg.theta, prob.cost.d_inf);
  return cfg;
}

double gradient_x_bound(std::size_t m, double d_inf) {
  return d_inf * std::max(3.0, 5.0 / static_cast<double>(m));
}

double gradient_y_bound(double d_inf) { return 8.0 * d_inf; }

namespace {

void add_scaled(PrimalVector& dst, const PrimalVector& src, double a) {
  for (std::size_t l = 0; l < dst.plans.size(); ++l) dst.plans[l] += a * src.plans[l];
  for (std::size_t j = 0; j < dst.bary.size(); ++j) dst.bary[j] += a * src.bary[j];
}

void add_scaled(DualVector& dst, const DualVector& src, double a) {
  for (std::size_t l = 0; l < dst.duals.size(); ++l) dst.duals[l] += a * src.duals[l];
}

double max_abs(const PrimalVector& v) {
  double s = 0.0;
  for (double e : v.plans) s = std::max(s, std::abs(e));
  for (double e : v.bary) s = std::max(s, std::abs(e));
  return s;
}

double l1(const DualVector& v) {
  double s = 0.0;
  for (double e : v.duals) s += std::abs(e);
  return s;
}

}  // namespace

DEResult run_dual_extrapolation(const BarycenterProblem& prob, double eps, ThetaVariant variant,
                                const RunOptions& opts, const DEOptions& de_opts) {
  DEResult out;
  out.config = de_config(prob, eps, variant);
  const DEConfig& cfg = out.config;
  const std::size_t n = prob.n, m = prob.m;
  const double d_inf = prob.cost.d_inf;
  const std::size_t outer = opts.max_iters.value_or(cfg.outer_iters);
  const std::size_t inner = de_opts.inner_iters.value_or(cfg.inner_iters);
  if (outer == 0 || inner == 0) throw ConfigError("dual extrapolation: iteration counts must be positive");
  const std::size_t stride = effective_stride(opts, outer);
  const double kappa = cfg.kappa;

  RunReport& report = out.saddle.report;
  report.algorithm = Algorithm::de;
  report.config = {
      {"eps", format_double(eps)},
      {"kappa", format_double(kappa)},
      {"theta", format_double(cfg.theta)},
      {"theta_variant", variant == ThetaVariant::exact ? "exact" : "paper"},
      {"theory_outer_iters", std::to_string(cfg.outer_iters)},
      {"outer_iters", std::to_string(outer)},
      {"inner_iters", std::to_string(inner)},
      {"warm_start", de_opts.warm_start ? "true" : "false"},
  };

  const SaddleGradient grad_min = regularizer_grad_at_min(n, m, d_inf);
  const double gx_bound = gradient_x_bound(m, d_inf);
  const double gy_bound = gradient_y_bound(d_inf);

  DEState state{PrimalVector(n, m), DualVector(n, m), PrimalVector(n, m), DualVector(n, m), 0};
  AMOptions am_opts;
  Stopwatch clock(opts.record_time);

  auto averages = [&] {
    const double inv = 1.0 / static_cast<double>(state.k);
    PrimalVector x = state.sum_wx;
    DualVector y = state.sum_wy;
    for (double& e : x.plans) e *= inv;
    for (double& e : x.bary) e *= inv;
    for (double& e : y.duals) e *= inv;
    return std::pair{std::move(x), std::move(y)};
  };

  for (std::size_t k = 1; k <= outer; ++k) {
    AMProblem sub{state.s_x, state.s_y};
    add_scaled(sub.v, grad_min.gx, -1.0);
    add_scaled(sub.u, grad_min.gy, -1.0);

    AMResult z;
    AMResult w;
    try {
      if (de_opts.on_prox) de_opts.on_prox(sub);
      z = am_prox(sub, inner, d_inf, am_opts);
      const SaddleGradient gz = gradient_operator(z.x, z.y, prob);
      add_scaled(sub.v, gz.gx, 1.0 / kappa);
      add_scaled(sub.u, gz.gy, 1.0 / kappa);
      if (de_opts.on_prox) de_opts.on_prox(sub);
      w = am_prox(sub, inner, d_inf, am_opts);
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(std::string("dual extrapolation: ") + e.what(), k, e.iteration());
    }
    if (de_opts.warm_start) am_opts.start = w;

    const SaddleGradient gw = gradient_operator(w.x, w.y, prob);
    add_scaled(state.s_x, gw.gx, 1.0 / (2.0 * kappa));
    add_scaled(state.s_y, gw.gy, 1.0 / (2.0 * kappa));
    add_scaled(state.sum_wx, w.x, 1.0);
    add_scaled(state.sum_wy, w.y, 1.0);
    state.k = k;

    const double steps = static_cast<double>(k) / (2.0 * kappa);
    out.max_sx_ratio = std::max(out.max_sx_ratio, max_abs(state.s_x) / (steps * gx_bound));
    out.max_sy_ratio = std::max(out.max_sy_ratio, l1(state.s_y) / (steps * gy_bound));

    // The certificate costs about one AM sweep, so it is checked every outer step.
    const bool want_record = k % stride == 0 || k == outer;
    if (!want_record && !opts.early_exit) continue;
    auto [xa, ya] = averages();
    const double gap = duality_gap(xa, ya, prob);
    if (!std::isfinite(gap)) throw NumericalFailure("dual extrapolation: non-finite duality gap", k);
    const bool stop = opts.early_exit && gap <= eps && k != outer;
    if (want_record || stop) {
      IterationRecord rec;
      rec.iteration = k;
      rec.elapsed_seconds = clock.seconds();
      rec.duality_gap = gap;
      rec.objective = primal_value(xa, prob);
      if (opts.bary_observer) rec.optimality_gap = opts.bary_observer(xa.bary);
      report.records.push_back(rec);
    }
    if (stop) {
      report.early_exit = true;
      break;
    }
  }

  auto [x, y] = averages();
  report.iterations_run = state.k;
  report.barycenter = x.bary;
  out.saddle.x = std::move(x);
  out.saddle.y = std::move(y);
  return out;
}

double area_convexity_residual(const ZPoint& a, const ZPoint& b, const ZPoint& c,
                               const BarycenterProblem& prob, double kappa) {
  const double d_inf = prob.cost.d_inf;
  ZPoint mean{a.x, a.y};
  for (std::size_t l = 0; l < mean.x.plans.size(); ++l) {
    mean.x.plans[l] = (a.x.plans[l] + b.x.plans[l] + c.x.plans[l]) / 3.0;
  }
  for (std::size_t j = 0; j < mean.x.bary.size(); ++j) {
    mean.x.bary[j] = (a.x.bary[j] + b.x.bary[j] + c.x.bary[j]) / 3.0;
  }
  for (std::size_t l = 0; l < mean.y.duals.size(); ++l) {
    mean.y.duals[l] = (a.y.duals[l] + b.y.duals[l] + c.y.duals[l]) / 3.0;
  }
  const double jensen = regularizer(a.x, a.y, d_inf) + regularizer(b.x, b.y, d_inf) +
                        regularizer(c.x, c.y, d_inf) - 3.0 * regularizer(mean.x, mean.y, d_inf);

  const SaddleGradient ga = gradient_operator(a.x, a.y, prob);
  const SaddleGradient gb = gradient_operator(b.x, b.y, prob);
  double inner = 0.0;
  for (std::size_t l = 0; l < ga.gx.plans.size(); ++l) {
    inner += (ga.gx.plans[l] - gb.gx.plans[l]) * (b.x.plans[l] - c.x.plans[l]);
  }
  for (std::size_t j = 0; j < ga.gx.bary.size(); ++j) {
    inner += (ga.gx.bary[j] - gb.gx.bary[j]) * (b.x.bary[j] - c.x.bary[j]);
  }
  for (std::size_t l = 0; l < ga.gy.duals.size(); ++l) {
    inner += (ga.gy.duals[l] - gb.gy.duals[l]) * (b.y.duals[l] - c.y.duals[l]);
  }
  return kappa * jensen - inner;
}

HessianForms hessian_forms(const PrimalVector& x, const DualVector& y, const PrimalVector& wx,
                           const DualVector& wy, double d_inf) {
  const std::size_t n = x.n, m = x.m;
  const double md = static_cast<double>(m);
  double hess = 0.0;
  double diag = 0.0;
  Vector marg(2 * n);

  for (std::size_t i = 0; i < m; ++i) {
    auto xi = x.plan(i);
    auto ai = wx.plan(i);
    auto yi = y.block(i);
    auto bi = wy.block(i);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t l = j * n + k;
        if (!(xi[l] > 0.0)) throw DomainError("hessian_forms: plan entry is not positive");
        const double a2 = ai[l] * ai[l] / xi[l];
        hess += 10.0 * a2 + 4.0 * ai[l] * (yi[j] * bi[j] + yi[n + k] * bi[n + k]);
        diag += 2.0 * a2;
      }
    }
    apply_marginals(n, xi, marg);
    for (std::size_t j = 0; j < n; ++j) {
      const double row = bi[j] * bi[j] * (marg[j] + x.bary[j]);
      const double col = bi[n + j] * bi[n + j] * marg[n + j];
      hess += 2.0 * (row + col) + 4.0 * wx.bary[j] * yi[j] * bi[j];
      diag += row + col;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(x.bary[j] > 0.0)) throw DomainError("hessian_forms: p entry is not positive");
    const double a2 = wx.bary[j] * wx.bary[j] / x.bary[j];
    hess += 5.0 * md * a2;
    diag += md * a2;
  }
  const double scale = 2.0 * d_inf / md;
  return {scale * hess, scale * diag};
}

}  // namespace wbary
