#include "wbary/area_convex.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "support/instances.hpp"
#include "wbary/errors.hpp"

using namespace wbary;
using doctest::Approx;

namespace {

BarycenterProblem t1() {
  return BarycenterProblem({Histogram({1, 0})}, vectorize_cost({{0, 1}, {1, 0}}));
}

const double kLn2 = std::log(2.0);

AMProblem random_am_problem(testing::Rng& rng, std::size_t n, std::size_t m, double scale) {
  AMProblem p{PrimalVector(n, m), DualVector(n, m)};
  for (double& e : p.v.plans) e = rng.uniform(-scale, scale);
  for (double& e : p.v.bary) e = rng.uniform(-scale, scale);
  for (double& e : p.u.duals) e = rng.uniform(-scale, scale);
  return p;
}

// Entry l of the flat (plans, bary, duals) vector.
double& entry(PrimalVector& x, DualVector& y, std::size_t l) {
  if (l < x.plans.size()) return x.plans[l];
  l -= x.plans.size();
  if (l < x.bary.size()) return x.bary[l];
  return y.duals[l - x.bary.size()];
}

}  // namespace

TEST_CASE("regularizer examples") {
  CHECK(regularizer(uniform_primal(2, 1), DualPoint(2, 1), 1.0) == Approx(-50 * kLn2));

  PrimalPoint vert(3, 2);
  vert.plan(0)[4] = 1.0;
  vert.plan(1)[0] = 1.0;
  vert.bary[2] = 1.0;
  CHECK(regularizer(vert, DualPoint(3, 2), 1.0) == 0.0);

  // the quadratic part is nonnegative: r(x, y) >= r(x, 0)
  testing::Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const PrimalPoint x = testing::random_primal(rng, 3, 2);
    CHECK(regularizer(x, testing::random_dual(rng, 3, 2), 1.0) >=
          regularizer(x, DualPoint(3, 2), 1.0));
  }
  // scales linearly with the cost
  const PrimalPoint x = testing::random_primal(rng, 4, 3);
  const DualPoint y = testing::random_dual(rng, 4, 3);
  CHECK(regularizer(x, y, 2.5) == Approx(2.5 * regularizer(x, y, 1.0)));
}

TEST_CASE("theta values") {
  CHECK(theta(2, 1.0, ThetaVariant::paper) == Approx(33.726).epsilon(1e-4));
  CHECK(theta(2, 1.0, ThetaVariant::exact) == Approx(40.657).epsilon(1e-4));
  CHECK(theta(2, 1.0, ThetaVariant::exact) == Approx(50 * kLn2 + 6));
  CHECK(theta(5, 0.0, ThetaVariant::paper) == 0.0);
  CHECK(theta(5, 0.0, ThetaVariant::exact) == 0.0);
  CHECK(theta(7, 3.0, ThetaVariant::exact) == Approx(3 * theta(7, 1.0, ThetaVariant::exact)));
}

TEST_CASE("regularizer gradient at the minimizer") {
  const SaddleGradient g = regularizer_grad_at_min(2, 1, 1.0);
  CHECK(g.gx.plans[0] == Approx(10 * (-4 * kLn2 + 2)));
  CHECK(g.gx.plans[0] == Approx(-7.726).epsilon(1e-3));
  CHECK(g.gx.bary[0] == Approx(10 * (1 - kLn2)));
  for (double e : g.gy.duals) CHECK(e == 0.0);

  // central differences of r at z_bar
  for (auto [n, m] : {std::pair{2u, 1u}, {3u, 2u}, {4u, 3u}}) {
    const SaddleGradient gm = regularizer_grad_at_min(n, m, 1.7);
    const SaddleGradient gf = regularizer_gradient(uniform_primal(n, m), DualPoint(n, m), 1.7);
    const std::size_t total = n * n * m + n + 2 * m * n;
    const double h = 1e-6;
    for (std::size_t l = 0; l < total; ++l) {
      PrimalPoint xp = uniform_primal(n, m), xm = xp;
      DualPoint yp(n, m), ym(n, m);
      entry(xp, yp, l) += h;
      entry(xm, ym, l) -= h;
      const double fd = (regularizer(xp, yp, 1.7) - regularizer(xm, ym, 1.7)) / (2 * h);
      PrimalVector gx = gm.gx;
      DualVector gy = gm.gy;
      CHECK(fd == Approx(entry(gx, gy, l)).epsilon(1e-6).scale(1));
      PrimalVector fx = gf.gx;
      DualVector fy = gf.gy;
      CHECK(entry(fx, fy, l) == Approx(entry(gx, gy, l)).epsilon(1e-12).scale(1));
    }
  }
}

TEST_CASE("regularizer_gradient matches central differences at random points") {
  testing::Rng rng(12);
  for (int t = 0; t < 5; ++t) {
    const std::size_t n = 2 + t % 3, m = 1 + t % 2;
    const PrimalPoint x = testing::random_primal(rng, n, m);
    const DualPoint y = testing::random_dual(rng, n, m);
    SaddleGradient g = regularizer_gradient(x, y, 1.3);
    const std::size_t total = n * n * m + n + 2 * m * n;
    for (std::size_t l = 0; l < total; ++l) {
      PrimalPoint xp = x, xm = x;
      DualPoint yp = y, ym = y;
      const double h = 1e-7 * std::max(1e-3, std::abs(entry(xp, yp, l)));
      entry(xp, yp, l) += h;
      entry(xm, ym, l) -= h;
      const double fd = (regularizer(xp, yp, 1.3) - regularizer(xm, ym, 1.3)) / (2 * h);
      CHECK(fd == Approx(entry(g.gx, g.gy, l)).epsilon(1e-5).scale(1));
    }
  }
  PrimalPoint hole = uniform_primal(2, 1);
  hole.plans = {1, 0, 0, 0};
  CHECK_THROWS_AS(regularizer_gradient(hole, DualPoint(2, 1), 1.0), DomainError);
}

TEST_CASE("am_objective examples") {
  testing::Rng rng(4);
  const PrimalPoint x = testing::random_primal(rng, 3, 2);
  const DualPoint y = testing::random_dual(rng, 3, 2);
  const AMProblem zero{PrimalVector(3, 2), DualVector(3, 2)};
  CHECK(am_objective(zero, x, y, 1.0) == Approx(regularizer(x, y, 1.0)));
  CHECK(am_objective({PrimalVector(2, 1), DualVector(2, 1)}, uniform_primal(2, 1), DualPoint(2, 1),
                     1.0) == Approx(-50 * kLn2));

  // a constant added to one simplex block shifts H by that constant
  AMProblem shifted = random_am_problem(rng, 3, 2, 1.0);
  const double h0 = am_objective(shifted, x, y, 1.0);
  for (std::size_t l = 9; l < 18; ++l) shifted.v.plans[l] += 0.75;
  CHECK(am_objective(shifted, x, y, 1.0) == Approx(h0 + 0.75));
  for (double& e : shifted.v.bary) e += 0.25;
  CHECK(am_objective(shifted, x, y, 1.0) == Approx(h0 + 1.0));
}

TEST_CASE("box_quadratic_argmin closed forms") {
  // m = 1, |d| = 1, u = -4, denominator 1: unclipped -(m / 4|d|) u / den = 1
  CHECK(box_quadratic_argmin(-4.0, 2.0 * 1.0) == 1.0);
  CHECK(box_quadratic_argmin(-1.0, 2.0) == 0.25);
  CHECK(box_quadratic_argmin(10.0, 2.0) == -1.0);
  CHECK(box_quadratic_argmin(3.0, 0.0) == -1.0);
  CHECK(box_quadratic_argmin(-3.0, 0.0) == 1.0);
  CHECK(box_quadratic_argmin(0.0, 0.0) == 0.0);
  CHECK(box_quadratic_argmin(0.0, 5.0) == 0.0);
}

TEST_CASE("am_prox basic cases") {
  {
    const AMResult z = am_prox({PrimalVector(3, 2), DualVector(3, 2)}, 1, 1.0);
    for (double e : z.x.plans) CHECK(e == Approx(1.0 / 9));
    for (double e : z.x.bary) CHECK(e == Approx(1.0 / 3));
    for (double e : z.y.duals) CHECK(e == 0.0);
  }
  {
    testing::Rng rng(2);
    AMProblem p = random_am_problem(rng, 3, 2, 5.0);
    std::fill(p.u.duals.begin(), p.u.duals.end(), 0.0);
    const AMResult z = am_prox(p, 5, 1.0);
    for (double e : z.y.duals) CHECK(e == 0.0);
  }
  CHECK_THROWS_AS(am_prox({PrimalVector(2, 1), DualVector(2, 1)}, 0, 1.0), ConfigError);
  CHECK_THROWS_AS(am_prox({PrimalVector(2, 1), DualVector(2, 1)}, 3, 0.0), ConfigError);
  AMProblem bad{PrimalVector(2, 1), DualVector(2, 1)};
  bad.v.plans[0] = std::nan("");
  CHECK_THROWS_AS(am_prox(bad, 3, 1.0), NumericalFailure);
}

TEST_CASE("am_prox sweep with an exact single-entry dual") {
  // m = 1, |d| = 1, n = 2, v = 0: the first sweep keeps x and p uniform, so the
  // denominator of y[0] is 1/2 + 1/2 and a linear term of -4 gives exactly 1.
  AMProblem p{PrimalVector(2, 1), DualVector(2, 1)};
  p.u.duals[0] = -4.0;
  const AMResult z = am_prox(p, 1, 1.0);
  const Vector marg = apply_marginals(2, z.x.plan(0));
  CHECK(marg[0] + z.x.bary[0] == Approx(1.0));
  CHECK(z.y.duals[0] == Approx(1.0));
}

TEST_CASE("am_prox is monotone, feasible and reaches a stationary point") {
  testing::Rng rng(21);
  for (int t = 0; t < 8; ++t) {
    const std::size_t n = 2 + t % 4, m = 1 + t % 3;
    const double d_inf = t % 2 ? 1.0 : 0.4;
    const AMProblem p = random_am_problem(rng, n, m, 8.0 * d_inf);
    double last = am_objective(p, uniform_primal(n, m), DualPoint(n, m), d_inf);
    bool monotone = true;
    AMOptions opts;
    opts.on_sweep = [&](std::size_t, const PrimalPoint& x, const DualPoint& y) {
      const double h = am_objective(p, x, y, d_inf);
      if (h > last + 1e-12 * (1 + std::abs(last))) monotone = false;
      last = h;
    };
    const AMResult z = am_prox(p, 400, d_inf, opts);
    CHECK(monotone);
    CHECK(is_primal_feasible(z.x, 1e-12));
    CHECK(is_dual_feasible(z.y));

    // no feasible perturbation improves H
    const double h0 = am_objective(p, z.x, z.y, d_inf);
    for (int trial = 0; trial < 20; ++trial) {
      PrimalPoint x = z.x;
      DualPoint y = z.y;
      const double lam = 1e-3;
      const PrimalPoint dir = testing::random_primal(rng, n, m);
      for (std::size_t l = 0; l < x.plans.size(); ++l)
        x.plans[l] = (1 - lam) * x.plans[l] + lam * dir.plans[l];
      for (std::size_t j = 0; j < n; ++j) x.bary[j] = (1 - lam) * x.bary[j] + lam * dir.bary[j];
      for (double& e : y.duals) e = std::clamp(e + rng.uniform(-lam, lam), -1.0, 1.0);
      CHECK(am_objective(p, x, y, d_inf) >= h0 - 1e-10);
    }
  }
}

TEST_CASE("am_prox skips nothing observable when converged early") {
  testing::Rng rng(5);
  const AMProblem p = random_am_problem(rng, 3, 2, 2.0);
  const AMResult a = am_prox(p, 300, 1.0);
  AMOptions opts;
  opts.on_sweep = [](std::size_t, const PrimalPoint&, const DualPoint&) {};
  const AMResult b = am_prox(p, 300, 1.0, opts);
  CHECK(a.x.plans == b.x.plans);
  CHECK(a.y.duals == b.y.duals);
}

TEST_CASE("am_inner_iterations formula") {
  const double th = theta(2, 1.0, ThetaVariant::paper);
  CHECK(am_inner_iterations(0.5, 33.726, 1.0) ==
        static_cast<std::size_t>(std::ceil(24 * std::log(360 * 33.726 + 72))));
  CHECK(am_inner_iterations(0.5, 33.726, 1.0) == 226);
  std::size_t prev = am_inner_iterations(0.01, th, 1.0);
  for (double eps = 0.02; eps < 2; eps *= 1.5) {
    const std::size_t cur = am_inner_iterations(eps, th, 1.0);
    CHECK(cur <= prev);
    prev = cur;
  }
  for (double eps : {0.01, 0.1, 1.0}) {
    const double diff = static_cast<double>(am_inner_iterations(eps, 2 * th, 1.0)) -
                        static_cast<double>(am_inner_iterations(eps, th, 1.0));
    CHECK(diff >= 0);
    CHECK(diff <= 24 * kLn2 + 1);
  }
  CHECK_THROWS_AS(am_inner_iterations(0.0, th, 1.0), ConfigError);
  CHECK(am_initial_error_bound(0.5, th, 1.0) == Approx((88 + 2) * th + 18));
}

TEST_CASE("de_config") {
  const DEConfig c = de_config(t1(), 0.5);
  CHECK(c.kappa == 3.0);
  CHECK(c.theta == Approx(50 * kLn2 + 6));
  CHECK(c.outer_iters == static_cast<std::size_t>(std::ceil(12 * c.theta / 0.5)));
  CHECK(c.inner_iters == am_inner_iterations(0.5, c.theta, 1.0));
  CHECK(c.eps_prime == 0.25);
  CHECK(de_config(t1(), 0.5, ThetaVariant::paper).theta == Approx(40 * kLn2 + 6));
  CHECK_THROWS_AS(de_config(t1(), 0.0), ConfigError);
  const BarycenterProblem zero({Histogram({1, 0})}, vectorize_cost({{0, 0}, {0, 0}}));
  CHECK_THROWS_AS(de_config(zero, 0.5), ConfigError);
}

TEST_CASE("run_dual_extrapolation on T1 certifies eps = 0.5") {
  const BarycenterProblem p = t1();
  const DEResult r = run_dual_extrapolation(p, 0.5);
  CHECK(duality_gap(r.saddle.x, r.saddle.y, p) <= 0.5);
  CHECK(r.saddle.report.iterations_run <= r.config.outer_iters);
  CHECK(is_primal_feasible(r.saddle.x, 1e-10));
  CHECK(is_dual_feasible(r.saddle.y));
  CHECK(r.max_sx_ratio <= 1.0);
  CHECK(r.max_sy_ratio <= 1.0);
}

TEST_CASE("one outer iteration returns the first w") {
  testing::Rng rng(6);
  const BarycenterProblem p = testing::random_problem(rng, 3, 2);
  RunOptions opts;
  opts.max_iters = 1;
  const DEResult r = run_dual_extrapolation(p, 0.5, ThetaVariant::exact, opts);

  // replay the first step by hand
  const std::size_t M = r.config.inner_iters;
  const SaddleGradient g0 = regularizer_grad_at_min(3, 2, p.cost.d_inf);
  AMProblem sub{g0.gx, g0.gy};
  for (double& e : sub.v.plans) e = -e;
  for (double& e : sub.v.bary) e = -e;
  const AMResult z = am_prox(sub, M, p.cost.d_inf);
  const SaddleGradient gz = gradient_operator(z.x, z.y, p);
  for (std::size_t l = 0; l < sub.v.plans.size(); ++l) sub.v.plans[l] += (1.0 / 3) * gz.gx.plans[l];
  for (std::size_t j = 0; j < 3; ++j) sub.v.bary[j] += (1.0 / 3) * gz.gx.bary[j];
  for (std::size_t l = 0; l < sub.u.duals.size(); ++l) sub.u.duals[l] += (1.0 / 3) * gz.gy.duals[l];
  const AMResult w = am_prox(sub, M, p.cost.d_inf);
  CHECK(r.saddle.x.plans == w.x.plans);
  CHECK(r.saddle.x.bary == w.x.bary);
  CHECK(r.saddle.y.duals == w.y.duals);
}

TEST_CASE("gradient sums respect the runtime bounds") {
  testing::Rng rng(15);
  for (int t = 0; t < 4; ++t) {
    const std::size_t n = 3 + t, m = 1 + t % 3;
    const BarycenterProblem p = testing::random_problem(rng, n, m);
    RunOptions opts;
    opts.max_iters = 60;
    opts.early_exit = false;
    const DEResult r = run_dual_extrapolation(p, 0.3, ThetaVariant::exact, opts);
    CHECK(r.max_sx_ratio <= 1.0);
    CHECK(r.max_sy_ratio <= 1.0);
    CHECK(r.max_sx_ratio > 0.0);
  }
  CHECK(gradient_x_bound(1, 2.0) == 10.0);
  CHECK(gradient_x_bound(4, 2.0) == 6.0);
  CHECK(gradient_y_bound(2.0) == 16.0);
}

TEST_CASE("warm start and inner-iteration override still certify") {
  testing::Rng rng(16);
  const BarycenterProblem p = testing::random_problem(rng, 4, 2);
  DEOptions de;
  de.warm_start = true;
  const DEResult r = run_dual_extrapolation(p, 0.5, ThetaVariant::paper, {}, de);
  CHECK(duality_gap(r.saddle.x, r.saddle.y, p) <= 0.5);
  std::size_t calls = 0;
  de.warm_start = false;
  de.inner_iters = 40;
  de.on_prox = [&](const AMProblem&) { ++calls; };
  RunOptions opts;
  opts.max_iters = 5;
  const DEResult s = run_dual_extrapolation(p, 0.5, ThetaVariant::exact, opts, de);
  CHECK(calls == 2 * s.saddle.report.iterations_run);
}

TEST_CASE("area_convexity_residual examples") {
  testing::Rng rng(30);
  const BarycenterProblem p = testing::random_problem(rng, 3, 2);
  const ZPoint a{testing::random_primal(rng, 3, 2), testing::random_dual(rng, 3, 2)};
  CHECK(std::abs(area_convexity_residual(a, a, a, p)) < 1e-12);

  for (int t = 0; t < 500; ++t) {
    const ZPoint b{testing::random_primal(rng, 3, 2, 0.5), testing::random_dual(rng, 3, 2, 0.2)};
    const ZPoint c{testing::random_primal(rng, 3, 2, 0.5), testing::random_dual(rng, 3, 2, 0.2)};
    CHECK(area_convexity_residual(a, b, c, p) >= -1e-9);
  }

  const BarycenterProblem zero({Histogram::uniform(3), Histogram::uniform(3)},
                               vectorize_cost(3, Vector(9, 0.0)));
  const ZPoint b{testing::random_primal(rng, 3, 2), testing::random_dual(rng, 3, 2)};
  CHECK(area_convexity_residual(a, b, a, zero) == Approx(0.0).scale(1));
}

TEST_CASE("hessian_forms") {
  testing::Rng rng(40);
  const PrimalPoint x = testing::random_primal(rng, 3, 2);
  const DualPoint y = testing::random_dual(rng, 3, 2);
  const HessianForms zero = hessian_forms(x, y, PrimalVector(3, 2), DualVector(3, 2), 1.0);
  CHECK(zero.q_hess == 0.0);
  CHECK(zero.q_diag == 0.0);

  // y = 0 and w on the dual block: the dual block of the Hessian is twice D's
  DualVector wy(3, 2);
  for (double& e : wy.duals) e = rng.uniform(-1, 1);
  const HessianForms yb = hessian_forms(x, DualPoint(3, 2), PrimalVector(3, 2), wy, 1.0);
  CHECK(yb.q_hess == Approx(2 * yb.q_diag));

  // against central differences of the gradient
  for (int t = 0; t < 5; ++t) {
    const std::size_t n = 2 + t % 3, m = 1 + t % 2;
    const PrimalPoint xr = testing::random_primal(rng, n, m, 2.0);
    const DualPoint yr = testing::random_dual(rng, n, m);
    PrimalVector wx(n, m);
    DualVector wd(n, m);
    for (double& e : wx.plans) e = rng.uniform(-1, 1) * 1e-2;
    for (double& e : wx.bary) e = rng.uniform(-1, 1) * 1e-2;
    for (double& e : wd.duals) e = rng.uniform(-1, 1);
    const double h = 1e-5;
    PrimalPoint xp = xr, xm = xr;
    DualPoint yp = yr, ym = yr;
    for (std::size_t l = 0; l < wx.plans.size(); ++l) {
      xp.plans[l] += h * wx.plans[l];
      xm.plans[l] -= h * wx.plans[l];
    }
    for (std::size_t j = 0; j < n; ++j) {
      xp.bary[j] += h * wx.bary[j];
      xm.bary[j] -= h * wx.bary[j];
    }
    for (std::size_t l = 0; l < wd.duals.size(); ++l) {
      yp.duals[l] += h * wd.duals[l];
      ym.duals[l] -= h * wd.duals[l];
    }
    const SaddleGradient gp = regularizer_gradient(xp, yp, 1.0);
    const SaddleGradient gm = regularizer_gradient(xm, ym, 1.0);
    double fd = 0.0;
    for (std::size_t l = 0; l < wx.plans.size(); ++l)
      fd += wx.plans[l] * (gp.gx.plans[l] - gm.gx.plans[l]);
    for (std::size_t j = 0; j < n; ++j) fd += wx.bary[j] * (gp.gx.bary[j] - gm.gx.bary[j]);
    for (std::size_t l = 0; l < wd.duals.size(); ++l)
      fd += wd.duals[l] * (gp.gy.duals[l] - gm.gy.duals[l]);
    fd /= 2 * h;
    const HessianForms hf = hessian_forms(xr, yr, wx, wd, 1.0);
    CHECK(hf.q_hess == Approx(fd).epsilon(1e-6));
    CHECK(hf.q_diag <= hf.q_hess * (1 + 1e-8));
    CHECK(hf.q_hess <= 6 * hf.q_diag * (1 + 1e-8));
  }

  PrimalPoint hole = x;
  hole.bary = {1, 0, 0};
  CHECK_THROWS_AS(hessian_forms(hole, y, PrimalVector(3, 2), DualVector(3, 2), 1.0), DomainError);
}
