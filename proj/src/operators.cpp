#include "wbary/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wbary/errors.hpp"

namespace wbary {

void apply_marginals(std::size_t n, std::span<const double> plan, std::span<double> out) {
  if (plan.size() != n * n || out.size() != 2 * n) {
    throw ShapeError("apply_marginals: expected plan of length n^2 and output of length 2n");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double* row = plan.data() + j * n;
    double row_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      row_sum += row[k];
      out[n + k] += row[k];
    }
    out[j] = row_sum;
  }
}

Vector apply_marginals(std::size_t n, std::span<const double> plan) {
  Vector out(2 * n);
  apply_marginals(n, plan, out);
  return out;
}

void apply_marginals_adjoint(std::size_t n, std::span<const double> y, std::span<double> out) {
  if (y.size() != 2 * n || out.size() != n * n) {
    throw ShapeError("apply_marginals_adjoint: expected y of length 2n and output of length n^2");
  }
  for (std::size_t j = 0; j < n; ++j) {
    double* row = out.data() + j * n;
    for (std::size_t k = 0; k < n; ++k) row[k] = y[j] + y[n + k];
  }
}

Vector apply_marginals_adjoint(std::size_t n, std::span<const double> y) {
  Vector out(n * n);
  apply_marginals_adjoint(n, y, out);
  return out;
}

DualVector big_operator_apply(const PrimalVector& x) {
  if (x.plans.size() != x.m * x.n * x.n || x.bary.size() != x.n) {
    throw ShapeError("big_operator_apply: malformed primal vector");
  }
  DualVector out(x.n, x.m);
  for (std::size_t i = 0; i < x.m; ++i) {
    auto block = out.block(i);
    apply_marginals(x.n, x.plan(i), block);
    for (std::size_t j = 0; j < x.n; ++j) block[j] -= x.bary[j];
  }
  return out;
}

PrimalVector big_operator_adjoint(const DualVector& y) {
  if (y.duals.size() != 2 * y.m * y.n) throw ShapeError("big_operator_adjoint: malformed dual vector");
  PrimalVector out(y.n, y.m);
  for (std::size_t i = 0; i < y.m; ++i) {
    auto yi = y.block(i);
    apply_marginals_adjoint(y.n, yi, out.plan(i));
    for (std::size_t j = 0; j < y.n; ++j) out.bary[j] -= yi[j];
  }
  return out;
}

DualVector stacked_measures(const BarycenterProblem& prob) {
  DualVector c(prob.n, prob.m);
  for (std::size_t i = 0; i < prob.m; ++i) {
    auto block = c.block(i);
    const auto& q = prob.measures[i].weights();
    std::copy(q.begin(), q.end(), block.begin() + static_cast<std::ptrdiff_t>(prob.n));
  }
  return c;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// sum_i d'x_i
double linear_cost(const PrimalVector& x, const CostData& cost) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.m; ++i) s += dot(cost.d, x.plan(i));
  return s;
}

}  // namespace

double objective_F(const PrimalVector& x, const DualVector& y, const BarycenterProblem& prob) {
  check_shapes(prob, x);
  check_shapes(prob, y);
  const DualVector ax = big_operator_apply(x);
  const DualVector c = stacked_measures(prob);
  double bilinear = 0.0;
  for (std::size_t k = 0; k < y.duals.size(); ++k) {
    bilinear += y.duals[k] * (ax.duals[k] - c.duals[k]);
  }
  const double m = static_cast<double>(prob.m);
  return (linear_cost(x, prob.cost) + 2.0 * prob.cost.d_inf * bilinear) / m;
}

SaddleGradient gradient_operator(const PrimalVector& x, const DualVector& y,
                                 const BarycenterProblem& prob) {
  check_shapes(prob, x);
  check_shapes(prob, y);
  const double m = static_cast<double>(prob.m);
  const double w = 2.0 * prob.cost.d_inf;

  SaddleGradient g{big_operator_adjoint(y), big_operator_apply(x)};
  for (std::size_t i = 0; i < prob.m; ++i) {
    auto gi = g.gx.plan(i);
    for (std::size_t l = 0; l < gi.size(); ++l) gi[l] = (prob.cost.d[l] + w * gi[l]) / m;
  }
  for (double& e : g.gx.bary) e = w * e / m;

  const DualVector c = stacked_measures(prob);
  for (std::size_t k = 0; k < g.gy.duals.size(); ++k) {
    g.gy.duals[k] = w * (c.duals[k] - g.gy.duals[k]) / m;
  }
  return g;
}

double primal_value(const PrimalVector& x, const BarycenterProblem& prob) {
  check_shapes(prob, x);
  const DualVector ax = big_operator_apply(x);
  const DualVector c = stacked_measures(prob);
  double violation = 0.0;
  for (std::size_t k = 0; k < ax.duals.size(); ++k) {
    violation += std::abs(ax.duals[k] - c.duals[k]);
  }
  return (linear_cost(x, prob.cost) + 2.0 * prob.cost.d_inf * violation) /
         static_cast<double>(prob.m);
}

double dual_value(const DualVector& y, const BarycenterProblem& prob) {
  check_shapes(prob, y);
  const std::size_t n = prob.n;
  const double w = 2.0 * prob.cost.d_inf;

  double total = 0.0;
  for (std::size_t i = 0; i < prob.m; ++i) {
    auto yi = y.block(i);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        best = std::min(best, prob.cost.d[j * n + k] + w * (yi[j] + yi[n + k]));
      }
    }
    total += best;
  }
  double best_p = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < prob.m; ++i) s += y.block(i)[j];
    best_p = std::min(best_p, -w * s);
  }
  total += best_p;

  double cy = 0.0;
  for (std::size_t i = 0; i < prob.m; ++i) {
    cy += dot(prob.measures[i].span(), y.block(i).subspan(n, n));
  }
  return (total - w * cy) / static_cast<double>(prob.m);
}

double duality_gap(const PrimalVector& x, const DualVector& y, const BarycenterProblem& prob) {
  return primal_value(x, prob) - dual_value(y, prob);
}

ProxGeometry make_geometry(std::size_t n, std::size_t m) {
  ProxGeometry g;
  g.rx_sq = 3.0 * static_cast<double>(m) * std::log(static_cast<double>(n));
  g.ry_sq = static_cast<double>(m) * static_cast<double>(n);
  g.a1 = 1.0 / g.rx_sq;
  g.a2 = 1.0 / g.ry_sq;
  return g;
}

namespace {

double neg_entropy(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) {
    if (e > 0.0) s += e * std::log(e);
  }
  return s;
}

// <a, ln(a/b)> - 1'(a - b)
double kl_term(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("bregman: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > 0.0) {
      if (!(b[k] > 0.0)) throw DomainError("bregman: reference vanishes where point is positive");
      s += a[k] * std::log(a[k] / b[k]);
    }
    s -= a[k] - b[k];
  }
  return s;
}

}  // namespace

double primal_prox_function(const PrimalVector& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.m; ++i) s += neg_entropy(x.plan(i));
  return s + static_cast<double>(x.m) * neg_entropy(x.bary);
}

BregmanValues bregman_divergences(const PrimalVector& x, const DualVector& y,
                                  const PrimalVector& x_ref, const DualVector& y_ref) {
  if (x.n != x_ref.n || x.m != x_ref.m || y.duals.size() != y_ref.duals.size()) {
    throw ShapeError("bregman: points have different shapes");
  }
  BregmanValues out;
  for (std::size_t i = 0; i < x.m; ++i) out.bx += kl_term(x.plan(i), x_ref.plan(i));
  out.bx += static_cast<double>(x.m) * kl_term(x.bary, x_ref.bary);
  for (std::size_t k = 0; k < y.duals.size(); ++k) {
    const double diff = y.duals[k] - y_ref.duals[k];
    out.by += 0.5 * diff * diff;
  }
  return out;
}

}  // namespace wbary
