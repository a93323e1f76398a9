#include "wbary/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wbary/errors.hpp"

namespace wbary {

Histogram::Histogram(Vector weights, double tol) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ShapeError("histogram must be non-empty");
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw DomainError("histogram entry is negative or NaN");
    sum += w;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw DomainError("histogram sums to " + std::to_string(sum) + ", expected 1");
  }
}

Histogram Histogram::uniform(std::size_t n) {
  return Histogram(Vector(n, 1.0 / static_cast<double>(n)), 1e-9);
}

CostData vectorize_cost(std::size_t n, std::span<const double> row_major) {
  if (row_major.size() != n * n) throw ShapeError("cost matrix is not n x n");
  CostData cost;
  cost.n = n;
  cost.d.assign(row_major.begin(), row_major.end());
  for (double c : cost.d) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidCostError("cost matrix has a negative or non-finite entry");
    cost.d_inf = std::max(cost.d_inf, c);
  }
  return cost;
}

CostData vectorize_cost(const std::vector<Vector>& rows) {
  const std::size_t n = rows.size();
  Vector flat;
  flat.reserve(n * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw ShapeError("cost matrix is not square");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return vectorize_cost(n, flat);
}

BarycenterProblem::BarycenterProblem(std::vector<Histogram> measures_in, CostData cost_in)
    : measures(std::move(measures_in)), cost(std::move(cost_in)) {
  m = measures.size();
  n = cost.n;
  if (m < 1) throw ShapeError("need at least one measure");
  if (n < 2) throw ShapeError("need at least two support points");
  if (cost.d.size() != n * n) throw ShapeError("cost vector has wrong length");
  for (const auto& q : measures) {
    if (q.size() != n) throw ShapeError("measure length does not match cost size");
  }
}

PrimalPoint uniform_primal(std::size_t n, std::size_t m) {
  PrimalPoint x(n, m, 1.0 / static_cast<double>(n * n));
  std::fill(x.bary.begin(), x.bary.end(), 1.0 / static_cast<double>(n));
  return x;
}

namespace {

bool on_simplex(std::span<const double> v, double tol) {
  double sum = 0.0;
  for (double e : v) {
    if (!(e >= 0.0)) return false;
    sum += e;
  }
  return std::abs(sum - 1.0) <= tol;
}

}  // namespace

bool is_primal_feasible(const PrimalVector& x, double tol) {
  for (std::size_t i = 0; i < x.m; ++i) {
    if (!on_simplex(x.plan(i), tol)) return false;
  }
  return on_simplex(x.bary, tol);
}

bool is_dual_feasible(const DualVector& y) {
  return std::all_of(y.duals.begin(), y.duals.end(),
                     [](double e) { return e >= -1.0 && e <= 1.0; });
}

void check_shapes(const BarycenterProblem& prob, const PrimalVector& x) {
  if (x.n != prob.n || x.m != prob.m || x.plans.size() != prob.m * prob.n * prob.n ||
      x.bary.size() != prob.n) {
    throw ShapeError("primal point does not match problem dimensions");
  }
}

void check_shapes(const BarycenterProblem& prob, const DualVector& y) {
  if (y.n != prob.n || y.m != prob.m || y.duals.size() != 2 * prob.m * prob.n) {
    throw ShapeError("dual point does not match problem dimensions");
  }
}

}  // namespace wbary
