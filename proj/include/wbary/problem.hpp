#pragma once

// Problem data for the Wasserstein barycenter saddle-point formulation.
//
// Transport plans are stored row-major: entry (j, k) of the n x n plan for
// measure i lives at plans[i * n * n + j * n + k]. Every operator in the
// library uses this convention.

#include <cstddef>
#include <span>
#include <vector>

namespace wbary {

using Vector = std::vector<double>;

/// Absolute tolerance on simplex sums.
inline constexpr double kSimplexTol = 1e-12;

/// A probability vector on the simplex of dimension n.
class Histogram {
 public:
  Histogram() = default;
  /// Throws DomainError if an entry is negative or the sum is off by more than `tol`.
  explicit Histogram(Vector weights, double tol = kSimplexTol);

  /// Uniform histogram on n points.
  static Histogram uniform(std::size_t n);

  std::size_t size() const { return weights_.size(); }
  const Vector& weights() const { return weights_; }
  double operator[](std::size_t j) const { return weights_[j]; }
  std::span<const double> span() const { return weights_; }

 private:
  Vector weights_;
};

/// Ground cost matrix together with its row-major vectorization.
struct CostData {
  std::size_t n = 0;
  Vector d;            // d[j * n + k] = C(j, k)
  double d_inf = 0.0;  // max entry of d

  double operator()(std::size_t j, std::size_t k) const { return d[j * n + k]; }
};

/// Row-major vectorization of a square, nonnegative cost matrix.
/// Throws ShapeError for ragged or non-square input and InvalidCostError for
/// negative or non-finite entries.
CostData vectorize_cost(const std::vector<Vector>& rows);

/// Same, from a flat row-major buffer of n * n entries.
CostData vectorize_cost(std::size_t n, std::span<const double> row_major);

/// Fixed set of measures to average, plus the shared ground cost.
struct BarycenterProblem {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<Histogram> measures;
  CostData cost;

  /// Throws ShapeError unless m >= 1, n >= 2 and all sizes agree.
  BarycenterProblem(std::vector<Histogram> measures, CostData cost);
};

/// An element of R^{m n^2 + n}: m plan blocks followed by the barycenter block.
/// Feasible points (plans on the n^2-simplex, bary on the n-simplex) are the
/// primal iterates; the same layout also carries primal gradients.
struct PrimalVector {
  std::size_t n = 0;
  std::size_t m = 0;
  Vector plans;  // m * n * n
  Vector bary;   // n

  PrimalVector() = default;
  PrimalVector(std::size_t n, std::size_t m, double fill = 0.0)
      : n(n), m(m), plans(m * n * n, fill), bary(n, fill) {}

  std::size_t plan_size() const { return n * n; }
  std::span<double> plan(std::size_t i) { return {plans.data() + i * n * n, n * n}; }
  std::span<const double> plan(std::size_t i) const {
    return {plans.data() + i * n * n, n * n};
  }
};

/// An element of R^{2 m n}: one block (row part; column part) per measure.
struct DualVector {
  std::size_t n = 0;
  std::size_t m = 0;
  Vector duals;  // m * 2n

  DualVector() = default;
  DualVector(std::size_t n, std::size_t m, double fill = 0.0)
      : n(n), m(m), duals(2 * m * n, fill) {}

  std::span<double> block(std::size_t i) { return {duals.data() + 2 * n * i, 2 * n}; }
  std::span<const double> block(std::size_t i) const {
    return {duals.data() + 2 * n * i, 2 * n};
  }
};

using PrimalPoint = PrimalVector;
using DualPoint = DualVector;

/// Uniform plans and uniform barycenter.
PrimalPoint uniform_primal(std::size_t n, std::size_t m);

/// Plans and bary nonnegative and on their simplices within `tol`.
bool is_primal_feasible(const PrimalVector& x, double tol = kSimplexTol);

/// Every dual entry in [-1, 1].
bool is_dual_feasible(const DualVector& y);

/// Throws ShapeError if x or y does not match the problem dimensions.
void check_shapes(const BarycenterProblem& prob, const PrimalVector& x);
void check_shapes(const BarycenterProblem& prob, const DualVector& y);

}  // namespace wbary
