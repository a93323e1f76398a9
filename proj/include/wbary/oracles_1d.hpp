#pragma once

// Exact transport on the real line, used to certify barycenters of measures
// supported on a common 1-D grid.

#include <vector>

#include "wbary/problem.hpp"

namespace wbary {

/// Support points of a 1-D grid and the cost exponent, cost(a, b) = |a - b|^power.
struct Grid1D {
  Vector points;
  double power = 2.0;

  /// Throws ShapeError unless points are strictly increasing, DomainError if power < 1.
  Grid1D(Vector points, double power = 2.0);

  std::size_t size() const { return points.size(); }
  double cost(std::size_t j, std::size_t k) const;
};

/// n equispaced points covering [lo, hi].
Grid1D uniform_grid(std::size_t n, double lo, double hi, double power = 2.0);

/// Cost matrix of the grid, optionally divided by its largest entry.
CostData grid_cost(const Grid1D& grid, bool normalize);

/// Exact transport cost between p and q through the monotone coupling.
/// Supports power 1 and 2 (UnsupportedError otherwise).
double ot_1d_monotone(std::span<const double> p, std::span<const double> q, const Grid1D& grid);

/// 2-Wasserstein barycenter via averaged quantile functions, with every atom
/// of the averaged quantile pushforward moved to its nearest grid point
/// (ties go left). Requires power == 2.
Histogram barycenter_1d_quantile(const std::vector<Histogram>& measures, const Grid1D& grid);

/// scale * ((1/m) sum_i W(p, q_i) - (1/m) sum_i W(p_star, q_i)).
double optimality_gap(std::span<const double> p, std::span<const double> p_star,
                      const std::vector<Histogram>& measures, const Grid1D& grid,
                      double scale = 1.0);

/// scale * (1/m) sum_i W(p, q_i).
double barycenter_objective_1d(std::span<const double> p, const std::vector<Histogram>& measures,
                               const Grid1D& grid, double scale = 1.0);

}  // namespace wbary
