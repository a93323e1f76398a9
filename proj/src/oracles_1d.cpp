#include "wbary/oracles_1d.hpp"

#include <algorithm>
#include <cmath>

#include "wbary/errors.hpp"

namespace wbary {

Grid1D::Grid1D(Vector pts, double pw) : points(std::move(pts)), power(pw) {
  if (points.size() < 2) throw ShapeError("grid needs at least two points");
  for (std::size_t j = 1; j < points.size(); ++j) {
    if (!(points[j] > points[j - 1])) throw ShapeError("grid points must be strictly increasing");
  }
  if (!(power >= 1.0)) throw DomainError("grid cost exponent must be >= 1");
}

double Grid1D::cost(std::size_t j, std::size_t k) const {
  const double dist = std::abs(points[j] - points[k]);
  return power == 2.0 ? dist * dist : std::pow(dist, power);
}

Grid1D uniform_grid(std::size_t n, double lo, double hi, double power) {
  if (n < 2) throw ShapeError("grid needs at least two points");
  Vector pts(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) pts[j] = lo + h * static_cast<double>(j);
  pts.back() = hi;
  return Grid1D(std::move(pts), power);
}

CostData grid_cost(const Grid1D& grid, bool normalize) {
  const std::size_t n = grid.size();
  Vector flat(n * n);
  double mx = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      flat[j * n + k] = grid.cost(j, k);
      mx = std::max(mx, flat[j * n + k]);
    }
  }
  if (normalize && mx > 0.0) {
    for (double& c : flat) c /= mx;
  }
  return vectorize_cost(n, flat);
}

double ot_1d_monotone(std::span<const double> p, std::span<const double> q, const Grid1D& grid) {
  const std::size_t n = grid.size();
  if (p.size() != n || q.size() != n) throw ShapeError("ot_1d_monotone: length mismatch");
  if (grid.power != 1.0 && grid.power != 2.0) {
    throw UnsupportedError("ot_1d_monotone: only cost exponents 1 and 2 are supported");
  }
  double cost = 0.0;
  std::size_t i = 0, j = 0;
  double ra = p[0], rb = q[0];
  while (i < n && j < n) {
    if (ra < rb) {
      cost += ra * grid.cost(i, j);
      rb -= ra;
      if (++i < n) ra = p[i];
    } else {
      cost += rb * grid.cost(i, j);
      ra -= rb;
      if (++j < n) rb = q[j];
    }
  }
  return cost;
}

Histogram barycenter_1d_quantile(const std::vector<Histogram>& measures, const Grid1D& grid) {
  if (grid.power != 2.0) {
    throw UnsupportedError("barycenter_1d_quantile: quantile averaging needs power 2");
  }
  const std::size_t n = grid.size();
  const std::size_t m = measures.size();
  if (m == 0) throw ShapeError("barycenter_1d_quantile: no measures");
  for (const auto& q : measures) {
    if (q.size() != n) throw ShapeError("barycenter_1d_quantile: measure does not match grid");
  }

  std::vector<std::size_t> idx(m, 0);
  Vector remaining(m);
  for (std::size_t i = 0; i < m; ++i) remaining[i] = measures[i][0];

  auto nearest = [&](double loc) {
    const auto it = std::lower_bound(grid.points.begin(), grid.points.end(), loc);
    if (it == grid.points.begin()) return std::size_t{0};
    if (it == grid.points.end()) return n - 1;
    const std::size_t k = static_cast<std::size_t>(it - grid.points.begin());
    return (loc - grid.points[k - 1] <= grid.points[k] - loc) ? k - 1 : k;
  };

  Vector out(n, 0.0);
  while (true) {
    // Skip exhausted atoms.
    bool finished = false;
    for (std::size_t i = 0; i < m; ++i) {
      while (remaining[i] <= 0.0) {
        if (++idx[i] >= n) {
          finished = true;
          break;
        }
        remaining[i] = measures[i][idx[i]];
      }
      if (finished) break;
    }
    if (finished) break;

    double step = remaining[0];
    double loc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      step = std::min(step, remaining[i]);
      loc += grid.points[idx[i]];
    }
    loc /= static_cast<double>(m);
    out[nearest(loc)] += step;
    for (std::size_t i = 0; i < m; ++i) remaining[i] -= step;
  }

  double total = 0.0;
  for (double e : out) total += e;
  for (double& e : out) e /= total;
  return Histogram(std::move(out), 1e-9);
}

double barycenter_objective_1d(std::span<const double> p, const std::vector<Histogram>& measures,
                               const Grid1D& grid, double scale) {
  if (measures.empty()) throw ShapeError("barycenter_objective_1d: no measures");
  double s = 0.0;
  for (const auto& q : measures) s += ot_1d_monotone(p, q.span(), grid);
  return scale * s / static_cast<double>(measures.size());
}

double optimality_gap(std::span<const double> p, std::span<const double> p_star,
                      const std::vector<Histogram>& measures, const Grid1D& grid, double scale) {
  return barycenter_objective_1d(p, measures, grid, scale) -
         barycenter_objective_1d(p_star, measures, grid, scale);
}

}  // namespace wbary
