#pragma once

// Random problem instances and feasible points for tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include "wbary/io.hpp"
#include "wbary/oracles_1d.hpp"
#include "wbary/problem.hpp"

namespace wbary::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : src_(seed) {}

  double uniform() { return src_.next(); }
  double uniform(double lo, double hi) { return src_.uniform(lo, hi); }
  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

  // Gamma(shape) draw for shape in (0, 1] via Ahrens-Dieter style boost:
  // Gamma(a) = Gamma(a + 1) U^(1/a), with Gamma(a + 1) from Marsaglia-Tsang.
  double gamma(double shape) {
    if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform_open(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  double normal() {
    const double u1 = uniform_open(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  double uniform_open() {
    double u;
    do u = uniform();
    while (u <= 0.0);
    return u;
  }
  UniformSource src_;
};

/// Dirichlet(alpha, ..., alpha) sample; small alpha concentrates near vertices.
inline Vector random_simplex(Rng& rng, std::size_t n, double alpha = 1.0) {
  Vector w(n);
  double sum = 0.0;
  for (double& e : w) {
    e = rng.gamma(alpha);
    sum += e;
  }
  if (!(sum > 0.0)) {
    std::fill(w.begin(), w.end(), 0.0);
    w[rng.index(n)] = 1.0;
    return w;
  }
  for (double& e : w) e /= sum;
  return w;
}

/// Squared distances between random points of the unit square, scaled to max 1.
inline CostData random_cost(Rng& rng, std::size_t n) {
  std::vector<double> px(n), py(n);
  for (std::size_t j = 0; j < n; ++j) {
    px[j] = rng.uniform();
    py[j] = rng.uniform();
  }
  Vector d(n * n);
  double mx = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const double dx = px[j] - px[k], dy = py[j] - py[k];
      d[j * n + k] = dx * dx + dy * dy;
      mx = std::max(mx, d[j * n + k]);
    }
  }
  for (double& e : d) e /= mx;
  return vectorize_cost(n, d);
}

inline BarycenterProblem random_problem(Rng& rng, std::size_t n, std::size_t m) {
  std::vector<Histogram> qs;
  for (std::size_t i = 0; i < m; ++i) qs.emplace_back(random_simplex(rng, n), 1e-9);
  return BarycenterProblem(std::move(qs), random_cost(rng, n));
}

/// Measures on the grid 0..n-1 with the squared distance, scaled to max 1.
inline BarycenterProblem random_grid_problem(Rng& rng, std::size_t n, std::size_t m,
                                             double alpha = 1.0) {
  std::vector<Histogram> qs;
  for (std::size_t i = 0; i < m; ++i) qs.emplace_back(random_simplex(rng, n, alpha), 1e-9);
  Vector pts(n);
  for (std::size_t j = 0; j < n; ++j) pts[j] = static_cast<double>(j);
  return BarycenterProblem(std::move(qs), grid_cost(Grid1D(pts, 2.0), true));
}

inline PrimalPoint random_primal(Rng& rng, std::size_t n, std::size_t m, double alpha = 1.0) {
  PrimalPoint x(n, m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vector w = random_simplex(rng, n * n, alpha);
    std::copy(w.begin(), w.end(), x.plan(i).begin());
  }
  x.bary = random_simplex(rng, n, alpha);
  return x;
}

inline DualPoint random_dual(Rng& rng, std::size_t n, std::size_t m, double corner_prob = 0.0) {
  DualPoint y(n, m);
  for (double& e : y.duals) {
    e = rng.uniform() < corner_prob ? (rng.uniform() < 0.5 ? -1.0 : 1.0) : rng.uniform(-1.0, 1.0);
  }
  return y;
}

}  // namespace wbary::testing
