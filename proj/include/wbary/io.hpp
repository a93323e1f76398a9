#pragma once

// CSV ingestion and emission. All numbers are written with '.' as the decimal
// separator in shortest round-trip form, so files are reproducible byte for byte.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wbary/oracles_1d.hpp"
#include "wbary/problem.hpp"
#include "wbary/report.hpp"

namespace wbary {

struct HistogramSet {
  std::vector<Histogram> measures;
  std::optional<Vector> grid;  // from a "# grid:" header row
};

/// One histogram per row. Rows must sum to 1 within 1e-6 unless `normalize`,
/// in which case they are rescaled. Throws ParseError (with the line number),
/// DomainError for negative mass, ShapeError for ragged rows.
HistogramSet parse_histograms(std::istream& in, bool normalize);
HistogramSet load_histograms(const std::string& path, bool normalize);

/// Square, nonnegative cost matrix, one row per line.
CostData load_cost_csv(const std::string& path);

struct GaussianSuiteSpec {
  std::size_t count = 10;
  std::size_t support = 100;
  double range_lo = -10.0, range_hi = 10.0;
  double mean_lo = -5.0, mean_hi = 5.0;
  double var_lo = 0.8, var_hi = 1.8;
  std::uint64_t seed = 0;
};

struct GaussianSuite {
  std::vector<Histogram> measures;
  Grid1D grid;
  Vector means;
  Vector variances;
};

/// Discretized Gaussian density at a grid, normalized to the simplex.
Histogram discretized_gaussian(const Grid1D& grid, double mean, double variance);

/// Deterministic for a given seed on every platform.
GaussianSuite gaussian_suite(const GaussianSuiteSpec& spec);

/// Uniform draws in [0, 1) from the top 53 bits of std::mt19937_64. Unlike
/// std::uniform_real_distribution the mapping is fixed, so sequences match
/// across standard libraries.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 engine_;
};

void write_report_csv(std::ostream& out, const RunReport& report);
void write_barycenter_csv(std::ostream& out, std::span<const double> p);

/// Self-contained saddle pair: dimensions, cost, measures, plans, p, duals.
void write_iterates(std::ostream& out, const BarycenterProblem& prob, const PrimalVector& x,
                    const DualVector& y);

struct SavedIterates {
  BarycenterProblem problem;
  PrimalVector x;
  DualVector y;
};

SavedIterates read_iterates(std::istream& in);

}  // namespace wbary
