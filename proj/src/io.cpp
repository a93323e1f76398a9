#include "wbary/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wbary/errors.hpp"
#include "wbary/numerics.hpp"

namespace wbary {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ParseError("not a number: '" + std::string(field) + "'", line);
  }
  return v;
}

Vector parse_row(std::string_view text, std::size_t line) {
  Vector row;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const auto field = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    row.push_back(parse_number(field, line));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return row;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return in;
}

void write_row(std::ostream& out, std::string_view tag, std::span<const double> values) {
  out << tag;
  for (double v : values) out << ',' << format_double(v);
  out << '\n';
}

}  // namespace

HistogramSet parse_histograms(std::istream& in, bool normalize) {
  HistogramSet set;
  std::string raw;
  std::size_t line = 0;
  std::size_t width = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text = trim(raw);
    if (text.empty()) continue;
    if (text.front() == '#') {
      text.remove_prefix(1);
      text = trim(text);
      if (text.rfind("grid:", 0) == 0) {
        if (set.grid) throw ParseError("duplicate grid header", line);
        set.grid = parse_row(trim(text.substr(5)), line);
      }
      continue;
    }
    Vector row = parse_row(text, line);
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw ShapeError("line " + std::to_string(line) + ": expected " + std::to_string(width) +
                       " columns, found " + std::to_string(row.size()));
    }
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) throw DomainError("line " + std::to_string(line) + ": negative mass");
      sum += v;
    }
    if (!normalize && std::abs(sum - 1.0) > 1e-6) {
      throw DomainError("line " + std::to_string(line) + ": row sums to " + format_double(sum) +
                        " (use --normalize to rescale)");
    }
    if (!(sum > 0.0)) throw DomainError("line " + std::to_string(line) + ": row has no mass");
    for (double& v : row) v /= sum;
    set.measures.emplace_back(std::move(row), 1e-9);
  }
  if (set.measures.empty()) throw ParseError("no histograms found", line);
  if (set.grid && set.grid->size() != width) {
    throw ShapeError("grid header has " + std::to_string(set.grid->size()) +
                     " points but histograms have " + std::to_string(width));
  }
  return set;
}

HistogramSet load_histograms(const std::string& path, bool normalize) {
  auto in = open_or_throw(path);
  return parse_histograms(in, normalize);
}

CostData load_cost_csv(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<Vector> rows;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    rows.push_back(parse_row(text, line));
  }
  return vectorize_cost(rows);
}

Histogram discretized_gaussian(const Grid1D& grid, double mean, double variance) {
  Vector w(grid.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double z = grid.points[j] - mean;
    w[j] = std::exp(-z * z / (2.0 * variance));
    sum += w[j];
  }
  for (double& e : w) e /= sum;
  return Histogram(std::move(w), 1e-9);
}

GaussianSuite gaussian_suite(const GaussianSuiteSpec& spec) {
  GaussianSuite suite{{}, uniform_grid(spec.support, spec.range_lo, spec.range_hi, 2.0), {}, {}};
  UniformSource rng(spec.seed);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const double mean = rng.uniform(spec.mean_lo, spec.mean_hi);
    const double var = rng.uniform(spec.var_lo, spec.var_hi);
    suite.means.push_back(mean);
    suite.variances.push_back(var);
    suite.measures.push_back(discretized_gaussian(suite.grid, mean, var));
  }
  return suite;
}

void write_report_csv(std::ostream& out, const RunReport& report) {
  out << "iteration,elapsed_seconds,duality_gap,objective,optimality_gap\n";
  for (const auto& r : report.records) {
    out << r.iteration << ',' << format_double(r.elapsed_seconds) << ',';
    if (r.duality_gap) out << format_double(*r.duality_gap);
    out << ',' << format_double(r.objective) << ',';
    if (r.optimality_gap) out << format_double(*r.optimality_gap);
    out << '\n';
  }
}

void write_barycenter_csv(std::ostream& out, std::span<const double> p) {
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j) out << ',';
    out << format_double(p[j]);
  }
  out << '\n';
}

void write_iterates(std::ostream& out, const BarycenterProblem& prob, const PrimalVector& x,
                    const DualVector& y) {
  check_shapes(prob, x);
  check_shapes(prob, y);
  out << "# wbary saddle iterates\n";
  out << "dims," << prob.n << ',' << prob.m << '\n';
  write_row(out, "cost", prob.cost.d);
  for (const auto& q : prob.measures) write_row(out, "measure", q.span());
  for (std::size_t i = 0; i < prob.m; ++i) write_row(out, "plan", x.plan(i));
  write_row(out, "bary", x.bary);
  for (std::size_t i = 0; i < prob.m; ++i) write_row(out, "dual", y.block(i));
}

SavedIterates read_iterates(std::istream& in) {
  std::size_t n = 0, m = 0;
  Vector cost;
  std::vector<Histogram> measures;
  std::vector<Vector> plans, duals;
  Vector bary;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const std::size_t comma = text.find(',');
    if (comma == std::string_view::npos) throw ParseError("missing row tag", line);
    const std::string_view tag = text.substr(0, comma);
    const std::string_view rest = text.substr(comma + 1);
    if (tag == "dims") {
      const Vector d = parse_row(rest, line);
      if (d.size() != 2) throw ParseError("dims row needs n and m", line);
      n = static_cast<std::size_t>(d[0]);
      m = static_cast<std::size_t>(d[1]);
      continue;
    }
    if (n == 0) throw ParseError("dims row must come first", line);
    Vector row = parse_row(rest, line);
    auto expect = [&](std::size_t len) {
      if (row.size() != len) throw ParseError("row '" + std::string(tag) + "' has wrong length", line);
    };
    if (tag == "cost") {
      expect(n * n);
      cost = std::move(row);
    } else if (tag == "measure") {
      expect(n);
      measures.emplace_back(std::move(row), 1e-9);
    } else if (tag == "plan") {
      expect(n * n);
      plans.push_back(std::move(row));
    } else if (tag == "bary") {
      expect(n);
      bary = std::move(row);
    } else if (tag == "dual") {
      expect(2 * n);
      duals.push_back(std::move(row));
    } else {
      throw ParseError("unknown row tag '" + std::string(tag) + "'", line);
    }
  }
  if (n == 0 || cost.empty() || measures.size() != m || plans.size() != m || duals.size() != m ||
      bary.size() != n) {
    throw ParseError("incomplete iterates file", line);
  }
  SavedIterates saved{BarycenterProblem(std::move(measures), vectorize_cost(n, cost)),
                      PrimalVector(n, m), DualVector(n, m)};
  for (std::size_t i = 0; i < m; ++i) {
    std::copy(plans[i].begin(), plans[i].end(), saved.x.plan(i).begin());
    std::copy(duals[i].begin(), duals[i].end(), saved.y.block(i).begin());
  }
  saved.x.bary = std::move(bary);
  return saved;
}

}  // namespace wbary
