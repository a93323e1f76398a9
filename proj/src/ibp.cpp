#include "wbary/ibp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wbary/errors.hpp"
#include "wbary/numerics.hpp"

namespace wbary {

std::string to_string(IBPStatus s) {
  switch (s) {
    case IBPStatus::converged: return "converged";
    case IBPStatus::iteration_cap: return "iteration-cap";
    case IBPStatus::underflow_degenerate: return "underflow-degenerate";
  }
  return "unknown";
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

// Scaling vectors for all m measures, row-major m x n.
struct Scalings {
  Vector row;  // u (naive) or log u (stabilized)
  Vector col;  // v (naive) or log v (stabilized)
};

class NaiveSweeper {
 public:
  NaiveSweeper(const BarycenterProblem& prob, double reg)
      : prob_(prob), n_(prob.n), m_(prob.m), kernel_(n_ * n_), kv_(m_ * n_), ktu_(m_ * n_) {
    for (std::size_t l = 0; l < n_ * n_; ++l) kernel_[l] = std::exp(-prob.cost.d[l] / reg);
    s_.row.assign(m_ * n_, 1.0);
    s_.col.assign(m_ * n_, 1.0);
  }

  bool kernel_degenerate() const {
    for (std::size_t j = 0; j < n_; ++j) {
      bool any = false;
      for (std::size_t k = 0; k < n_ && !any; ++k) any = kernel_[j * n_ + k] > 0.0;
      if (!any) return true;
    }
    return false;
  }

  // Mean L1 violation of the column marginals at the current scalings.
  double column_violation() {
    update_ktu();
    double err = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t k = 0; k < n_; ++k) {
        err += std::abs(s_.col[i * n_ + k] * ktu_[i * n_ + k] - prob_.measures[i][k]);
      }
    }
    return err / static_cast<double>(m_);
  }

  // One sweep; returns false on a non-finite or zero-divisor intermediate.
  bool sweep(Vector& p) {
    update_ktu();
    for (std::size_t l = 0; l < m_ * n_; ++l) {
      if (!(ktu_[l] > 0.0)) return false;
      s_.col[l] = prob_.measures[l / n_][l % n_] / ktu_[l];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n_; ++k) s += kernel_[j * n_ + k] * s_.col[i * n_ + k];
        kv_[i * n_ + j] = s;
      }
    }
    const double w = 1.0 / static_cast<double>(m_);
    for (std::size_t j = 0; j < n_; ++j) {
      double g = 1.0;
      for (std::size_t i = 0; i < m_; ++i) g *= std::pow(s_.row[i * n_ + j] * kv_[i * n_ + j], w);
      p[j] = g;
    }
    for (std::size_t l = 0; l < m_ * n_; ++l) {
      if (!(kv_[l] > 0.0)) return false;
      s_.row[l] = p[l % n_] / kv_[l];
    }
    return all_finite(s_.row) && all_finite(s_.col) && all_finite(p);
  }

  double dual_objective(const Vector& p, double reg) const {
    double val = 0.0;
    for (std::size_t l = 0; l < m_ * n_; ++l) {
      const double q = prob_.measures[l / n_][l % n_];
      if (q > 0.0) val += q * std::log(s_.col[l]);
    }
    double mass = 0.0;
    for (double e : p) mass += e;
    return reg * (val - static_cast<double>(m_) * mass);
  }

  double transport_cost() const {
    double c = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t l = 0; l < n_ * n_; ++l) {
        c += prob_.cost.d[l] * s_.row[i * n_ + l / n_] * kernel_[l] * s_.col[i * n_ + l % n_];
      }
    }
    return c / static_cast<double>(m_);
  }

 private:
  void update_ktu() {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t k = 0; k < n_; ++k) ktu_[i * n_ + k] = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        const double uj = s_.row[i * n_ + j];
        for (std::size_t k = 0; k < n_; ++k) ktu_[i * n_ + k] += kernel_[j * n_ + k] * uj;
      }
    }
  }

  const BarycenterProblem& prob_;
  std::size_t n_, m_;
  Vector kernel_;
  Vector kv_, ktu_;
  Scalings s_;
};

class LogSweeper {
 public:
  LogSweeper(const BarycenterProblem& prob, double reg)
      : prob_(prob), n_(prob.n), m_(prob.m), log_kernel_(n_ * n_), lkv_(m_ * n_),
        lktu_(m_ * n_), scratch_(n_), log_p_(n_) {
    for (std::size_t l = 0; l < n_ * n_; ++l) log_kernel_[l] = -prob.cost.d[l] / reg;
    s_.row.assign(m_ * n_, 0.0);
    s_.col.assign(m_ * n_, 0.0);
  }

  double column_violation() {
    update_lktu();
    double err = 0.0;
    for (std::size_t l = 0; l < m_ * n_; ++l) {
      const double marg = std::exp(s_.col[l] + lktu_[l]);
      err += std::abs((std::isfinite(marg) ? marg : 0.0) - prob_.measures[l / n_][l % n_]);
    }
    return err / static_cast<double>(m_);
  }

  bool sweep(Vector& p) {
    update_lktu();
    for (std::size_t l = 0; l < m_ * n_; ++l) {
      const double q = prob_.measures[l / n_][l % n_];
      s_.col[l] = q > 0.0 ? std::log(q) - lktu_[l] : kNegInf;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        for (std::size_t k = 0; k < n_; ++k) {
          scratch_[k] = log_kernel_[j * n_ + k] + s_.col[i * n_ + k];
        }
        lkv_[i * n_ + j] = log_sum_exp(scratch_);
      }
    }
    const double w = 1.0 / static_cast<double>(m_);
    for (std::size_t j = 0; j < n_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < m_; ++i) s += s_.row[i * n_ + j] + lkv_[i * n_ + j];
      log_p_[j] = w * s;
    }
    for (std::size_t l = 0; l < m_ * n_; ++l) {
      const double lp = log_p_[l % n_];
      s_.row[l] = lp == kNegInf ? kNegInf : lp - lkv_[l];
    }
    double mx = kNegInf;
    for (double e : log_p_) mx = std::max(mx, e);
    if (!std::isfinite(mx)) return false;
    double sum = 0.0;
    for (std::size_t j = 0; j < n_; ++j) sum += std::exp(log_p_[j] - mx);
    for (std::size_t j = 0; j < n_; ++j) p[j] = std::exp(log_p_[j] - mx) / sum;
    mass_log_ = mx + std::log(sum);
    return all_finite(p);
  }

  double dual_objective(double reg) const {
    double val = 0.0;
    for (std::size_t l = 0; l < m_ * n_; ++l) {
      const double q = prob_.measures[l / n_][l % n_];
      if (q > 0.0) val += q * s_.col[l];
    }
    return reg * (val - static_cast<double>(m_) * std::exp(mass_log_));
  }

  double transport_cost() const {
    double c = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t l = 0; l < n_ * n_; ++l) {
        const double e = s_.row[i * n_ + l / n_] + log_kernel_[l] + s_.col[i * n_ + l % n_];
        if (e > kNegInf) c += prob_.cost.d[l] * std::exp(e);
      }
    }
    return c / static_cast<double>(m_);
  }

 private:
  static double log_sum_exp(const Vector& v) {
    double mx = kNegInf;
    for (double e : v) mx = std::max(mx, e);
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (double e : v) s += std::exp(e - mx);
    return mx + std::log(s);
  }

  void update_lktu() {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t k = 0; k < n_; ++k) {
        for (std::size_t j = 0; j < n_; ++j) {
          scratch_[j] = log_kernel_[j * n_ + k] + s_.row[i * n_ + j];
        }
        lktu_[i * n_ + k] = log_sum_exp(scratch_);
      }
    }
  }

  const BarycenterProblem& prob_;
  std::size_t n_, m_;
  Vector log_kernel_;
  Vector lkv_, lktu_;
  Vector scratch_;
  Vector log_p_;
  double mass_log_ = 0.0;
  Scalings s_;
};

template <class Sweeper, class DualFn>
IBPResult run_sweeps(Sweeper& sw, const BarycenterProblem& prob, const IBPConfig& cfg,
                     const RunOptions& opts, DualFn dual) {
  IBPResult res;
  RunReport& report = res.report;
  report.algorithm = Algorithm::ibp;
  report.config = {{"reg", format_double(cfg.reg)},
                   {"iters", std::to_string(cfg.iters)},
                   {"stabilized", cfg.stabilized ? "true" : "false"},
                   {"tol", format_double(cfg.tol)}};
  const std::size_t stride = effective_stride(opts, cfg.iters);
  Stopwatch clock(opts.record_time);
  Vector p(prob.n, 0.0);

  auto normalized = [&] {
    Vector out = p;
    double s = 0.0;
    for (double e : out) s += e;
    for (double& e : out) e /= s;
    return out;
  };
  auto fail = [&](std::size_t t) {
    res.status = IBPStatus::underflow_degenerate;
    res.failed_at = t;
    report.status = to_string(res.status);
    report.iterations_run = t;
    return res;
  };

  res.status = IBPStatus::iteration_cap;
  std::size_t t = 1;
  for (; t <= cfg.iters; ++t) {
    if (!sw.sweep(p)) return fail(t);
    res.dual_objective.push_back(dual(p));

    const double viol = sw.column_violation();
    if (!std::isfinite(viol)) return fail(t);
    const bool done = viol <= cfg.tol;
    if (t % stride == 0 || t == cfg.iters || done) {
      IterationRecord rec;
      rec.iteration = t;
      rec.elapsed_seconds = clock.seconds();
      rec.objective = sw.transport_cost();
      if (opts.bary_observer) rec.optimality_gap = opts.bary_observer(normalized());
      report.records.push_back(rec);
    }
    if (done) {
      res.status = IBPStatus::converged;
      break;
    }
  }
  report.iterations_run = std::min(t, cfg.iters);
  report.barycenter = normalized();
  report.status = to_string(res.status);
  res.barycenter = Histogram(report.barycenter, 1e-9);
  return res;
}

}  // namespace

IBPResult ibp_barycenter(const BarycenterProblem& prob, const IBPConfig& cfg,
                         const RunOptions& opts) {
  if (!(cfg.reg > 0.0)) throw ConfigError("ibp: regularization must be positive");
  if (cfg.iters == 0) throw ConfigError("ibp: iteration count must be positive");

  if (cfg.stabilized) {
    LogSweeper sw(prob, cfg.reg);
    return run_sweeps(sw, prob, cfg, opts, [&](const Vector&) { return sw.dual_objective(cfg.reg); });
  }
  NaiveSweeper sw(prob, cfg.reg);
  if (sw.kernel_degenerate()) {
    IBPResult res;
    res.report.algorithm = Algorithm::ibp;
    res.status = IBPStatus::underflow_degenerate;
    res.report.status = to_string(res.status);
    return res;
  }
  return run_sweeps(sw, prob, cfg, opts,
                    [&](const Vector& p) { return sw.dual_objective(p, cfg.reg); });
}

}  // namespace wbary
