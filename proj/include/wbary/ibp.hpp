#pragma once

// Iterative Bregman projections for the entropically regularized barycenter.
//
// Plan i is diag(u_i) K diag(v_i) with K = exp(-C / reg). Each sweep projects
// onto the column constraints (v_i = q_i / K'u_i), sets p to the geometric
// mean of the row marginals and projects onto the shared row constraint
// (u_i = p / K v_i). The naive mode works with K itself and fails once it
// underflows; the stabilized mode runs the same sweep on log-scalings.

#include <optional>

#include "wbary/problem.hpp"
#include "wbary/report.hpp"

namespace wbary {

struct IBPConfig {
  double reg = 1e-2;
  std::size_t iters = 1000;
  bool stabilized = false;
  /// Stop when the mean L1 column-marginal violation drops below this.
  double tol = 1e-6;
};

enum class IBPStatus { converged, iteration_cap, underflow_degenerate };

std::string to_string(IBPStatus s);

struct IBPResult {
  IBPStatus status = IBPStatus::converged;
  std::optional<Histogram> barycenter;  // empty on underflow_degenerate
  RunReport report;
  std::size_t failed_at = 0;  // sweep index of the failure, if any
  /// Entropic dual objective after each sweep; nondecreasing in exact arithmetic.
  std::vector<double> dual_objective;
};

/// Throws ConfigError if reg <= 0 or iters == 0.
IBPResult ibp_barycenter(const BarycenterProblem& prob, const IBPConfig& cfg,
                         const RunOptions& opts = {});

}  // namespace wbary
