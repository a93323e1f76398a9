#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wbary/problem.hpp"

namespace wbary {

enum class Algorithm { mp, de, ibp };

std::string to_string(Algorithm a);

struct IterationRecord {
  std::size_t iteration = 0;
  double elapsed_seconds = 0.0;
  std::optional<double> duality_gap;  // absent for IBP (no dual iterate)
  double objective = 0.0;
  std::optional<double> optimality_gap;
};

struct RunReport {
  Algorithm algorithm = Algorithm::mp;
  std::vector<IterationRecord> records;
  std::vector<std::pair<std::string, std::string>> config;
  Vector barycenter;
  std::size_t iterations_run = 0;
  bool early_exit = false;
  std::string status = "ok";
};

/// Knobs shared by the iterative solvers.
struct RunOptions {
  /// Record every `log_stride` iterations; 0 means max(1, N / 200).
  std::size_t log_stride = 0;
  /// Stop as soon as a recorded certificate gap is <= eps.
  bool early_exit = true;
  /// Overrides the theoretical iteration count when set.
  std::optional<std::size_t> max_iters;
  /// Optional optimality-gap oracle evaluated on the barycenter at each record.
  std::function<std::optional<double>(std::span<const double>)> bary_observer;
  /// When false, elapsed_seconds is written as 0 so reports are byte-reproducible.
  bool record_time = true;
};

std::size_t effective_stride(const RunOptions& opts, std::size_t iters);

/// Monotonic stopwatch reporting seconds at microsecond resolution.
class Stopwatch {
 public:
  explicit Stopwatch(bool enabled = true)
      : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}

  double seconds() const {
    if (!enabled_) return 0.0;
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - start_);
    return static_cast<double>(us.count()) * 1e-6;
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace wbary
