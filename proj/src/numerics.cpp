#include "wbary/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "wbary/errors.hpp"

namespace wbary {

bool normalize_log_weights(std::span<double> log_w, std::span<double> out) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double e : log_w) {
    if (std::isnan(e) || e == std::numeric_limits<double>::infinity()) return false;
    mx = std::max(mx, e);
  }
  if (!std::isfinite(mx)) return false;
  double sum = 0.0;
  for (std::size_t l = 0; l < log_w.size(); ++l) {
    out[l] = std::exp(log_w[l] - mx);
    sum += out[l];
  }
  const double inv = 1.0 / sum;
  const double lse = mx + std::log(sum);
  for (std::size_t l = 0; l < log_w.size(); ++l) {
    out[l] *= inv;
    log_w[l] -= lse;
  }
  return std::isfinite(lse);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::size_t checked_count(double v, const char* what) {
  const double c = std::ceil(v);
  if (!(c <= 0x1.0p53)) throw ConfigError(std::string(what) + " is not representable (" + format_double(v) + ")");
  return static_cast<std::size_t>(std::max(c, 0.0));
}

}  // namespace wbary
