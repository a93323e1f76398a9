#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace wbary {

/// Softmax in log domain. On return `out` holds exp(log_w) / sum exp(log_w) and
/// `log_w` is shifted to log(out). Returns false if the input or the
/// normalizer is not finite.
bool normalize_log_weights(std::span<double> log_w, std::span<double> out);

/// Shortest round-trip decimal representation, independent of locale.
std::string format_double(double v);

/// ceil(v) as a count. Throws ConfigError when v is not finite or above 2^53.
std::size_t checked_count(double v, const char* what);

}  // namespace wbary
