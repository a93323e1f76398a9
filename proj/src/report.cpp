#include "wbary/report.hpp"

#include <algorithm>

namespace wbary {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::mp: return "mp";
    case Algorithm::de: return "de";
    case Algorithm::ibp: return "ibp";
  }
  return "unknown";
}

std::size_t effective_stride(const RunOptions& opts, std::size_t iters) {
  if (opts.log_stride > 0) return opts.log_stride;
  return std::max<std::size_t>(1, iters / 200);
}

}  // namespace wbary
