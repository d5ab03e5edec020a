#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "pwcsbf/engines.hpp"

namespace pwcsbf::detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Engine preconditions shared by all three synthesizers.
void check_engine_inputs(const TransitionBounds& bounds, const Partition& partition,
                         std::size_t horizon);

// Indices of cells that are not unsafe-flagged, ascending.
std::vector<std::size_t> safe_cells(const Partition& partition);

// Builds the official result: pins unsafe values, re-derives eta/beta through
// the certificate checker and fills the probability bound.
CertificateResult finalize_result(Engine engine, std::vector<double> values,
                                  const TransitionBounds& bounds, const Partition& partition,
                                  std::size_t horizon, std::size_t iterations, double wall_time,
                                  std::map<std::string, std::string> metadata);

std::string format_double(double v);

}  // namespace pwcsbf::detail
