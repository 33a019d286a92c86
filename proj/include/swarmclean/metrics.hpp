#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "swarmclean/geometry.hpp"

namespace swarmclean {

/// Observables sampled once per simulated second.
struct MetricsRecord {
  long t = 0;               ///< seconds since start
  double mean_cue = 0.0;    ///< arena-wide mean intensity
  double ratio_within_rc = 0.0;
  double coherency_m = 0.0;  ///< mean pairwise distance, metres

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

using MetricsSeries = std::vector<MetricsRecord>;

/// Fraction of robots whose centre lies in the closed disc of radius `r_c`.
/// An empty swarm reports 0.
inline double ratio_within(std::span<const Vec2> positions, Vec2 cue_center, double r_c) {
  if (positions.empty()) return 0.0;
  std::size_t inside = 0;
  for (const Vec2& p : positions)
    if (distance(p, cue_center) <= r_c) ++inside;
  return static_cast<double>(inside) / static_cast<double>(positions.size());
}

/// Mean distance over unordered robot pairs, converted from cm to m.
/// Fewer than two robots report 0.
inline double coherency(std::span<const Vec2> positions) {
  const std::size_t n = positions.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sum += distance(positions[i], positions[j]);
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return sum / pairs / 100.0;
}

}  // namespace swarmclean
