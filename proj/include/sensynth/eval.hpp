#ifndef SENSYNTH_EVAL_HPP_
#define SENSYNTH_EVAL_HPP_

#include <span>
#include <vector>

#include "sensynth/geometry.hpp"
#include "sensynth/placement.hpp"

namespace sensynth::eval {

struct Shortfall {
  Cell cell;
  int type = 0;  // position in the spec list
  int achieved = 0;
  int demanded = 0;
};

struct VerificationReport {
  bool coverage_ok = false;
  std::vector<Shortfall> uncovered;
  bool connected = false;
  int component_count = 0;
  bool placement_ok = false;
  std::vector<int> misplaced;  // sensor indices inside obstacles or outside
  // [type][cell index]: number of sensors of that type covering the cell.
  std::vector<std::vector<int>> per_cell_counts;

  bool ok() const { return coverage_ok && connected && placement_ok; }
};

// Checks coverage, connectivity and placement with exact predicates only.
// Connectivity links two sensors when their distance is at most the smaller
// of their communication radii.
VerificationReport verify(const Placement& placement, const GridRegion& region,
                          std::span<const SensorSpec> specs,
                          const Demands& demands,
                          bool check_connectivity = true);

// [type][cell index] cover counts under the four-corner rule.
std::vector<std::vector<int>> coverage_counts(const Placement& placement,
                                              const GridRegion& region,
                                              std::span<const SensorSpec> specs);

// Sensor components under the exact communication relation.
int component_count(const Placement& placement,
                    std::span<const SensorSpec> specs);

// Mean per-cell cover count over open cells divided by the total demand k.
double coverage_redundancy(const Placement& placement, const GridRegion& region,
                           std::span<const SensorSpec> specs,
                           std::span<const int> k);

}  // namespace sensynth::eval

#endif  // SENSYNTH_EVAL_HPP_
