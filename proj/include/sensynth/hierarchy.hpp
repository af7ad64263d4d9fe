#ifndef SENSYNTH_HIERARCHY_HPP_
#define SENSYNTH_HIERARCHY_HPP_

#include <chrono>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sensynth/geometry.hpp"
#include "sensynth/placement.hpp"

namespace sensynth::hierarchy {

using Seconds = std::chrono::duration<double>;

struct SubArea {
  int col0 = 0;
  int row0 = 0;
  int width = 0;
  int height = 0;
};

struct Partition {
  int sub_w = 0;
  int sub_h = 0;
  std::vector<SubArea> areas;  // row-major
};

Partition partition(const GridRegion& region, int sub_w, int sub_h);

// [type][cell index] cover counts with exact predicates.
std::vector<std::vector<int>> coverage_counts(const Placement& placement,
                                              const GridRegion& region,
                                              std::span<const SensorSpec> specs);

enum class Method { kSmc, kMilp };

struct Config {
  int sub_w = 10;
  int sub_h = 10;
  bool repair = true;  // k=1 pass then residual pass; off: one full-k pass
  bool subarea_connectivity = false;
  Seconds budget{120.0};
  uint64_t seed = 0;
};

struct Result {
  Placement placement;  // primaries followed by relays
  int primary_count = 0;
  int relays_added = 0;
  int components_before_stitch = 0;
  bool timed_out = false;  // some sub-solve returned a non-minimal answer
  int areas = 0;
};

class SubareaInfeasible : public std::runtime_error {
 public:
  SubareaInfeasible(const std::string& what, int area)
      : std::runtime_error(what), area(area) {}
  int area;
};

// The budget ran out before any verified placement was found.
class SynthesisTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StitchFailed : public std::runtime_error {
 public:
  StitchFailed(const std::string& what, int components)
      : std::runtime_error(what), components(components) {}
  int components;
};

// Coverage and connectivity on the whole region in one solve.
Result synthesize_flat(const GridRegion& region, Method method,
                       std::span<const SensorSpec> specs, std::span<const int> k,
                       Seconds budget, uint64_t seed = 0);

// Falls back to synthesize_flat when the partition has a single sub-area.
Result hierarchical_synthesize(const GridRegion& region, Method method,
                               std::span<const SensorSpec> specs,
                               std::span<const int> k, const Config& config);

}  // namespace sensynth::hierarchy

#endif  // SENSYNTH_HIERARCHY_HPP_
