#ifndef SENSYNTH_SCENARIO_HPP_
#define SENSYNTH_SCENARIO_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sensynth/geometry.hpp"

namespace sensynth::scenario {

struct ScenarioSpec {
  int width = 20;
  int height = 20;
  double cell_size = 1.0;
  double extent = 0.0;  // target occupied fraction in [0, 1)
  double gamma_target = 0.0;
  uint64_t seed = 0;
  std::vector<SensorSpec> sensors;
  std::vector<int> k;
};

// A region plus the sensor library and demands it is meant to be solved with.
struct Scenario {
  GridRegion region;
  std::vector<SensorSpec> sensors;
  std::vector<int> k;
  uint64_t seed = 0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

class UndefinedGamma : public std::domain_error {
 public:
  UndefinedGamma() : std::domain_error("dispersion needs an occupied cell") {}
};

// Mean number of occupied 8-neighbours over occupied cells.
double compute_gamma(const GridRegion& region);

struct Generated {
  GridRegion region;
  double extent_achieved = 0.0;
  std::optional<double> gamma_achieved;  // empty when nothing is occupied
  bool gamma_in_tolerance = true;        // within 0.5 of the target
  int attempts = 0;
};

class GenerationFailed : public std::runtime_error {
 public:
  GenerationFailed(const std::string& what, double extent, double gamma)
      : std::runtime_error(what), extent(extent), gamma(gamma) {}
  double extent;
  double gamma;
};

// Deterministic in the spec. Places rectangular obstacle clusters sized from
// the dispersion target, fixes the count to round(extent * cells), then
// swaps cells to move dispersion toward the target. Free space stays
// 4-connected.
Generated generate(const ScenarioSpec& spec);

// Intrinsic dispersion of an isolated a x b block.
double block_gamma(int a, int b);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
        line(line),
        column(column) {}
  int line;
  int column;
};

// '#' occupied, '.' open; first line is the top row. Throws ParseError.
GridRegion parse_ascii_map(const std::string& text, double cell_size = 1.0);
std::string to_ascii_map(const GridRegion& region);

// JSON with width, height, cell_size_m, occupancy (top row first), sensors,
// k and seed. Throws ParseError on malformed input.
std::string to_json(const Scenario& scenario);
Scenario from_json(const std::string& text);

Scenario load(const std::string& path);
void save(const Scenario& scenario, const std::string& path);

}  // namespace sensynth::scenario

#endif  // SENSYNTH_SCENARIO_HPP_
