#ifndef SENSYNTH_PLACEMENT_HPP_
#define SENSYNTH_PLACEMENT_HPP_

#include <span>
#include <vector>

#include "sensynth/geometry.hpp"

namespace sensynth {

enum class Role { kPrimary, kRelay };

struct PlacedSensor {
  Point position;
  int type_id = 0;
  Role role = Role::kPrimary;
};

using Placement = std::vector<PlacedSensor>;

// Coverage demand per sensor type (position in the spec list) and per cell
// (GridRegion::index). Occupied cells always carry zero demand.
struct Demands {
  std::vector<std::vector<int>> per_type;

  static Demands Uniform(const GridRegion& region, std::span<const int> k);
  int types() const { return static_cast<int>(per_type.size()); }
  int at(int type, int cell) const { return per_type[type][cell]; }
  int max_demand(int type) const;
  bool any_positive() const;
};

// Position of `type_id` in `specs`; throws std::invalid_argument if absent.
int type_index(std::span<const SensorSpec> specs, int type_id);

// A sensor at p covers corner c iff |p - c| <= r_s and the open segment sees
// c. A cell is covered iff all four of its corners are.
bool covers_point(Point p, double r_s, Point corner, const GridRegion& region);
bool covers_cell(Point p, double r_s, Cell cell, const GridRegion& region);

// Point inside some occupied cell's closed rectangle, or outside the region.
bool placement_blocked(Point p, const GridRegion& region);

}  // namespace sensynth

#endif  // SENSYNTH_PLACEMENT_HPP_
