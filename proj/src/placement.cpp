#include "sensynth/placement.hpp"

#include <algorithm>
#include <cmath>

namespace sensynth {

Demands Demands::Uniform(const GridRegion& region, std::span<const int> k) {
  Demands d;
  for (int kt : k) {
    if (kt < 0) throw std::invalid_argument("negative coverage demand");
    std::vector<int> cells(region.cell_count(), 0);
    for (int i = 0; i < region.cell_count(); ++i) {
      if (!region.occupied(i)) cells[i] = kt;
    }
    d.per_type.push_back(std::move(cells));
  }
  return d;
}

int Demands::max_demand(int type) const {
  const auto& v = per_type[type];
  return v.empty() ? 0 : *std::max_element(v.begin(), v.end());
}

bool Demands::any_positive() const {
  for (int t = 0; t < types(); ++t) {
    if (max_demand(t) > 0) return true;
  }
  return false;
}

int type_index(std::span<const SensorSpec> specs, int type_id) {
  for (size_t t = 0; t < specs.size(); ++t) {
    if (specs[t].type_id == type_id) return static_cast<int>(t);
  }
  throw std::invalid_argument("unknown sensor type id " +
                              std::to_string(type_id));
}

bool covers_point(Point p, double r_s, Point corner, const GridRegion& region) {
  return exact_distance(p, corner) <= r_s && exact_los(p, corner, region);
}

bool covers_cell(Point p, double r_s, Cell cell, const GridRegion& region) {
  for (const Point& c : region.corners(cell)) {
    if (!covers_point(p, r_s, c, region)) return false;
  }
  return true;
}

bool placement_blocked(Point p, const GridRegion& region) {
  const Rect b = region.bounds();
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < b.x_min ||
      p.x > b.x_max || p.y < b.y_min || p.y > b.y_max) {
    return true;
  }
  const double s = region.cell_size();
  const int c0 = std::max(0, static_cast<int>(std::floor(p.x / s)) - 1);
  const int c1 = std::min(region.width() - 1, static_cast<int>(std::floor(p.x / s)));
  const int r0 = std::max(0, static_cast<int>(std::floor(p.y / s)) - 1);
  const int r1 = std::min(region.height() - 1, static_cast<int>(std::floor(p.y / s)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (!region.occupied(Cell{c, r})) continue;
      const Rect rc = region.rect(Cell{c, r});
      if (p.x >= rc.x_min && p.x <= rc.x_max && p.y >= rc.y_min &&
          p.y <= rc.y_max) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace sensynth
