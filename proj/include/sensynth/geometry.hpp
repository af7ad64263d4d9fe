#ifndef SENSYNTH_GEOMETRY_HPP_
#define SENSYNTH_GEOMETRY_HPP_

#include <array>
#include <compare>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sensynth {

// Coordinates are meters. The grid origin is the lower-left corner of the
// region; cell (col, row) spans [col*s, (col+1)*s] x [row*s, (row+1)*s].
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Cell {
  int col = 0;
  int row = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
};

// Thrown when a caller breaks a documented precondition (e.g. passing an
// occupied cell to a relaxed predicate).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Discretized deployment area. Occupancy is stored row-major with row 0 at
// the bottom.
class GridRegion {
 public:
  GridRegion() = default;
  GridRegion(int width, int height, double cell_size,
             std::vector<bool> occupancy);

  static GridRegion Open(int width, int height, double cell_size);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  int cell_count() const { return width_ * height_; }

  bool in_bounds(Cell c) const {
    return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
  }
  int index(Cell c) const { return c.row * width_ + c.col; }
  Cell cell_at(int index) const { return {index % width_, index / width_}; }

  bool occupied(Cell c) const { return occupancy_[index(c)]; }
  bool occupied(int index) const { return occupancy_[index]; }
  void set_occupied(Cell c, bool value) { occupancy_[index(c)] = value; }

  Rect rect(Cell c) const;
  Point center(Cell c) const;
  // Corners in counter-clockwise order starting at (x_min, y_min).
  std::array<Point, 4> corners(Cell c) const;
  Rect bounds() const;

  std::vector<Cell> open_cells() const;
  std::vector<Cell> occupied_cells() const;
  int open_count() const;
  int occupied_count() const { return cell_count() - open_count(); }

  // Grid point (corner lattice) helpers: lattice point (i, j) sits at
  // (i*s, j*s) with 0 <= i <= width, 0 <= j <= height.
  int lattice_index(int i, int j) const { return j * (width_ + 1) + i; }
  Point lattice_point(int i, int j) const {
    return {i * cell_size_, j * cell_size_};
  }

  // Sub-rectangle of cells [col0, col0+w) x [row0, row0+h); coordinates in
  // the result are local to the crop.
  GridRegion crop(int col0, int row0, int w, int h) const;

  const std::vector<bool>& occupancy() const { return occupancy_; }

  friend bool operator==(const GridRegion&, const GridRegion&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 1.0;
  std::vector<bool> occupancy_;
};

struct SensorSpec {
  int type_id = 0;
  double sensing_radius = 1.0;
  double comm_radius = 1.0;

  double beta() const { return comm_radius / sensing_radius; }

  friend bool operator==(const SensorSpec&, const SensorSpec&) = default;
};

using Polygon = std::vector<Point>;

// Marks a cell occupied when some polygon overlaps the cell rectangle with
// positive area. Throws std::invalid_argument for polygons with fewer than
// three vertices.
GridRegion discretize_obstacles(std::span<const Polygon> polygons, int width,
                                int height, double cell_size);

double exact_distance(Point p, Point q);

// True when the open segment (p, q) misses the closed rectangle. Endpoints
// may lie on the rectangle boundary; grazing a face or passing through a
// vertex strictly between the endpoints counts as blocked.
bool segment_clears_rect(Point p, Point q, const Rect& r);

// Line of sight between two points of the region: the conjunction of
// segment_clears_rect over all occupied cells.
bool exact_los(Point p, Point q, const GridRegion& region);

// Largest corner-to-corner distance between two open cells.
double relaxed_distance(Cell a, Cell b, const GridRegion& region);

// Conservative visibility between two open cells: false iff the convex hull
// of the two cell rectangles meets the interior of some occupied cell.
bool relaxed_visibility(Cell a, Cell b, const GridRegion& region);

}  // namespace sensynth

#endif  // SENSYNTH_GEOMETRY_HPP_
