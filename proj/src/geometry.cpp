#include "sensynth/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace sensynth {

GridRegion::GridRegion(int width, int height, double cell_size,
                       std::vector<bool> occupancy)
    : width_(width),
      height_(height),
      cell_size_(cell_size),
      occupancy_(std::move(occupancy)) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("grid region needs width, height >= 1");
  }
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw std::invalid_argument("cell size must be positive");
  }
  if (static_cast<int>(occupancy_.size()) != width * height) {
    throw std::invalid_argument("occupancy size does not match grid");
  }
}

GridRegion GridRegion::Open(int width, int height, double cell_size) {
  return GridRegion(width, height, cell_size,
                    std::vector<bool>(static_cast<size_t>(width) * height));
}

Rect GridRegion::rect(Cell c) const {
  return {c.col * cell_size_, c.row * cell_size_, (c.col + 1) * cell_size_,
          (c.row + 1) * cell_size_};
}

Point GridRegion::center(Cell c) const {
  return {(c.col + 0.5) * cell_size_, (c.row + 0.5) * cell_size_};
}

std::array<Point, 4> GridRegion::corners(Cell c) const {
  const Rect r = rect(c);
  return {Point{r.x_min, r.y_min}, Point{r.x_max, r.y_min},
          Point{r.x_max, r.y_max}, Point{r.x_min, r.y_max}};
}

Rect GridRegion::bounds() const {
  return {0.0, 0.0, width_ * cell_size_, height_ * cell_size_};
}

std::vector<Cell> GridRegion::open_cells() const {
  std::vector<Cell> out;
  for (int i = 0; i < cell_count(); ++i) {
    if (!occupancy_[i]) out.push_back(cell_at(i));
  }
  return out;
}

std::vector<Cell> GridRegion::occupied_cells() const {
  std::vector<Cell> out;
  for (int i = 0; i < cell_count(); ++i) {
    if (occupancy_[i]) out.push_back(cell_at(i));
  }
  return out;
}

int GridRegion::open_count() const {
  return static_cast<int>(std::count(occupancy_.begin(), occupancy_.end(),
                                     false));
}

GridRegion GridRegion::crop(int col0, int row0, int w, int h) const {
  if (col0 < 0 || row0 < 0 || w < 1 || h < 1 || col0 + w > width_ ||
      row0 + h > height_) {
    throw std::invalid_argument("crop rectangle outside region");
  }
  std::vector<bool> occ(static_cast<size_t>(w) * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      occ[r * w + c] = occupied(Cell{col0 + c, row0 + r});
    }
  }
  return GridRegion(w, h, cell_size_, std::move(occ));
}

namespace {

double polygon_area(const std::vector<Point>& poly) {
  double a = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % poly.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

// Sutherland-Hodgman clip against one axis-aligned half plane
// sign * (coord - bound) <= 0.
std::vector<Point> clip_half(const std::vector<Point>& in, bool use_x,
                             double bound, double sign) {
  std::vector<Point> out;
  if (in.empty()) return out;
  auto value = [&](const Point& p) {
    return sign * ((use_x ? p.x : p.y) - bound);
  };
  for (size_t i = 0; i < in.size(); ++i) {
    const Point& cur = in[i];
    const Point& nxt = in[(i + 1) % in.size()];
    const double vc = value(cur);
    const double vn = value(nxt);
    if (vc <= 0.0) out.push_back(cur);
    if ((vc < 0.0 && vn > 0.0) || (vc > 0.0 && vn < 0.0)) {
      const double t = vc / (vc - vn);
      out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
    }
  }
  return out;
}

}  // namespace

GridRegion discretize_obstacles(std::span<const Polygon> polygons, int width,
                                int height, double cell_size) {
  GridRegion region = GridRegion::Open(width, height, cell_size);
  const double area_eps = 1e-12 * cell_size * cell_size;
  for (const Polygon& poly : polygons) {
    if (poly.size() < 3) {
      throw std::invalid_argument("obstacle polygon needs at least 3 vertices");
    }
    double x_lo = poly[0].x, x_hi = poly[0].x, y_lo = poly[0].y,
           y_hi = poly[0].y;
    for (const Point& p : poly) {
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
      y_lo = std::min(y_lo, p.y);
      y_hi = std::max(y_hi, p.y);
    }
    const int c0 = std::max(0, static_cast<int>(std::floor(x_lo / cell_size)));
    const int c1 =
        std::min(width - 1, static_cast<int>(std::floor(x_hi / cell_size)));
    const int r0 = std::max(0, static_cast<int>(std::floor(y_lo / cell_size)));
    const int r1 =
        std::min(height - 1, static_cast<int>(std::floor(y_hi / cell_size)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const Cell cell{c, r};
        if (region.occupied(cell)) continue;
        const Rect rc = region.rect(cell);
        std::vector<Point> clipped(poly.begin(), poly.end());
        clipped = clip_half(clipped, true, rc.x_min, -1.0);
        clipped = clip_half(clipped, true, rc.x_max, 1.0);
        clipped = clip_half(clipped, false, rc.y_min, -1.0);
        clipped = clip_half(clipped, false, rc.y_max, 1.0);
        if (clipped.size() >= 3 && std::abs(polygon_area(clipped)) > area_eps) {
          region.set_occupied(cell, true);
        }
      }
    }
  }
  return region;
}

double exact_distance(Point p, Point q) { return std::hypot(p.x - q.x, p.y - q.y); }

bool segment_clears_rect(Point p, Point q, const Rect& r) {
  if (p == q) return true;  // the open segment is empty

  // Face separation (B2): both endpoints on the outer side of one face, at
  // least one of them strictly.
  if (p.x <= r.x_min && q.x <= r.x_min && (p.x < r.x_min || q.x < r.x_min)) {
    return true;
  }
  if (p.x >= r.x_max && q.x >= r.x_max && (p.x > r.x_max || q.x > r.x_max)) {
    return true;
  }
  if (p.y <= r.y_min && q.y <= r.y_min && (p.y < r.y_min || q.y < r.y_min)) {
    return true;
  }
  if (p.y >= r.y_max && q.y >= r.y_max && (p.y > r.y_max || q.y > r.y_max)) {
    return true;
  }

  // Line separation (B1): every rectangle vertex other than an endpoint lies
  // strictly on one side of the line through p and q, and at most one vertex
  // sits on the line.
  const std::array<Point, 4> verts = {Point{r.x_min, r.y_min},
                                      Point{r.x_max, r.y_min},
                                      Point{r.x_max, r.y_max},
                                      Point{r.x_min, r.y_max}};
  const double dx = q.x - p.x;
  const double dy = q.y - p.y;
  int pos = 0, neg = 0, on_line = 0;
  for (const Point& v : verts) {
    const double f = dx * (v.y - p.y) - dy * (v.x - p.x);
    if (f > 0.0) {
      ++pos;
    } else if (f < 0.0) {
      ++neg;
    } else {
      if (!(v == p || v == q)) return false;
      ++on_line;
    }
  }
  if (on_line > 1) return false;
  return pos == 0 || neg == 0;
}

bool exact_los(Point p, Point q, const GridRegion& region) {
  const double s = region.cell_size();
  // Only occupied cells whose rectangle meets the segment's bounding box can
  // block it.
  const double x_lo = std::min(p.x, q.x), x_hi = std::max(p.x, q.x);
  const double y_lo = std::min(p.y, q.y), y_hi = std::max(p.y, q.y);
  const int c0 = std::max(0, static_cast<int>(std::floor(x_lo / s)) - 1);
  const int c1 =
      std::min(region.width() - 1, static_cast<int>(std::floor(x_hi / s)));
  const int r0 = std::max(0, static_cast<int>(std::floor(y_lo / s)) - 1);
  const int r1 =
      std::min(region.height() - 1, static_cast<int>(std::floor(y_hi / s)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const Cell cell{c, r};
      if (!region.occupied(cell)) continue;
      if (!segment_clears_rect(p, q, region.rect(cell))) return false;
    }
  }
  return true;
}

namespace {

void require_open(Cell c, const GridRegion& region, const char* what) {
  if (!region.in_bounds(c) || region.occupied(c)) {
    throw ContractViolation(std::string(what) +
                            ": argument must be an open cell of the region");
  }
}

}  // namespace

double relaxed_distance(Cell a, Cell b, const GridRegion& region) {
  require_open(a, region, "relaxed_distance");
  require_open(b, region, "relaxed_distance");
  double best = 0.0;
  for (const Point& pa : region.corners(a)) {
    for (const Point& pb : region.corners(b)) {
      best = std::max(best, exact_distance(pa, pb));
    }
  }
  return best;
}

bool relaxed_visibility(Cell a, Cell b, const GridRegion& region) {
  require_open(a, region, "relaxed_visibility");
  require_open(b, region, "relaxed_visibility");
  // Both cells are translates of the same unit square, so their hull is the
  // Minkowski sum of the square with the centre-to-centre segment. The hull
  // meets the interior of cell o iff that segment enters the open 2x2 box
  // centred on o. Work in cell units where every quantity is a half-integer.
  const double ax = a.col + 0.5, ay = a.row + 0.5;
  const double dx = b.col - a.col, dy = b.row - a.row;
  const int c0 = std::max(0, std::min(a.col, b.col) - 1);
  const int c1 = std::min(region.width() - 1, std::max(a.col, b.col) + 1);
  const int r0 = std::max(0, std::min(a.row, b.row) - 1);
  const int r1 = std::min(region.height() - 1, std::max(a.row, b.row) + 1);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (!region.occupied(Cell{c, r})) continue;
      // Open box (c-0.5, c+1.5) x (r-0.5, r+1.5) against the closed segment.
      double t_lo = 0.0, t_hi = 1.0;
      bool hit = true;
      const double lo[2] = {c - 0.5, r - 0.5};
      const double hi[2] = {c + 1.5, r + 1.5};
      const double origin[2] = {ax, ay};
      const double dir[2] = {dx, dy};
      for (int k = 0; k < 2 && hit; ++k) {
        if (dir[k] == 0.0) {
          if (!(origin[k] > lo[k] && origin[k] < hi[k])) hit = false;
          continue;
        }
        double t1 = (lo[k] - origin[k]) / dir[k];
        double t2 = (hi[k] - origin[k]) / dir[k];
        if (t1 > t2) std::swap(t1, t2);
        t_lo = std::max(t_lo, t1);
        t_hi = std::min(t_hi, t2);
      }
      // Open box: need a parameter strictly inside both slabs.
      if (hit && t_lo < t_hi) return false;
    }
  }
  return true;
}

}  // namespace sensynth
