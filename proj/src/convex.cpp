#include "sensynth/convex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace sensynth::convex {

HalfPlane make_half_plane(int sensor, double a_x, double a_y, double b) {
  const double norm = std::hypot(a_x, a_y);
  if (!(norm > 0.0)) throw std::invalid_argument("half plane with zero normal");
  return {sensor, a_x / norm, a_y / norm, b / norm};
}

namespace {

struct ViolationOf {
  const Coordinates& x;
  double operator()(const HalfPlane& h) const {
    const Point& p = x[h.sensor];
    return std::max(0.0, h.a_x * p.x + h.a_y * p.y - h.b);
  }
  double operator()(const Ball& c) const {
    return std::max(0.0, exact_distance(x[c.sensor], c.center) - c.radius);
  }
  double operator()(const PairBall& c) const {
    return std::max(0.0, exact_distance(x[c.i], x[c.j]) - c.radius);
  }
};

struct ProjectOnto {
  Coordinates& x;
  void operator()(const HalfPlane& h) const {
    Point& p = x[h.sensor];
    const double excess = h.a_x * p.x + h.a_y * p.y - h.b;
    if (excess > 0.0) {
      p.x -= excess * h.a_x;
      p.y -= excess * h.a_y;
    }
  }
  void operator()(const Ball& c) const {
    Point& p = x[c.sensor];
    const double d = exact_distance(p, c.center);
    if (d > c.radius) {
      const double t = c.radius / d;
      p = {c.center.x + t * (p.x - c.center.x),
           c.center.y + t * (p.y - c.center.y)};
    }
  }
  void operator()(const PairBall& c) const {
    Point& p = x[c.i];
    Point& q = x[c.j];
    const double d = exact_distance(p, q);
    if (d > c.radius) {
      // Both ends move toward the midpoint by half the excess.
      const double shift = 0.5 * (d - c.radius) / d;
      const double dx = q.x - p.x, dy = q.y - p.y;
      p.x += shift * dx;
      p.y += shift * dy;
      q.x -= shift * dx;
      q.y -= shift * dy;
    }
  }
};

double max_violation(std::span<const Constraint* const> cs,
                     const Coordinates& x) {
  double worst = 0.0;
  for (const Constraint* c : cs) {
    worst = std::max(worst, std::visit(ViolationOf{x}, *c));
  }
  return worst;
}

struct RunResult {
  Verdict verdict;
  Coordinates x;
  double residual;
  int sweeps;
};

RunResult pocs_sweeps(std::span<const Constraint* const> cs, Coordinates x,
                      const Options& opt) {
  std::vector<double> history;
  history.reserve(std::min(opt.max_iters, 4096) + 1);
  double residual = max_violation(cs, x);
  if (residual < opt.eps) return {Verdict::kFeasible, std::move(x), residual, 0};
  history.push_back(residual);
  for (int sweep = 1; sweep <= opt.max_iters; ++sweep) {
    for (const Constraint* c : cs) std::visit(ProjectOnto{x}, *c);
    residual = max_violation(cs, x);
    if (residual < opt.eps) {
      return {Verdict::kFeasible, std::move(x), residual, sweep};
    }
    history.push_back(residual);
    if (sweep >= opt.stall_window) {
      const double before = history[sweep - opt.stall_window];
      if (before - residual < opt.stall_rel * before) {
        return {Verdict::kInfeasible, std::move(x), residual, sweep};
      }
    }
  }
  return {Verdict::kUnknown, std::move(x), residual, opt.max_iters};
}

// Exact test for constraints on one sensor. A nonempty compact intersection
// of disks and half planes has a lowest point, which is a disk bottom or a
// crossing of two boundaries. Boundaries are inflated by tol so tangencies
// survive rounding; a candidate passes with violation up to 2 tol.
std::optional<Point> planar_point(std::span<const Constraint* const> cs,
                                  Point origin, double tol) {
  struct Line { double ax, ay, b; };
  struct Disk { Point c; double r; };
  std::vector<Line> lines;
  std::vector<Disk> disks;
  for (const Constraint* c : cs) {
    if (const auto* h = std::get_if<HalfPlane>(c)) {
      lines.push_back({h->a_x, h->a_y, h->b + tol});
    } else if (const auto* b = std::get_if<Ball>(c)) {
      disks.push_back({b->center, b->radius + tol});
    }
  }
  // Far box keeps the set compact when no disk is present.
  const double far = 1e6 + std::abs(origin.x) + std::abs(origin.y);
  lines.push_back({1.0, 0.0, far});
  lines.push_back({-1.0, 0.0, far});
  lines.push_back({0.0, 1.0, far});
  lines.push_back({0.0, -1.0, far});

  std::vector<const Constraint*> order(cs.begin(), cs.end());
  auto passes = [&](Point p) {
    Coordinates probe{p};
    for (size_t k = 0; k < order.size(); ++k) {
      Constraint c = *order[k];
      double v;
      if (auto* h = std::get_if<HalfPlane>(&c)) {
        v = h->a_x * p.x + h->a_y * p.y - h->b;
      } else {
        const auto& b = std::get<Ball>(c);
        v = exact_distance(p, b.center) - b.radius;
      }
      if (v > 2.0 * tol) {
        // Move the failing constraint forward; failures cluster.
        std::rotate(order.begin(), order.begin() + static_cast<long>(k),
                    order.begin() + static_cast<long>(k) + 1);
        return false;
      }
    }
    return true;
  };
  for (const Disk& d : disks) {
    const Point p{d.c.x, d.c.y - d.r};
    if (passes(p)) return p;
  }
  for (size_t a = 0; a < disks.size(); ++a) {
    for (size_t b = a + 1; b < disks.size(); ++b) {
      const Disk& p = disks[a];
      const Disk& q = disks[b];
      const double dx = q.c.x - p.c.x, dy = q.c.y - p.c.y;
      const double d = std::hypot(dx, dy);
      if (d == 0.0 || d > p.r + q.r || d < std::abs(p.r - q.r)) continue;
      const double along = (d * d + p.r * p.r - q.r * q.r) / (2.0 * d);
      const double h = std::sqrt(std::max(0.0, p.r * p.r - along * along));
      const Point m{p.c.x + along * dx / d, p.c.y + along * dy / d};
      for (double sgn : {1.0, -1.0}) {
        const Point x{m.x - sgn * h * dy / d, m.y + sgn * h * dx / d};
        if (passes(x)) return x;
      }
    }
  }
  for (const Line& l : lines) {
    for (const Disk& d : disks) {
      const double t = l.ax * d.c.x + l.ay * d.c.y - l.b;
      if (std::abs(t) > d.r) continue;
      const double h = std::sqrt(std::max(0.0, d.r * d.r - t * t));
      const Point foot{d.c.x - t * l.ax, d.c.y - t * l.ay};
      for (double sgn : {1.0, -1.0}) {
        const Point x{foot.x - sgn * h * l.ay, foot.y + sgn * h * l.ax};
        if (passes(x)) return x;
      }
    }
  }
  for (size_t a = 0; a < lines.size(); ++a) {
    for (size_t b = a + 1; b < lines.size(); ++b) {
      const Line& p = lines[a];
      const Line& q = lines[b];
      const double det = p.ax * q.ay - p.ay * q.ax;
      if (std::abs(det) < 1e-12) continue;
      const Point x{(p.b * q.ay - p.ay * q.b) / det, (p.ax * q.b - p.b * q.ax) / det};
      if (passes(x)) return x;
    }
  }
  return std::nullopt;
}

int single_sensor(std::span<const Constraint* const> cs) {
  int sensor = -1;
  for (const Constraint* c : cs) {
    if (std::holds_alternative<PairBall>(*c)) return -1;
    const int s = std::holds_alternative<HalfPlane>(*c) ? std::get<HalfPlane>(*c).sensor
                                                       : std::get<Ball>(*c).sensor;
    if (sensor >= 0 && s != sensor) return -1;
    sensor = s;
  }
  return sensor;
}

RunResult run_pocs(std::span<const Constraint* const> cs, Coordinates x,
                   const Options& opt) {
  const int sensor = single_sensor(cs);
  if (sensor < 0) return pocs_sweeps(cs, std::move(x), opt);
  const double residual = max_violation(cs, x);
  if (residual < opt.eps) return {Verdict::kFeasible, std::move(x), residual, 0};
  const std::optional<Point> p = planar_point(cs, x[sensor], 0.25 * opt.eps);
  if (!p) return {Verdict::kInfeasible, std::move(x), residual, 0};
  x[sensor] = *p;
  const double after = max_violation(cs, x);
  return {Verdict::kFeasible, std::move(x), after, 0};
}

bool infeasible(std::span<const Constraint> all, const std::vector<int>& set,
                const Coordinates& start, const Options& opt) {
  std::vector<const Constraint*> cs;
  cs.reserve(set.size());
  for (int idx : set) cs.push_back(&all[idx]);
  return !cs.empty() && run_pocs(cs, start, opt).verdict == Verdict::kInfeasible;
}

// Deletion filter over an index set known to be infeasible. Chunks shrink
// from half the set down to single constraints.
std::vector<int> deletion_filter(std::span<const Constraint> all,
                                 std::vector<int> set, const Coordinates& start,
                                 const Options& opt) {
  for (size_t chunk = std::max<size_t>(1, set.size() / 2);; chunk /= 2) {
    for (size_t pos = 0; pos < set.size();) {
      const size_t len = std::min(chunk, set.size() - pos);
      std::vector<int> trial(set.begin(), set.begin() + static_cast<long>(pos));
      trial.insert(trial.end(), set.begin() + static_cast<long>(pos + len), set.end());
      if (infeasible(all, trial, start, opt)) {
        set = std::move(trial);
      } else {
        pos += len;
      }
    }
    if (chunk <= 1) break;
  }
  return set;
}

// Prefilter to the constraints still violated at the stall point, then the
// deletion filter.
std::vector<int> extract_core(std::span<const Constraint> all,
                              const std::vector<int>& set, const Coordinates& stalled,
                              const Coordinates& start, const Options& opt) {
  std::vector<int> violated;
  for (int idx : set) {
    if (std::visit(ViolationOf{stalled}, all[idx]) >= opt.eps) violated.push_back(idx);
  }
  std::vector<int> seed = set;
  if (!violated.empty() && violated.size() < set.size() &&
      infeasible(all, violated, start, opt)) {
    seed = violated;
  }
  return deletion_filter(all, std::move(seed), start, opt);
}

int find_root(std::vector<int>& parent, int v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

}  // namespace

double violation(const Constraint& c, const Coordinates& x) {
  return std::visit(ViolationOf{x}, c);
}

void project(const Constraint& c, Coordinates& x) {
  std::visit(ProjectOnto{x}, c);
}

std::vector<int> sensors_of(const Constraint& c) {
  if (const auto* h = std::get_if<HalfPlane>(&c)) return {h->sensor};
  if (const auto* b = std::get_if<Ball>(&c)) return {b->sensor};
  const auto& p = std::get<PairBall>(c);
  if (p.i == p.j) return {p.i};
  return {p.i, p.j};
}

Options options_for_cell(double cell_size) {
  Options o;
  o.eps = 1e-6 * cell_size;
  return o;
}

Outcome feasibility(std::span<const Constraint> constraints,
                    const Coordinates& start, const Options& options) {
  Outcome out;
  out.witness = start;
  if (constraints.empty()) {
    out.verdict = Verdict::kFeasible;
    return out;
  }
  const int n = static_cast<int>(start.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (const Constraint& c : constraints) {
    const std::vector<int> s = sensors_of(c);
    for (int v : s) {
      if (v < 0 || v >= n) {
        throw std::out_of_range("constraint refers to a sensor without a start");
      }
    }
    if (s.size() == 2) parent[find_root(parent, s[0])] = find_root(parent, s[1]);
  }
  // Blocks keyed by root, in order of first appearance.
  std::vector<int> block_of_root(n, -1);
  std::vector<std::vector<int>> blocks;
  for (int idx = 0; idx < static_cast<int>(constraints.size()); ++idx) {
    const int root = find_root(parent, sensors_of(constraints[idx])[0]);
    if (block_of_root[root] < 0) {
      block_of_root[root] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
    blocks[block_of_root[root]].push_back(idx);
  }

  auto solve = [&](const std::vector<int>& set, Coordinates& x) {
    std::vector<const Constraint*> cs;
    cs.reserve(set.size());
    for (int idx : set) cs.push_back(&constraints[idx]);
    RunResult r = run_pocs(cs, x, options);
    out.sweeps += r.sweeps;
    out.residual = std::max(out.residual, r.residual);
    if (r.verdict == Verdict::kInfeasible) {
      out.verdict = Verdict::kInfeasible;
      out.core = extract_core(constraints, set, r.x, x, options);
    }
    if (r.verdict == Verdict::kFeasible) {
      for (int idx : set) {
        for (int s : sensors_of(constraints[idx])) x[s] = r.x[s];
      }
    }
    return r.verdict;
  };

  // Coupled blocks are tried locally first: each sensor alone, then each
  // linked pair. Local cores stay small and local witnesses seed the block.
  Coordinates x = start;
  bool unknown = false;
  for (const std::vector<int>& block : blocks) {
    std::vector<int> pairs;
    std::vector<std::vector<int>> unary(n);
    std::vector<int> members;
    for (int idx : block) {
      const std::vector<int> s = sensors_of(constraints[idx]);
      if (s.size() == 2) {
        pairs.push_back(idx);
      } else {
        if (unary[s[0]].empty()) members.push_back(s[0]);
        unary[s[0]].push_back(idx);
      }
    }
    if (!pairs.empty()) {
      bool local_unknown = false;
      for (int s : members) {
        const Verdict v = solve(unary[s], x);
        if (v == Verdict::kInfeasible) return out;
        local_unknown = local_unknown || v == Verdict::kUnknown;
      }
      for (int idx : pairs) {
        if (local_unknown) break;
        const auto& pb = std::get<PairBall>(constraints[idx]);
        std::vector<int> set = unary[pb.i];
        if (pb.j != pb.i) set.insert(set.end(), unary[pb.j].begin(), unary[pb.j].end());
        set.push_back(idx);
        if (solve(set, x) == Verdict::kInfeasible) return out;
      }
    }
    const Verdict v = solve(block, x);
    if (v == Verdict::kInfeasible) return out;
    if (v == Verdict::kUnknown) unknown = true;
  }
  out.witness = x;
  out.verdict = unknown ? Verdict::kUnknown : Verdict::kFeasible;
  return out;
}

}  // namespace sensynth::convex
