#include "sensynth/smc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "sensynth/eval.hpp"
#include "sensynth/graphs.hpp"

namespace sensynth::smc {

namespace {

using Clock = std::chrono::steady_clock;
using convex::Constraint;
using convex::Coordinates;
using sat::Lit;
using sat::neg;
using sat::pos;

uint64_t pb_key(int tmpl, int a, int b, int sensors) {
  const uint64_t s = static_cast<uint64_t>(sensors) + 1;
  return (static_cast<uint64_t>(tmpl) * s + static_cast<uint64_t>(a)) * s +
         static_cast<uint64_t>(b + 1);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<Constraint> bounds_constraints(const GridRegion& region, int sensor) {
  const Rect b = region.bounds();
  return {convex::make_half_plane(sensor, -1.0, 0.0, -b.x_min),
          convex::make_half_plane(sensor, 1.0, 0.0, b.x_max),
          convex::make_half_plane(sensor, 0.0, -1.0, -b.y_min),
          convex::make_half_plane(sensor, 0.0, 1.0, b.y_max)};
}

Constraint with_sensors(Constraint c, int a, int b) {
  if (auto* h = std::get_if<convex::HalfPlane>(&c)) {
    h->sensor = a;
  } else if (auto* ball = std::get_if<convex::Ball>(&c)) {
    ball->sensor = a;
  } else {
    auto& p = std::get<convex::PairBall>(c);
    p.i = a;
    p.j = b;
  }
  return c;
}

bool satisfied(const std::vector<Constraint>& cs, const Coordinates& x) {
  for (const Constraint& c : cs) {
    if (convex::violation(c, x) > 0.0) return false;
  }
  return true;
}

double distance_to_rect(Point p, const Rect& r) {
  const double dx = std::max({r.x_min - p.x, 0.0, p.x - r.x_max});
  const double dy = std::max({r.y_min - p.y, 0.0, p.y - r.y_max});
  return std::hypot(dx, dy);
}

}  // namespace

namespace detail {

// Convex branches of "rectangle o does not block the segment from the sensor
// to corner l", pruned to those compatible with the sensing ball and the
// region bounds.
struct SelectorSet {
  int rect = -1;
  std::vector<std::pair<int, std::vector<convex::Constraint>>> branches;
};

class Tables {
 public:
  Tables(const GridRegion& region, std::span<const SensorSpec> specs,
         std::vector<Rect> rects)
      : region_(region),
        specs_(specs.begin(), specs.end()),
        rects_(std::move(rects)),
        options_(convex::options_for_cell(region.cell_size())),
        cache_(specs.size()) {
    shrink_ = 2.0 * options_.eps;
    delta_ = 1e-4 * region.cell_size();
  }

  double shrink() const { return shrink_; }
  double delta() const { return delta_; }
  const convex::Options& options() const { return options_; }
  const std::vector<Rect>& rects() const { return rects_; }
  double radius(int type) const { return specs_[type].sensing_radius - shrink_; }

  Point corner_point(int lattice) const {
    const int w = region_.width() + 1;
    return region_.lattice_point(lattice % w, lattice / w);
  }

  const std::vector<SelectorSet>& selectors(int type, int lattice) {
    auto it = cache_[type].find(lattice);
    if (it != cache_[type].end()) return it->second;
    std::vector<SelectorSet> out;
    const Point l = corner_point(lattice);
    const double r = specs_[type].sensing_radius;
    for (int o = 0; o < static_cast<int>(rects_.size()); ++o) {
      const Rect& rc = rects_[o];
      if (distance_to_rect(l, rc) > r) continue;
      SelectorSet set;
      set.rect = o;
      for (int branch = 0; branch < 6; ++branch) {
        std::vector<Constraint> cs = branch_constraints(l, rc, branch);
        if (cs.empty()) continue;
        if (!branch_feasible(cs, l, type)) continue;
        set.branches.emplace_back(branch, std::move(cs));
      }
      out.push_back(std::move(set));
    }
    return cache_[type].emplace(lattice, std::move(out)).first->second;
  }

  // Sensor at p may claim corner `lattice` under the encoding.
  bool encodable(int type, Point p, int lattice) {
    const Point l = corner_point(lattice);
    if (exact_distance(p, l) > radius(type)) return false;
    const Coordinates x{p};
    for (const SelectorSet& set : selectors(type, lattice)) {
      bool any = false;
      for (const auto& [branch, cs] : set.branches) {
        if (satisfied(cs, x)) {
          any = true;
          break;
        }
      }
      if (!any) return false;
    }
    return true;
  }

  bool encodable_cell(int type, Point p, Cell c) {
    const int i = c.col, j = c.row;
    for (auto [di, dj] : {std::pair{0, 0}, {1, 0}, {1, 1}, {0, 1}}) {
      if (!encodable(type, p, region_.lattice_index(i + di, j + dj))) return false;
    }
    return true;
  }

  // Four corners of a cell fit in one sensing ball.
  bool cell_coverable(int type) const {
    return radius(type) >= 0.5 * std::sqrt(2.0) * region_.cell_size();
  }

 private:
  std::vector<Constraint> branch_constraints(Point l, const Rect& rc,
                                             int branch) const {
    std::vector<Constraint> cs;
    if (branch <= 1) {
      const std::array<Point, 4> verts = {Point{rc.x_min, rc.y_min},
                                          Point{rc.x_max, rc.y_min},
                                          Point{rc.x_max, rc.y_max},
                                          Point{rc.x_min, rc.y_max}};
      for (const Point& v : verts) {
        if (v == l) continue;
        // f_v(s) = cross(l - s, v - s) = c0 + a*s.x + b*s.y
        const double a = l.y - v.y;
        const double b = v.x - l.x;
        const double c0 = l.x * v.y - l.y * v.x;
        const double norm = std::hypot(a, b);
        if (branch == 0) {
          cs.push_back(convex::make_half_plane(0, -a, -b, c0 - delta_ * norm));
        } else {
          cs.push_back(convex::make_half_plane(0, a, b, -c0 - delta_ * norm));
        }
      }
      return cs;
    }
    switch (branch) {
      case 2:
        if (l.x <= rc.x_min) {
          cs.push_back(convex::make_half_plane(0, 1.0, 0.0, rc.x_min - delta_));
        }
        break;
      case 3:
        if (l.x >= rc.x_max) {
          cs.push_back(convex::make_half_plane(0, -1.0, 0.0, -(rc.x_max + delta_)));
        }
        break;
      case 4:
        if (l.y <= rc.y_min) {
          cs.push_back(convex::make_half_plane(0, 0.0, 1.0, rc.y_min - delta_));
        }
        break;
      case 5:
        if (l.y >= rc.y_max) {
          cs.push_back(convex::make_half_plane(0, 0.0, -1.0, -(rc.y_max + delta_)));
        }
        break;
      default:
        break;
    }
    return cs;
  }

  bool branch_feasible(const std::vector<Constraint>& cs, Point l, int type) const {
    std::vector<Constraint> all = cs;
    all.push_back(convex::Ball{0, l, radius(type)});
    for (const Constraint& c : bounds_constraints(region_, 0)) all.push_back(c);
    return convex::feasibility(all, Coordinates{l}, options_).verdict ==
           convex::Verdict::kFeasible;
  }

  GridRegion region_;
  std::vector<SensorSpec> specs_;
  std::vector<Rect> rects_;
  convex::Options options_;
  double shrink_ = 0.0;
  double delta_ = 0.0;
  std::vector<std::unordered_map<int, std::vector<SelectorSet>>> cache_;
};

}  // namespace detail

namespace {

using detail::SelectorSet;
using detail::Tables;

// Registers templates and pseudo-booleans for one problem.
class Registry {
 public:
  Registry(std::vector<Template>& templates, std::vector<PseudoBool>& pbs,
           std::unordered_map<int, int>& pb_of_var,
           std::unordered_map<uint64_t, int>& pb_index, sat::Solver& solver,
           int sensors)
      : templates_(templates),
        pbs_(pbs),
        pb_of_var_(pb_of_var),
        pb_index_(pb_index),
        solver_(solver),
        sensors_(sensors) {}

  int template_id(const Template& proto,
                  const std::function<std::vector<Constraint>()>& make) {
    const std::array<int, 6> key = {static_cast<int>(proto.kind), proto.type,
                                    proto.corner, proto.rect,
                                    proto.branch, proto.cell};
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    Template t = proto;
    t.constraints = make();
    templates_.push_back(std::move(t));
    const int id = static_cast<int>(templates_.size()) - 1;
    ids_.emplace(key, id);
    return id;
  }

  int pb(int tmpl, int a, int b = -1) {
    if (b >= 0 && b < a) std::swap(a, b);
    const uint64_t key = pb_key(tmpl, a, b, sensors_);
    auto it = pb_index_.find(key);
    if (it != pb_index_.end()) return pbs_[it->second].var;
    const int var = solver_.new_var();
    pbs_.push_back({var, tmpl, a, b});
    const int idx = static_cast<int>(pbs_.size()) - 1;
    pb_index_.emplace(key, idx);
    pb_of_var_.emplace(var, idx);
    return var;
  }

 private:
  std::vector<Template>& templates_;
  std::vector<PseudoBool>& pbs_;
  std::unordered_map<int, int>& pb_of_var_;
  std::unordered_map<uint64_t, int>& pb_index_;
  sat::Solver& solver_;
  int sensors_;
  std::map<std::array<int, 6>, int> ids_;
};

std::vector<Constraint> cell_box(const GridRegion& region, int cell, double delta) {
  const Rect r = region.rect(region.cell_at(cell));
  return {convex::make_half_plane(0, -1.0, 0.0, -(r.x_min + delta)),
          convex::make_half_plane(0, 1.0, 0.0, r.x_max - delta),
          convex::make_half_plane(0, 0.0, -1.0, -(r.y_min + delta)),
          convex::make_half_plane(0, 0.0, 1.0, r.y_max - delta)};
}

// Hop-indexed reachability from node 0 over optional edges. edge(i, j)
// returns the literal that enables the edge or nullopt when it cannot exist.
struct ReachEncoding {
  std::vector<std::vector<int>> reach;                // [node][h]
  std::vector<std::array<int, 4>> aux;                // i, j, h, var
};

ReachEncoding encode_reachability(
    sat::Solver& solver, int nodes,
    const std::function<std::optional<Lit>(int, int)>& edge) {
  ReachEncoding enc;
  const int hops = nodes - 1;
  enc.reach.assign(nodes, std::vector<int>(hops + 1));
  for (int j = 0; j < nodes; ++j) {
    for (int h = 0; h <= hops; ++h) enc.reach[j][h] = solver.new_var();
  }
  solver.add_clause({pos(enc.reach[0][0])});
  for (int j = 1; j < nodes; ++j) solver.add_clause({neg(enc.reach[j][0])});
  for (int h = 1; h <= hops; ++h) {
    solver.add_clause({pos(enc.reach[0][h])});
    for (int j = 1; j < nodes; ++j) {
      std::vector<Lit> support{neg(enc.reach[j][h]), pos(enc.reach[j][h - 1])};
      for (int i = 0; i < nodes; ++i) {
        if (i == j) continue;
        const std::optional<Lit> e = edge(i, j);
        if (!e) continue;
        const int t = solver.new_var();
        solver.add_clause({neg(t), pos(enc.reach[i][h - 1])});
        solver.add_clause({neg(t), *e});
        support.push_back(pos(t));
        enc.aux.push_back({i, j, h, t});
      }
      solver.add_clause(support);
    }
  }
  for (int j = 0; j < nodes; ++j) solver.add_clause({pos(enc.reach[j][hops])});
  return enc;
}

void hint_reachability(sat::Solver& solver, const ReachEncoding& enc,
                       const std::vector<std::vector<bool>>& adjacency,
                       const std::vector<bool>& known) {
  const int n = static_cast<int>(enc.reach.size());
  std::vector<int> hop(n, -1);
  if (n == 0 || !known[0]) return;
  hop[0] = 0;
  std::deque<int> queue{0};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v = 0; v < n; ++v) {
      if (hop[v] < 0 && known[v] && adjacency[u][v]) {
        hop[v] = hop[u] + 1;
        queue.push_back(v);
      }
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int h = 0; h < static_cast<int>(enc.reach[j].size()); ++h) {
      solver.set_phase(enc.reach[j][h], hop[j] >= 0 && hop[j] <= h);
    }
  }
  for (const auto& [i, j, h, var] : enc.aux) {
    solver.set_phase(var, hop[i] >= 0 && hop[i] <= h - 1 && adjacency[i][j]);
  }
}

// The lazy SAT + convex loop shared by synthesis and stitching.
struct Loop {
  sat::Solver* solver = nullptr;
  const std::vector<Template>* templates = nullptr;
  const std::vector<PseudoBool>* pbs = nullptr;
  const std::unordered_map<uint64_t, int>* pb_index = nullptr;
  std::vector<int> sensor_class;
  std::vector<Constraint> fixed;
  convex::Options options;
  // Pseudo-booleans whose constraints must hold for the current model.
  std::function<std::vector<int>()> active;
  std::function<Coordinates(const std::vector<int>&)> start;
  std::function<bool(const Coordinates&)> accept;

  int sensors() const { return static_cast<int>(sensor_class.size()); }

  int lookup(int tmpl, int a, int b) const {
    if (b >= 0 && b < a) std::swap(a, b);
    auto it = pb_index->find(pb_key(tmpl, a, b, sensors()));
    return it == pb_index->end() ? -1 : (*pbs)[it->second].var;
  }

  std::set<std::vector<int>> added;

  int64_t add_blocking(const std::vector<int>& vars) {
    std::vector<int> key = vars;
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    if (!added.insert(key).second) return 0;
    std::vector<Lit> clause;
    for (int v : key) clause.push_back(neg(v));
    solver->add_clause(clause);
    return 1;
  }

  int64_t block_core(const std::vector<int>& core) {
    std::vector<int> sensors_in;
    for (int idx : core) {
      const PseudoBool& pb = (*pbs)[idx];
      sensors_in.push_back(pb.sensor_a);
      if (pb.sensor_b >= 0) sensors_in.push_back(pb.sensor_b);
    }
    std::sort(sensors_in.begin(), sensors_in.end());
    sensors_in.erase(std::unique(sensors_in.begin(), sensors_in.end()),
                     sensors_in.end());
    std::vector<int> original;
    for (int idx : core) original.push_back((*pbs)[idx].var);
    int64_t count = add_blocking(original);
    if (sensors_in.size() > 2) return count;

    const int a = sensors_in[0];
    const int b = sensors_in.size() == 2 ? sensors_in[1] : -1;
    auto lift = [&](int a2, int b2) {
      std::vector<int> vars;
      for (int idx : core) {
        const PseudoBool& pb = (*pbs)[idx];
        auto map = [&](int s) { return s == a ? a2 : b2; };
        const int var = lookup(pb.tmpl, map(pb.sensor_a),
                               pb.sensor_b >= 0 ? map(pb.sensor_b) : -1);
        if (var < 0) return;  // template absent for this sensor: always false
        vars.push_back(var);
      }
      count += add_blocking(vars);
    };
    for (int a2 = 0; a2 < sensors(); ++a2) {
      if (sensor_class[a2] != sensor_class[a]) continue;
      if (b < 0) {
        lift(a2, -1);
        continue;
      }
      for (int b2 = 0; b2 < sensors(); ++b2) {
        if (b2 == a2 || sensor_class[b2] != sensor_class[b]) continue;
        lift(a2, b2);
      }
    }
    return count;
  }

  // Optional theory pre-pass. kConflict fills `cores` with pseudo-boolean
  // index sets to block; kPass replaces the active set with `refined`.
  enum class Theory { kPass, kConflict, kGiveUp, kTimeout };
  std::function<Theory(const std::vector<int>& act, std::vector<int>& refined,
                       std::vector<std::vector<int>>& cores)>
      theory;

  struct Check {
    convex::Outcome out;
    std::vector<int> core;  // pseudo-boolean indices
  };

  Check check(const std::vector<int>& act, LoopStats& stats) const {
    std::vector<Constraint> cs = fixed;
    std::vector<int> owner(cs.size(), -1);
    for (int idx : act) {
      const PseudoBool& pb = (*pbs)[idx];
      for (const Constraint& c : (*templates)[pb.tmpl].constraints) {
        cs.push_back(with_sensors(c, pb.sensor_a, pb.sensor_b));
        owner.push_back(idx);
      }
    }
    const Coordinates x0 = start(act);
    const auto tc = Clock::now();
    Check res{convex::feasibility(cs, x0, options), {}};
    stats.convex_seconds += seconds_since(tc);
    for (int c : res.out.core) {
      if (owner[c] >= 0) res.core.push_back(owner[c]);
    }
    std::sort(res.core.begin(), res.core.end());
    res.core.erase(std::unique(res.core.begin(), res.core.end()), res.core.end());
    return res;
  }

  Status run(Seconds budget, LoopStats& stats, Coordinates& witness) {
    const auto t0 = Clock::now();
    while (true) {
      const double left = budget.count() - seconds_since(t0);
      if (left <= 0.0) return Status::kTimeout;
      const auto ts = Clock::now();
      const sat::SolveResult res = solver->solve(Seconds(left));
      stats.sat_seconds += seconds_since(ts);
      if (res.status == sat::Status::kUnsat) return Status::kInfeasible;
      if (res.status == sat::Status::kTimeout) return Status::kTimeout;
      ++stats.iterations;

      const std::vector<int> act = active();
      std::vector<int> chosen = act;
      bool refined_by_theory = false;
      if (theory) {
        std::vector<int> refined;
        std::vector<std::vector<int>> cores;
        const auto tc = Clock::now();
        const Theory verdict = theory(act, refined, cores);
        stats.convex_seconds += seconds_since(tc);
        if (verdict == Theory::kTimeout) return Status::kTimeout;
        if (verdict == Theory::kConflict) {
          for (const auto& core : cores) {
            ++stats.cores;
            stats.blocking_clauses += block_core(core);
          }
          continue;
        }
        if (verdict == Theory::kPass) {
          chosen = std::move(refined);
          refined_by_theory = true;
        }
      }

      Check c = check(chosen, stats);
      if (c.out.verdict == convex::Verdict::kInfeasible && refined_by_theory) {
        const std::vector<bool>& m = solver->model();
        const bool blocks_model = std::all_of(
            c.core.begin(), c.core.end(), [&](int idx) { return m[(*pbs)[idx].var]; });
        if (!blocks_model) c = check(act, stats);
      }
      const convex::Outcome& out = c.out;
      if (out.verdict == convex::Verdict::kFeasible) {
        if (accept(out.witness)) {
          witness = out.witness;
          return Status::kFeasible;
        }
        ++stats.verify_rejects;
      } else if (out.verdict == convex::Verdict::kInfeasible && !c.core.empty()) {
        ++stats.cores;
        stats.blocking_clauses += block_core(c.core);
        continue;
      } else if (out.verdict == convex::Verdict::kUnknown) {
        ++stats.unknowns;
      }
      // Unknown or rejected witness: block the whole asserted set.
      std::vector<int> vars;
      for (int idx : act) vars.push_back((*pbs)[idx].var);
      if (vars.empty()) return Status::kInfeasible;
      stats.blocking_clauses += add_blocking(vars);
    }
  }
};

Placement to_placement(const Coordinates& x, const std::vector<int>& types,
                       std::span<const SensorSpec> specs) {
  Placement p;
  for (size_t i = 0; i < x.size(); ++i) {
    p.push_back({x[i], specs[types[i]].type_id, Role::kPrimary});
  }
  return p;
}

int lattice_of(const GridRegion& region, Cell c, int corner) {
  static constexpr int kDi[4] = {0, 1, 1, 0};
  static constexpr int kDj[4] = {0, 0, 1, 1};
  return region.lattice_index(c.col + kDi[corner], c.row + kDj[corner]);
}

}  // namespace

std::vector<Rect> obstacle_rects(const GridRegion& region) {
  std::vector<Rect> out;
  std::vector<bool> used(region.cell_count(), false);
  const double s = region.cell_size();
  for (int row = 0; row < region.height(); ++row) {
    for (int col = 0; col < region.width(); ++col) {
      const int idx = region.index(Cell{col, row});
      if (!region.occupied(idx) || used[idx]) continue;
      int w = 1;
      while (col + w < region.width()) {
        const int j = region.index(Cell{col + w, row});
        if (!region.occupied(j) || used[j]) break;
        ++w;
      }
      int h = 1;
      while (row + h < region.height()) {
        bool full = true;
        for (int c = col; c < col + w; ++c) {
          const int j = region.index(Cell{c, row + h});
          if (!region.occupied(j) || used[j]) {
            full = false;
            break;
          }
        }
        if (!full) break;
        ++h;
      }
      for (int r = row; r < row + h; ++r) {
        for (int c = col; c < col + w; ++c) used[region.index(Cell{c, r})] = true;
      }
      out.push_back({col * s, row * s, (col + w) * s, (row + h) * s});
    }
  }
  return out;
}

int SmcProblem::pb_var(int tmpl, int a, int b) const {
  if (b >= 0 && b < a) std::swap(a, b);
  auto it = pb_index.find(pb_key(tmpl, a, b, sensor_count()));
  return it == pb_index.end() ? -1 : pbs[it->second].var;
}


namespace {

std::vector<int> lattice_list(const std::vector<int>& row) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(row.size()); ++i) {
    if (row[i] >= 0) out.push_back(i);
  }
  return out;
}

Template make_proto(TemplateKind kind, int type, int corner = -1, int rect = -1,
                    int branch = -1, int cell = -1) {
  Template t;
  t.kind = kind;
  t.type = type;
  t.corner = corner;
  t.rect = rect;
  t.branch = branch;
  t.cell = cell;
  return t;
}

}  // namespace

SmcProblem encode(const GridRegion& region, std::span<const int> sensors_per_type,
                  std::span<const SensorSpec> specs, const Demands& demands,
                  const Config& config) {
  if (specs.empty() || sensors_per_type.size() != specs.size() ||
      demands.types() != static_cast<int>(specs.size())) {
    throw std::invalid_argument("sensor counts, specs and demands disagree");
  }
  for (const SensorSpec& s : specs) {
    if (!(s.sensing_radius > 0.0) || !(s.comm_radius > 0.0)) {
      throw std::invalid_argument("sensor radii must be positive");
    }
  }
  if (region.open_count() < 1) {
    throw std::invalid_argument("region has no open cell");
  }
  SmcProblem p;
  p.region = region;
  p.specs.assign(specs.begin(), specs.end());
  p.demands = demands;
  p.config = config;
  for (size_t t = 0; t < specs.size(); ++t) {
    if (sensors_per_type[t] < 0) throw std::invalid_argument("negative count");
    for (int n = 0; n < sensors_per_type[t]; ++n) {
      p.sensor_type.push_back(static_cast<int>(t));
    }
  }
  const int n_sensors = p.sensor_count();
  if (n_sensors < 1) throw std::invalid_argument("need at least one sensor");

  p.rects = obstacle_rects(region);
  p.tables = std::make_shared<Tables>(region, specs, p.rects);
  Tables& tb = *p.tables;
  p.ball_shrink = tb.shrink();
  p.delta = tb.delta();
  const int lattice_count = (region.width() + 1) * (region.height() + 1);
  const int cells = region.cell_count();
  p.bs.assign(n_sensors, std::vector<int>(lattice_count, -1));
  p.bu.assign(n_sensors, std::vector<int>(cells, -1));
  p.member.assign(n_sensors, std::vector<int>(cells, -1));
  p.selector_groups.assign(n_sensors, {});

  for (size_t t = 0; t < specs.size(); ++t) {
    if (sensors_per_type[t] < demands.max_demand(static_cast<int>(t))) {
      p.trivially_unsat = true;
    }
  }
  if (p.trivially_unsat) {
    p.solver.add_clause(std::span<const Lit>{});
    return p;
  }

  Registry reg(p.templates, p.pbs, p.pb_of_var, p.pb_index, p.solver, n_sensors);
  sat::Solver& solver = p.solver;

  auto corner_var = [&](int i, int t, int lat) {
    if (p.bs[i][lat] >= 0) return p.bs[i][lat];
    const Point l = tb.corner_point(lat);
    const int tmpl = reg.template_id(
        make_proto(TemplateKind::kBall, t, lat),
        [&] { return std::vector<Constraint>{convex::Ball{0, l, tb.radius(t)}}; });
    const int var = reg.pb(tmpl, i);
    p.bs[i][lat] = var;
    for (const SelectorSet& set : tb.selectors(t, lat)) {
      SelectorGroup group{var, set.rect, {}};
      std::vector<Lit> clause{neg(var)};
      for (const auto& [branch, cs] : set.branches) {
        const int st = reg.template_id(
            make_proto(TemplateKind::kSelector, t, lat, set.rect, branch),
            [&cs = cs] { return cs; });
        const int sv = reg.pb(st, i);
        group.vars.push_back(sv);
        clause.push_back(pos(sv));
      }
      solver.add_clause(clause);
      p.selector_groups[i].push_back(std::move(group));
    }
    return var;
  };

  for (int i = 0; i < n_sensors; ++i) {
    const int t = p.sensor_type[i];
    if (!tb.cell_coverable(t)) continue;
    for (int g = 0; g < cells; ++g) {
      if (region.occupied(g) || demands.at(t, g) <= 0) continue;
      const int u = solver.new_var();
      p.bu[i][g] = u;
      const Cell cell = region.cell_at(g);
      for (int c = 0; c < 4; ++c) {
        const int bsv = corner_var(i, t, lattice_of(region, cell, c));
        solver.add_clause({neg(u), pos(bsv)});
      }
    }
  }

  // A sensor that covers no corner must still sit inside some open cell.
  for (int i = 0; i < n_sensors; ++i) {
    std::vector<Lit> clause;
    for (int lat : lattice_list(p.bs[i])) clause.push_back(pos(p.bs[i][lat]));
    for (int g = 0; g < cells; ++g) {
      if (region.occupied(g)) continue;
      const int tmpl = reg.template_id(
          make_proto(TemplateKind::kCellMember, -1, -1, -1, -1, g),
          [&] { return cell_box(region, g, tb.delta()); });
      p.member[i][g] = reg.pb(tmpl, i);
      clause.push_back(pos(p.member[i][g]));
    }
    solver.add_clause(clause);
  }

  // Coverage cardinality per demanded cell and type.
  for (size_t t = 0; t < specs.size(); ++t) {
    for (int g = 0; g < cells; ++g) {
      const int k = demands.at(static_cast<int>(t), g);
      if (region.occupied(g) || k <= 0) continue;
      std::vector<Lit> lits;
      for (int i = 0; i < n_sensors; ++i) {
        if (p.sensor_type[i] == static_cast<int>(t) && p.bu[i][g] >= 0) {
          lits.push_back(pos(p.bu[i][g]));
        }
      }
      solver.add_at_least(lits, k);
    }
  }

  if (config.symmetry_breaking) {
    for (size_t t = 0; t < specs.size(); ++t) {
      int g0 = -1;
      for (int g = 0; g < cells && g0 < 0; ++g) {
        if (!region.occupied(g) && demands.at(static_cast<int>(t), g) > 0) g0 = g;
      }
      if (g0 < 0) continue;
      int pinned = 0;
      const int need = demands.at(static_cast<int>(t), g0);
      for (int i = 0; i < n_sensors && pinned < need; ++i) {
        if (p.sensor_type[i] != static_cast<int>(t)) continue;
        if (p.bu[i][g0] < 0) {
          solver.add_clause(std::span<const Lit>{});
        } else {
          solver.add_clause({pos(p.bu[i][g0])});
        }
        ++pinned;
      }
    }
  }

  p.bc.assign(n_sensors, std::vector<int>(n_sensors, -1));
  if (config.connectivity && n_sensors >= 2) {
    for (int i = 0; i < n_sensors; ++i) {
      for (int j = i + 1; j < n_sensors; ++j) {
        const int ti = p.sensor_type[i], tj = p.sensor_type[j];
        const double rc =
            std::min(specs[ti].comm_radius, specs[tj].comm_radius) - tb.shrink();
        const int tmpl = reg.template_id(
            make_proto(TemplateKind::kLink, -1, std::min(ti, tj), std::max(ti, tj)),
            [&] { return std::vector<Constraint>{convex::PairBall{0, 1, rc}}; });
        p.bc[i][j] = reg.pb(tmpl, i, j);
      }
    }
    ReachEncoding enc = encode_reachability(
        solver, n_sensors, [&](int i, int j) -> std::optional<Lit> {
          return pos(p.bc[std::min(i, j)][std::max(i, j)]);
        });
    p.reach = std::move(enc.reach);
    p.reach_aux = std::move(enc.aux);
  }
  p.hint.assign(n_sensors, std::nullopt);
  return p;
}

void precompute_exclusions(SmcProblem& p) {
  if (p.trivially_unsat) return;
  const GridRegion& region = p.region;
  const Tables& tb = *p.tables;
  for (int i = 0; i < p.sensor_count(); ++i) {
    const double r = p.specs[p.sensor_type[i]].sensing_radius;
    const std::vector<int> lats = lattice_list(p.bs[i]);
    for (size_t a = 0; a < lats.size(); ++a) {
      const Point la = tb.corner_point(lats[a]);
      for (size_t b = a + 1; b < lats.size(); ++b) {
        if (exact_distance(la, tb.corner_point(lats[b])) > 2.0 * r) {
          p.solver.add_clause({neg(p.bs[i][lats[a]]), neg(p.bs[i][lats[b]])});
          ++p.exclusion_stats.corner_pairs;
        }
      }
    }
    const std::vector<int> cells = lattice_list(p.bu[i]);
    for (size_t a = 0; a < cells.size(); ++a) {
      const Cell ca = region.cell_at(cells[a]);
      for (size_t b = a + 1; b < cells.size(); ++b) {
        if (relaxed_distance(ca, region.cell_at(cells[b]), region) > 2.0 * r) {
          p.solver.add_clause({neg(p.bu[i][cells[a]]), neg(p.bu[i][cells[b]])});
          ++p.exclusion_stats.cell_pairs;
        }
      }
    }
  }
  if (!p.config.connectivity_exclusions || p.reach.empty()) return;
  for (int i = 0; i < p.sensor_count(); ++i) {
    for (int j = i + 1; j < p.sensor_count(); ++j) {
      const SensorSpec& si = p.specs[p.sensor_type[i]];
      const SensorSpec& sj = p.specs[p.sensor_type[j]];
      const double rc = std::min(si.comm_radius, sj.comm_radius);
      for (int g : lattice_list(p.bu[i])) {
        for (int h : lattice_list(p.bu[j])) {
          const double d = relaxed_distance(region.cell_at(g), region.cell_at(h), region);
          if (d - si.sensing_radius - sj.sensing_radius > rc) {
            p.solver.add_clause(
                {neg(p.bc[i][j]), neg(p.bu[i][g]), neg(p.bu[j][h])});
            ++p.exclusion_stats.link_triples;
          }
        }
      }
    }
  }
}

void apply_hint(SmcProblem& p, std::span<const std::optional<Point>> positions) {
  if (p.trivially_unsat) return;
  const int n = p.sensor_count();
  p.hint.assign(n, std::nullopt);
  for (int i = 0; i < n && i < static_cast<int>(positions.size()); ++i) {
    p.hint[i] = positions[i];
  }
  Tables& tb = *p.tables;
  sat::Solver& solver = p.solver;
  std::vector<bool> known(n, false);
  for (int i = 0; i < n; ++i) {
    if (!p.hint[i]) continue;
    known[i] = true;
    const Point at = *p.hint[i];
    const int t = p.sensor_type[i];
    std::unordered_map<int, bool> corner_ok;
    bool active = false;
    for (int lat : lattice_list(p.bs[i])) {
      const bool ok = tb.encodable(t, at, lat);
      corner_ok[p.bs[i][lat]] = ok;
      solver.set_phase(p.bs[i][lat], ok);
      active = active || ok;
    }
    for (int g : lattice_list(p.bu[i])) {
      const Cell c = p.region.cell_at(g);
      bool all = true;
      for (int k = 0; k < 4; ++k) {
        all = all && corner_ok[p.bs[i][lattice_of(p.region, c, k)]];
      }
      solver.set_phase(p.bu[i][g], all);
    }
    const Coordinates x{at};
    for (const SelectorGroup& group : p.selector_groups[i]) {
      bool chosen = !corner_ok[group.bs_var];
      for (int var : group.vars) {
        const Template& tm = p.templates[p.pbs[p.pb_of_var.at(var)].tmpl];
        const bool pick = !chosen && satisfied(tm.constraints, x);
        solver.set_phase(var, pick);
        chosen = chosen || pick;
      }
    }
    bool placed = active;
    for (int g = 0; g < p.region.cell_count(); ++g) {
      const int var = p.member[i][g];
      if (var < 0) continue;
      const Template& tm = p.templates[p.pbs[p.pb_of_var.at(var)].tmpl];
      const bool pick = !placed && satisfied(tm.constraints, x);
      solver.set_phase(var, pick);
      placed = placed || pick;
    }
  }
  if (p.reach.empty()) return;
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!known[i] || !known[j]) continue;
      const double rc = std::min(p.specs[p.sensor_type[i]].comm_radius,
                                 p.specs[p.sensor_type[j]].comm_radius) -
                        p.ball_shrink;
      const bool link = exact_distance(*p.hint[i], *p.hint[j]) <= rc;
      adj[i][j] = adj[j][i] = link;
      solver.set_phase(p.bc[i][j], link);
    }
  }
  ReachEncoding enc{p.reach, p.reach_aux};
  hint_reachability(solver, enc, adj, known);
}

namespace {

Point cell_center_of_template(const GridRegion& region, const Template& t) {
  return region.center(region.cell_at(t.cell));
}

}  // namespace

namespace {

// Exact single-sensor check: does some point lie in all covering balls and
// in one branch of every (corner, obstacle) group? The feasible set is a
// finite union of convex pieces bounded by circles and lines, so when it is
// nonempty one of its lowest points is a circle bottom or a crossing of two
// boundaries. Failures are shrunk to a small set of covered corners.
class SensorSearch {
 public:
  enum class Result { kFound, kConflict };
  struct Expired {};  // thrown when the deadline passes mid-search

  void set_deadline(Clock::time_point deadline) { deadline_ = deadline; }

  SensorSearch(const SmcProblem& p, const convex::Options& options)
      : p_(p), tol_(0.25 * options.eps) {}

  // balls: kBall pseudo-booleans of the sensor; groups: selector groups
  // whose corner is covered. prefer(var) reports the SAT value.
  Result run(const std::vector<int>& balls,
             const std::vector<const SelectorGroup*>& groups,
             const std::function<bool(int)>& prefer, std::optional<Point> hint) {
    const int nb = static_cast<int>(balls.size());
    disks_.clear();
    double sx = 0.0, sy = 0.0;
    for (int idx : balls) {
      const auto& ball =
          std::get<convex::Ball>(p_.templates[p_.pbs[idx].tmpl].constraints[0]);
      disks_.push_back(ball);
      sx += ball.center.x;
      sy += ball.center.y;
    }
    groups_.clear();
    for (const SelectorGroup* g : groups) {
      Group gr;
      for (int b = 0; b < nb; ++b) {
        if (p_.pbs[balls[b]].var == g->bs_var) gr.ball = b;
      }
      for (int var : g->vars) {
        std::vector<convex::HalfPlane> hs;
        for (const Constraint& c : p_.templates[p_.pbs[p_.pb_of_var.at(var)].tmpl].constraints) {
          hs.push_back(std::get<convex::HalfPlane>(c));
        }
        gr.vars.push_back(var);
        gr.branches.push_back(std::move(hs));
      }
      groups_.push_back(std::move(gr));
    }
    Point guess = hint ? *hint : p_.region.center(p_.region.cell_at(0));
    if (!hint && nb > 0) guess = {sx / nb, sy / nb};

    std::vector<int> all(nb);
    std::iota(all.begin(), all.end(), 0);
    if (const std::optional<Point> at = find(all, guess)) {
      point_ = *at;
      chosen_.clear();
      for (const Group& g : groups_) {
        int pick = -1;
        for (size_t k = 0; k < g.vars.size(); ++k) {
          if (!branch_holds(g.branches[k], *at)) continue;
          if (pick < 0 || (prefer(g.vars[k]) && !prefer(g.vars[pick]))) {
            pick = static_cast<int>(k);
          }
        }
        chosen_.push_back(g.vars[pick]);
      }
      return Result::kFound;
    }
    // Chunked deletion filter over corners.
    std::vector<int> set = all;
    for (size_t chunk = std::max<size_t>(1, set.size() / 2);; chunk /= 2) {
      for (size_t pos = 0; pos < set.size();) {
        const size_t len = std::min(chunk, set.size() - pos);
        std::vector<int> trial(set.begin(), set.begin() + static_cast<long>(pos));
        trial.insert(trial.end(), set.begin() + static_cast<long>(pos + len), set.end());
        if (!find(trial, guess)) {
          set = std::move(trial);
        } else {
          pos += len;
        }
      }
      if (chunk <= 1) break;
    }
    conflict_ = set;
    return Result::kConflict;
  }

  const std::vector<int>& chosen() const { return chosen_; }
  Point point() const { return point_; }
  const std::vector<int>& conflict() const { return conflict_; }

 private:
  struct Group {
    int ball = -1;
    std::vector<int> vars;
    std::vector<std::vector<convex::HalfPlane>> branches;
  };
  struct Line {
    double ax, ay, b;
  };

  bool branch_holds(const std::vector<convex::HalfPlane>& hs, Point q) const {
    for (const convex::HalfPlane& h : hs) {
      if (h.a_x * q.x + h.a_y * q.y - h.b > 2.0 * tol_) return false;
    }
    return true;
  }

  std::optional<Point> find(const std::vector<int>& subset, Point guess) {
    std::vector<bool> in(disks_.size(), false);
    for (int b : subset) in[b] = true;
    std::vector<const convex::Ball*> disks;
    for (int b : subset) disks.push_back(&disks_[b]);
    std::vector<const Group*> groups;
    for (const Group& g : groups_) {
      if (in[g.ball]) groups.push_back(&g);
    }
    const Rect bounds = p_.region.bounds();
    Rect box{bounds.x_min - tol_, bounds.y_min - tol_, bounds.x_max + tol_,
             bounds.y_max + tol_};
    for (const convex::Ball* d : disks) {
      const double r = d->radius + tol_;
      box.x_min = std::max(box.x_min, d->center.x - r);
      box.x_max = std::min(box.x_max, d->center.x + r);
      box.y_min = std::max(box.y_min, d->center.y - r);
      box.y_max = std::min(box.y_max, d->center.y + r);
    }
    if (box.x_min > box.x_max || box.y_min > box.y_max) return std::nullopt;

    auto passes = [&](Point q) {
      if ((++polls_ & 4095) == 0 && Clock::now() > deadline_) throw Expired{};
      if (q.x < box.x_min || q.x > box.x_max || q.y < box.y_min || q.y > box.y_max) {
        return false;
      }
      for (size_t k = 0; k < disks.size(); ++k) {
        if (exact_distance(q, disks[k]->center) - disks[k]->radius > 2.0 * tol_) {
          std::rotate(disks.begin(), disks.begin() + static_cast<long>(k),
                      disks.begin() + static_cast<long>(k) + 1);
          return false;
        }
      }
      for (size_t k = 0; k < groups.size(); ++k) {
        bool any = false;
        for (const auto& hs : groups[k]->branches) {
          if (branch_holds(hs, q)) {
            any = true;
            break;
          }
        }
        if (!any) {
          std::rotate(groups.begin(), groups.begin() + static_cast<long>(k),
                      groups.begin() + static_cast<long>(k) + 1);
          return false;
        }
      }
      return true;
    };
    if (passes(guess)) return guess;

    // Boundary lines crossing the box, inflated by tol.
    std::vector<Line> lines{{-1.0, 0.0, -bounds.x_min + tol_},
                            {1.0, 0.0, bounds.x_max + tol_},
                            {0.0, -1.0, -bounds.y_min + tol_},
                            {0.0, 1.0, bounds.y_max + tol_}};
    std::set<std::array<long long, 3>> seen;
    for (const Group* g : groups) {
      for (const auto& hs : g->branches) {
        for (const convex::HalfPlane& h : hs) {
          const std::array<long long, 3> key{std::llround(h.a_x * 1e9),
                                             std::llround(h.a_y * 1e9),
                                             std::llround(h.b * 1e9)};
          if (!seen.insert(key).second) continue;
          const Line l{h.a_x, h.a_y, h.b + tol_};
          double lo = 1e300, hi = -1e300;
          for (double x : {box.x_min, box.x_max}) {
            for (double y : {box.y_min, box.y_max}) {
              const double v = l.ax * x + l.ay * y - l.b;
              lo = std::min(lo, v);
              hi = std::max(hi, v);
            }
          }
          if (lo <= 0.0 && hi >= 0.0) lines.push_back(l);
        }
      }
    }
    for (const convex::Ball* d : disks) {
      if (passes({d->center.x, d->center.y - d->radius - tol_})) {
        return Point{d->center.x, d->center.y - d->radius - tol_};
      }
    }
    for (size_t a = 0; a < disks.size(); ++a) {
      for (size_t b = a + 1; b < disks.size(); ++b) {
        const Point pc = disks[a]->center, qc = disks[b]->center;
        const double pr = disks[a]->radius + tol_, qr = disks[b]->radius + tol_;
        const double dx = qc.x - pc.x, dy = qc.y - pc.y;
        const double d = std::hypot(dx, dy);
        if (d == 0.0 || d > pr + qr || d < std::abs(pr - qr)) continue;
        const double along = (d * d + pr * pr - qr * qr) / (2.0 * d);
        const double h = std::sqrt(std::max(0.0, pr * pr - along * along));
        const Point m{pc.x + along * dx / d, pc.y + along * dy / d};
        for (double sgn : {1.0, -1.0}) {
          const Point x{m.x - sgn * h * dy / d, m.y + sgn * h * dx / d};
          if (passes(x)) return x;
        }
      }
    }
    for (const Line& l : lines) {
      for (const convex::Ball* d : disks) {
        const double r = d->radius + tol_;
        const double t = l.ax * d->center.x + l.ay * d->center.y - l.b;
        if (std::abs(t) > r) continue;
        const double h = std::sqrt(std::max(0.0, r * r - t * t));
        const Point foot{d->center.x - t * l.ax, d->center.y - t * l.ay};
        for (double sgn : {1.0, -1.0}) {
          const Point x{foot.x - sgn * h * l.ay, foot.y + sgn * h * l.ax};
          if (passes(x)) return x;
        }
      }
    }
    for (size_t a = 0; a < lines.size(); ++a) {
      for (size_t b = a + 1; b < lines.size(); ++b) {
        const Line& u = lines[a];
        const Line& v = lines[b];
        const double det = u.ax * v.ay - u.ay * v.ax;
        if (std::abs(det) < 1e-12) continue;
        const Point x{(u.b * v.ay - u.ay * v.b) / det, (u.ax * v.b - u.b * v.ax) / det};
        if (passes(x)) return x;
      }
    }
    return std::nullopt;
  }

  const SmcProblem& p_;
  double tol_;
  Clock::time_point deadline_ = Clock::time_point::max();
  unsigned long polls_ = 0;
  std::vector<convex::Ball> disks_;
  std::vector<Group> groups_;
  std::vector<int> chosen_;
  std::vector<int> conflict_;
  Point point_;
};

}  // namespace

SolveOutcome smc_solve(SmcProblem& p, Seconds budget) {
  SolveOutcome out;
  if (p.trivially_unsat) {
    out.status = Status::kInfeasible;
    return out;
  }
  const int n = p.sensor_count();
  const bool need_links = !p.reach.empty();
  Loop loop;
  loop.solver = &p.solver;
  loop.templates = &p.templates;
  loop.pbs = &p.pbs;
  loop.pb_index = &p.pb_index;
  loop.sensor_class = p.sensor_type;
  loop.options = p.tables->options();
  for (int i = 0; i < n; ++i) {
    for (const Constraint& c : bounds_constraints(p.region, i)) loop.fixed.push_back(c);
  }
  loop.active = [&]() {
    const std::vector<bool>& m = p.solver.model();
    std::vector<int> act;
    for (int i = 0; i < n; ++i) {
      bool any = false;
      for (int lat : lattice_list(p.bs[i])) {
        const int var = p.bs[i][lat];
        if (m[var]) {
          act.push_back(p.pb_of_var.at(var));
          any = true;
        }
      }
      for (const SelectorGroup& group : p.selector_groups[i]) {
        if (!m[group.bs_var]) continue;
        for (int var : group.vars) {
          if (m[var]) {
            act.push_back(p.pb_of_var.at(var));
            break;
          }
        }
      }
      if (!any) {
        for (int var : p.member[i]) {
          if (var >= 0 && m[var]) {
            act.push_back(p.pb_of_var.at(var));
            break;
          }
        }
      }
    }
    if (need_links) {
      std::set<int> used;
      for (const auto& [i, j, h, var] : p.reach_aux) {
        if (m[var]) used.insert(p.pb_of_var.at(p.bc[std::min(i, j)][std::max(i, j)]));
      }
      act.insert(act.end(), used.begin(), used.end());
    }
    return act;
  };
  loop.start = [&](const std::vector<int>& act) {
    const Rect b = p.region.bounds();
    Coordinates x(n, Point{0.5 * (b.x_min + b.x_max), 0.5 * (b.y_min + b.y_max)});
    std::vector<double> sx(n, 0.0), sy(n, 0.0);
    std::vector<int> cnt(n, 0);
    std::vector<std::optional<Point>> member_at(n);
    for (int idx : act) {
      const PseudoBool& pb = p.pbs[idx];
      const Template& tm = p.templates[pb.tmpl];
      if (tm.kind == TemplateKind::kBall) {
        const auto& ball = std::get<convex::Ball>(tm.constraints[0]);
        sx[pb.sensor_a] += ball.center.x;
        sy[pb.sensor_a] += ball.center.y;
        ++cnt[pb.sensor_a];
      } else if (tm.kind == TemplateKind::kCellMember) {
        member_at[pb.sensor_a] = cell_center_of_template(p.region, tm);
      }
    }
    for (int i = 0; i < n; ++i) {
      if (p.hint[i]) {
        x[i] = *p.hint[i];
      } else if (cnt[i] > 0) {
        x[i] = {sx[i] / cnt[i], sy[i] / cnt[i]};
      } else if (member_at[i]) {
        x[i] = *member_at[i];
      }
    }
    return x;
  };
  SensorSearch search(p, loop.options);
  if (budget.count() < 1e9) {
    search.set_deadline(Clock::now() + std::chrono::duration_cast<Clock::duration>(budget));
  }
  // Cached branch choices keyed by (type, covered corners).
  std::map<std::pair<int, std::vector<int>>, std::vector<int>> cached;
  loop.theory = [&](const std::vector<int>& act, std::vector<int>& refined,
                    std::vector<std::vector<int>>& cores) {
    const std::vector<bool>& m = p.solver.model();
    std::vector<std::vector<int>> balls(n);
    std::vector<std::vector<int>> rest(n);
    std::vector<int> shared;
    for (int idx : act) {
      const PseudoBool& pb = p.pbs[idx];
      const TemplateKind kind = p.templates[pb.tmpl].kind;
      if (kind == TemplateKind::kBall) {
        balls[pb.sensor_a].push_back(idx);
      } else if (kind == TemplateKind::kSelector) {
        rest[pb.sensor_a].push_back(idx);
      } else {
        shared.push_back(idx);
      }
    }
    const std::function<bool(int)> prefer = [&](int var) { return m[var]; };
    refined = shared;
    for (int i = 0; i < n; ++i) {
      if (balls[i].empty()) continue;
      std::vector<int> lats;
      for (int idx : balls[i]) lats.push_back(p.templates[p.pbs[idx].tmpl].corner);
      const auto key = std::make_pair(p.sensor_type[i], lats);
      refined.insert(refined.end(), balls[i].begin(), balls[i].end());
      auto hit = cached.find(key);
      if (hit != cached.end()) {
        for (int tm : hit->second) refined.push_back(p.pb_index.at(pb_key(tm, i, -1, n)));
        continue;
      }
      std::vector<const SelectorGroup*> groups;
      for (const SelectorGroup& g : p.selector_groups[i]) {
        if (m[g.bs_var]) groups.push_back(&g);
      }
      SensorSearch::Result verdict;
      try {
        verdict = search.run(balls[i], groups, prefer, p.hint[i]);
      } catch (const SensorSearch::Expired&) {
        return Loop::Theory::kTimeout;
      }
      switch (verdict) {
        case SensorSearch::Result::kFound: {
          std::vector<int> tms;
          for (int var : search.chosen()) {
            const int idx = p.pb_of_var.at(var);
            refined.push_back(idx);
            tms.push_back(p.pbs[idx].tmpl);
          }
          cached.emplace(key, std::move(tms));
          break;
        }
        case SensorSearch::Result::kConflict: {
          std::vector<int> core;
          for (int b : search.conflict()) core.push_back(balls[i][b]);
          cores.push_back(std::move(core));
          break;
        }
      }
    }
    return cores.empty() ? Loop::Theory::kPass : Loop::Theory::kConflict;
  };
  loop.accept = [&](const Coordinates& x) {
    const Placement placement = to_placement(x, p.sensor_type, p.specs);
    return eval::verify(placement, p.region, p.specs, p.demands, need_links).ok();
  };
  Coordinates witness;
  out.status = loop.run(budget, out.stats, witness);
  if (out.status == Status::kFeasible) {
    out.placement = to_placement(witness, p.sensor_type, p.specs);
  }
  return out;
}

GreedyResult greedy_placement(const GridRegion& region,
                              std::span<const SensorSpec> specs,
                              const Demands& demands, bool connectivity) {
  Tables tb(region, specs, obstacle_rects(region));
  GreedyResult res;
  res.complete = true;
  const int cells = region.cell_count();
  std::vector<int> open;
  for (int g = 0; g < cells; ++g) {
    if (!region.occupied(g)) open.push_back(g);
  }
  const double s = region.cell_size();
  for (size_t t = 0; t < specs.size(); ++t) {
    const int ti = static_cast<int>(t);
    if (demands.max_demand(ti) <= 0) continue;
    const double r = specs[t].sensing_radius;
    const int reach_cells = static_cast<int>(std::ceil(r / s)) + 1;
    // covered[c]: demanded cells an encodable sensor at the centre of open
    // cell c covers.
    std::vector<std::vector<int>> covered(open.size());
    for (size_t ci = 0; ci < open.size(); ++ci) {
      const Cell c = region.cell_at(open[ci]);
      const Point at = region.center(c);
      std::unordered_map<int, bool> corner_ok;
      auto ok = [&](int lat) {
        auto it = corner_ok.find(lat);
        if (it != corner_ok.end()) return it->second;
        const bool v = tb.encodable(ti, at, lat);
        corner_ok.emplace(lat, v);
        return v;
      };
      for (int row = std::max(0, c.row - reach_cells);
           row <= std::min(region.height() - 1, c.row + reach_cells); ++row) {
        for (int col = std::max(0, c.col - reach_cells);
             col <= std::min(region.width() - 1, c.col + reach_cells); ++col) {
          const Cell g{col, row};
          const int gi = region.index(g);
          if (region.occupied(gi) || demands.at(ti, gi) <= 0) continue;
          bool all = true;
          for (int k = 0; k < 4 && all; ++k) all = ok(lattice_of(region, g, k));
          if (all) covered[ci].push_back(gi);
        }
      }
    }
    std::vector<int> residual = demands.per_type[t];
    std::vector<int> chosen;
    while (true) {
      int best = -1, best_gain = 0;
      for (size_t ci = 0; ci < open.size(); ++ci) {
        int gain = 0;
        for (int g : covered[ci]) gain += residual[g] > 0;
        if (gain > best_gain) {
          best_gain = gain;
          best = static_cast<int>(ci);
        }
      }
      if (best < 0) break;
      chosen.push_back(best);
      for (int g : covered[best]) {
        if (residual[g] > 0) --residual[g];
      }
    }
    for (int g = 0; g < cells; ++g) {
      if (!region.occupied(g) && residual[g] > 0) res.complete = false;
    }
    int g0 = -1;
    for (int g = 0; g < cells && g0 < 0; ++g) {
      if (!region.occupied(g) && demands.at(ti, g) > 0) g0 = g;
    }
    std::stable_partition(chosen.begin(), chosen.end(), [&](int ci) {
      return std::find(covered[ci].begin(), covered[ci].end(), g0) !=
             covered[ci].end();
    });
    for (int ci : chosen) {
      res.placement.push_back(
          {region.center(region.cell_at(open[ci])), specs[t].type_id, Role::kPrimary});
    }
  }
  res.connected = !connectivity;
  if (!connectivity) return res;
  if (res.placement.size() <= 1) {
    res.connected = true;
    return res;
  }
  double rc = specs[0].comm_radius;
  for (const SensorSpec& sp : specs) rc = std::min(rc, sp.comm_radius);
  rc -= tb.shrink();
  graphs::CellGraph g;
  g.vertex_of_cell.assign(cells, -1);
  for (int idx : open) {
    g.vertex_of_cell[idx] = static_cast<int>(g.vertices.size());
    g.vertices.push_back(region.cell_at(idx));
  }
  g.adjacency.assign(g.vertices.size(), {});
  g.self_cover.assign(g.vertices.size(), false);
  for (size_t a = 0; a < g.vertices.size(); ++a) {
    for (size_t b = a + 1; b < g.vertices.size(); ++b) {
      if (exact_distance(region.center(g.vertices[a]), region.center(g.vertices[b])) <=
          rc) {
        g.adjacency[a].push_back(static_cast<int>(b));
        g.adjacency[b].push_back(static_cast<int>(a));
      }
    }
  }
  std::vector<int> deployed;
  for (const PlacedSensor& ps : res.placement) {
    const Cell c{static_cast<int>(std::floor(ps.position.x / s)),
                 static_cast<int>(std::floor(ps.position.y / s))};
    deployed.push_back(g.vertex_of_cell[region.index(c)]);
  }
  std::sort(deployed.begin(), deployed.end());
  deployed.erase(std::unique(deployed.begin(), deployed.end()), deployed.end());
  try {
    const graphs::CollapsedGraph cg = graphs::collapse(deployed, g);
    for (int v : graphs::steiner_repair(cg)) {
      res.placement.push_back(
          {region.center(g.vertices[v]), specs[0].type_id, Role::kRelay});
    }
    res.connected = true;
  } catch (const graphs::InfeasibleRepair&) {
    res.connected = false;
  }
  // Relays are type-0 sensors; keep the list grouped by type.
  std::stable_sort(res.placement.begin(), res.placement.end(),
                   [&](const PlacedSensor& a, const PlacedSensor& b) {
                     return type_index(specs, a.type_id) < type_index(specs, b.type_id);
                   });
  return res;
}

SolveOutcome solve_at(const GridRegion& region, std::span<const int> counts,
                      std::span<const SensorSpec> specs, const Demands& demands,
                      Seconds budget, const Config& config, const Placement* hint) {
  const auto t0 = Clock::now();
  SmcProblem p = encode(region, counts, specs, demands, config);
  precompute_exclusions(p);
  if (hint != nullptr) {
    std::vector<std::optional<Point>> positions;
    for (size_t t = 0; t < specs.size(); ++t) {
      int taken = 0;
      for (const PlacedSensor& ps : *hint) {
        if (taken >= counts[t]) break;
        if (type_index(specs, ps.type_id) != static_cast<int>(t)) continue;
        positions.push_back(ps.position);
        ++taken;
      }
      for (; taken < counts[t]; ++taken) positions.push_back(std::nullopt);
    }
    apply_hint(p, positions);
  }
  const Seconds left = budget - Seconds(seconds_since(t0));
  SolveOutcome out = smc_solve(p, left);
  return out;
}

SearchResult binary_search_min_n(const GridRegion& region,
                                 std::span<const SensorSpec> specs,
                                 const Demands& demands, int n_max, Seconds budget,
                                 const Config& config) {
  const auto t0 = Clock::now();
  const int types = static_cast<int>(specs.size());
  SearchResult result;
  const GreedyResult greedy =
      greedy_placement(region, specs, demands, config.connectivity);

  std::vector<int> hi(types, 0);
  for (const PlacedSensor& ps : greedy.placement) ++hi[type_index(specs, ps.type_id)];
  if (!greedy.complete || !greedy.connected) {
    // No centre-based witness: leave room for the solver to do better.
    hi[0] += region.open_count();
  }
  std::vector<int> lo(types);
  for (int t = 0; t < types; ++t) lo[t] = demands.max_demand(t);
  if (lo[0] < 1 && std::accumulate(lo.begin(), lo.end(), 0) < 1) lo[0] = 1;
  if (n_max > 0) {
    if (types != 1) {
      throw std::invalid_argument("n_max applies to single-type searches");
    }
    hi[0] = n_max;
  }
  for (int t = 0; t < types; ++t) {
    if (hi[t] < lo[t]) {
      result.status = Status::kInfeasible;
      return result;
    }
  }

  auto remaining = [&] { return budget.count() - seconds_since(t0); };
  bool timed_out = false;
  auto probe = [&](const std::vector<int>& counts, int planned_left) {
    const double share = std::max(0.0, remaining()) / std::max(1, planned_left);
    const auto tp = Clock::now();
    SolveOutcome out =
        solve_at(region, counts, specs, demands, Seconds(share), config,
                 &greedy.placement);
    result.probes.push_back({counts, out.status, seconds_since(tp)});
    if (out.status == Status::kTimeout) timed_out = true;
    return out;
  };

  auto log2ceil = [](int n) {
    int k = 0;
    while ((1 << k) < n) ++k;
    return k;
  };
  int planned = 1;
  for (int t = 0; t < types; ++t) planned += log2ceil(hi[t] - lo[t] + 1);

  std::vector<int> counts = hi;
  SolveOutcome top = probe(counts, planned--);
  if (top.status != Status::kFeasible) {
    result.status = top.status;
    return result;
  }
  result.placement = top.placement;
  for (int t = 0; t < types; ++t) {
    int best = counts[t];
    int l = lo[t], r = counts[t] - 1;
    while (l <= r) {
      const int mid = l + (r - l) / 2;
      std::vector<int> trial = counts;
      trial[t] = mid;
      if (std::accumulate(trial.begin(), trial.end(), 0) < 1) {
        l = mid + 1;
        continue;
      }
      SolveOutcome out = probe(trial, std::max(1, planned--));
      if (out.status == Status::kFeasible) {
        best = mid;
        result.placement = out.placement;
        r = mid - 1;
      } else {
        l = mid + 1;
      }
    }
    counts[t] = best;
  }
  result.status = Status::kFeasible;
  result.counts = counts;
  result.n_star = std::accumulate(counts.begin(), counts.end(), 0);
  result.proven_minimal = !timed_out;
  return result;
}

StitchOutcome stitch(const GridRegion& region, std::span<const SensorSpec> specs,
                     const std::vector<Placement>& groups, int relay_type,
                     int relays, Seconds budget, const Placement* hint) {
  StitchOutcome out;
  const int n_groups = static_cast<int>(groups.size());
  if (n_groups <= 1) {
    out.status = Status::kFeasible;
    return out;
  }
  if (relays < 1) {
    out.status = Status::kInfeasible;
    return out;
  }
  const convex::Options options = convex::options_for_cell(region.cell_size());
  const double shrink = 2.0 * options.eps;
  const double delta = 1e-4 * region.cell_size();
  const double relay_rc = specs[relay_type].comm_radius;

  std::vector<PlacedSensor> fixed;
  std::vector<int> group_of;
  for (int g = 0; g < n_groups; ++g) {
    for (const PlacedSensor& ps : groups[g]) {
      fixed.push_back(ps);
      group_of.push_back(g);
    }
  }

  sat::Solver solver;
  std::vector<Template> templates;
  std::vector<PseudoBool> pbs;
  std::unordered_map<int, int> pb_of_var;
  std::unordered_map<uint64_t, int> pb_index;
  Registry reg(templates, pbs, pb_of_var, pb_index, solver, relays);
  const int cells = region.cell_count();

  std::vector<std::vector<int>> member(relays, std::vector<int>(cells, -1));
  for (int r = 0; r < relays; ++r) {
    std::vector<Lit> clause;
    for (int g = 0; g < cells; ++g) {
      if (region.occupied(g)) continue;
      const int tmpl = reg.template_id(
          make_proto(TemplateKind::kCellMember, -1, -1, -1, -1, g),
          [&] { return cell_box(region, g, delta); });
      member[r][g] = reg.pb(tmpl, r);
      clause.push_back(pos(member[r][g]));
    }
    solver.add_clause(clause);
  }
  // Relay r links to group g through one of the group's fixed sensors.
  std::vector<std::vector<int>> group_link(relays, std::vector<int>(n_groups));
  std::vector<std::vector<std::vector<int>>> via(
      relays, std::vector<std::vector<int>>(n_groups));
  for (int r = 0; r < relays; ++r) {
    for (int g = 0; g < n_groups; ++g) {
      group_link[r][g] = solver.new_var();
      std::vector<Lit> clause{neg(group_link[r][g])};
      for (int f = 0; f < static_cast<int>(fixed.size()); ++f) {
        if (group_of[f] != g) continue;
        const double rc =
            std::min(relay_rc, specs[type_index(specs, fixed[f].type_id)].comm_radius) -
            shrink;
        const Point at = fixed[f].position;
        const int tmpl = reg.template_id(
            make_proto(TemplateKind::kBall, -1, -1, f),
            [&] { return std::vector<Constraint>{convex::Ball{0, at, rc}}; });
        const int var = reg.pb(tmpl, r);
        via[r][g].push_back(var);
        clause.push_back(pos(var));
      }
      solver.add_clause(clause);
    }
  }
  std::vector<std::vector<int>> link(relays, std::vector<int>(relays, -1));
  for (int a = 0; a < relays; ++a) {
    for (int b = a + 1; b < relays; ++b) {
      const int tmpl = reg.template_id(
          make_proto(TemplateKind::kLink, -1, relay_type, relay_type),
          [&] { return std::vector<Constraint>{convex::PairBall{0, 1, relay_rc - shrink}}; });
      link[a][b] = reg.pb(tmpl, a, b);
    }
  }
  const int nodes = n_groups + relays;
  auto edge = [&](int i, int j) -> std::optional<Lit> {
    if (i < n_groups && j < n_groups) return std::nullopt;
    if (i < n_groups) return pos(group_link[j - n_groups][i]);
    if (j < n_groups) return pos(group_link[i - n_groups][j]);
    const int a = std::min(i, j) - n_groups, b = std::max(i, j) - n_groups;
    return pos(link[a][b]);
  };
  const ReachEncoding enc = encode_reachability(solver, nodes, edge);

  std::vector<std::optional<Point>> hinted(relays);
  if (hint != nullptr) {
    for (int r = 0; r < relays && r < static_cast<int>(hint->size()); ++r) {
      hinted[r] = (*hint)[r].position;
    }
    std::vector<std::vector<bool>> adj(nodes, std::vector<bool>(nodes, false));
    std::vector<bool> known(nodes, true);
    for (int r = 0; r < relays; ++r) {
      if (!hinted[r]) {
        known[n_groups + r] = false;
        continue;
      }
      const Coordinates x{*hinted[r]};
      bool placed = false;
      for (int g = 0; g < cells; ++g) {
        if (member[r][g] < 0) continue;
        const bool pick =
            !placed && satisfied(templates[pbs[pb_of_var.at(member[r][g])].tmpl].constraints, x);
        solver.set_phase(member[r][g], pick);
        placed = placed || pick;
      }
      for (int g = 0; g < n_groups; ++g) {
        bool any = false;
        for (int var : via[r][g]) {
          const bool ok = !any && satisfied(templates[pbs[pb_of_var.at(var)].tmpl].constraints, x);
          solver.set_phase(var, ok);
          any = any || ok;
        }
        solver.set_phase(group_link[r][g], any);
        adj[g][n_groups + r] = adj[n_groups + r][g] = any;
      }
      for (int b = r + 1; b < relays; ++b) {
        if (!hinted[b]) continue;
        const bool ok = exact_distance(*hinted[r], *hinted[b]) <= relay_rc - shrink;
        solver.set_phase(link[r][b], ok);
        adj[n_groups + r][n_groups + b] = adj[n_groups + b][n_groups + r] = ok;
      }
    }
    hint_reachability(solver, enc, adj, known);
  }

  Loop loop;
  loop.solver = &solver;
  loop.templates = &templates;
  loop.pbs = &pbs;
  loop.pb_index = &pb_index;
  loop.sensor_class.assign(relays, 0);
  loop.options = options;
  for (int r = 0; r < relays; ++r) {
    for (const Constraint& c : bounds_constraints(region, r)) loop.fixed.push_back(c);
  }
  loop.active = [&]() {
    const std::vector<bool>& m = solver.model();
    std::vector<int> act;
    for (int r = 0; r < relays; ++r) {
      for (int g = 0; g < cells; ++g) {
        if (member[r][g] >= 0 && m[member[r][g]]) {
          act.push_back(pb_of_var.at(member[r][g]));
          break;
        }
      }
    }
    std::set<int> used;
    for (const auto& [i, j, h, var] : enc.aux) {
      if (!m[var]) continue;
      if (i >= n_groups && j >= n_groups) {
        used.insert(pb_of_var.at(link[std::min(i, j) - n_groups][std::max(i, j) - n_groups]));
      } else {
        const int r = (i >= n_groups ? i : j) - n_groups;
        const int g = i >= n_groups ? j : i;
        for (int var : via[r][g]) {
          if (m[var]) {
            used.insert(pb_of_var.at(var));
            break;
          }
        }
      }
    }
    act.insert(act.end(), used.begin(), used.end());
    return act;
  };
  loop.start = [&](const std::vector<int>& act) {
    Coordinates x(relays, region.center(region.open_cells().front()));
    std::vector<std::optional<Point>> centre(relays);
    for (int idx : act) {
      const Template& tm = templates[pbs[idx].tmpl];
      if (tm.kind == TemplateKind::kCellMember) {
        centre[pbs[idx].sensor_a] = region.center(region.cell_at(tm.cell));
      }
    }
    for (int r = 0; r < relays; ++r) {
      if (hinted[r]) {
        x[r] = *hinted[r];
      } else if (centre[r]) {
        x[r] = *centre[r];
      }
    }
    return x;
  };
  auto relay_placement = [&](const Coordinates& x) {
    Placement p;
    for (const Point& at : x) p.push_back({at, specs[relay_type].type_id, Role::kRelay});
    return p;
  };
  loop.accept = [&](const Coordinates& x) {
    Placement all(fixed.begin(), fixed.end());
    const Placement rel = relay_placement(x);
    for (const PlacedSensor& ps : rel) {
      if (placement_blocked(ps.position, region)) return false;
      all.push_back(ps);
    }
    return eval::component_count(all, specs) == 1;
  };
  Coordinates witness;
  out.status = loop.run(budget, out.stats, witness);
  if (out.status == Status::kFeasible) out.relays = relay_placement(witness);
  return out;
}

}  // namespace sensynth::smc
