#include "sensynth/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>

#include "sensynth/covering.hpp"
#include "sensynth/eval.hpp"
#include "sensynth/graphs.hpp"
#include "sensynth/smc.hpp"

namespace sensynth::hierarchy {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double min_comm_radius(std::span<const SensorSpec> specs) {
  double rc = specs[0].comm_radius;
  for (const SensorSpec& s : specs) rc = std::min(rc, s.comm_radius);
  return rc;
}

struct SubSolve {
  Placement placement;
  bool minimal = true;
  bool ok = false;
  bool timeout = false;
};

SubSolve solve_cover(const GridRegion& region, Method method,
                     std::span<const SensorSpec> specs, const Demands& demands,
                     bool connectivity, Seconds budget, uint64_t seed) {
  SubSolve out;
  if (!demands.any_positive()) {
    out.ok = true;
    return out;
  }
  if (method == Method::kSmc) {
    smc::Config cfg;
    cfg.connectivity = connectivity;
    cfg.seed = seed;
    const smc::SearchResult r =
        smc::binary_search_min_n(region, specs, demands, 0, budget, cfg);
    if (r.status == smc::Status::kFeasible) {
      out.placement = r.placement;
      out.minimal = r.proven_minimal;
      out.ok = true;
    } else if (r.status == smc::Status::kTimeout) {
      // No verified SMC answer in time: keep the greedy cover if it holds.
      const smc::GreedyResult g =
          smc::greedy_placement(region, specs, demands, connectivity);
      out.minimal = false;
      out.timeout = true;
      out.ok = g.complete && g.connected &&
               eval::verify(g.placement, region, specs, demands, connectivity).ok();
      if (out.ok) out.placement = g.placement;
    }
    return out;
  }
  std::vector<graphs::CellGraph> vis;
  for (const SensorSpec& s : specs) {
    vis.push_back(graphs::build_visibility_graph(region, s.sensing_radius));
  }
  try {
    const covering::CoveringProblem p = covering::build_covering(region, vis, demands);
    const covering::CoverResult r = covering::solve_covering(p, budget);
    covering::IntegerPlacement x = r.placement;
    std::vector<int> relays;
    if (connectivity) {
      const graphs::CellGraph g_c =
          graphs::build_connectivity_graph(region, min_comm_radius(specs));
      const covering::RepairResult rep = covering::connectivity_repair(x, g_c);
      x = rep.placement;
      relays = rep.relay_vertices;
      for (int v : relays) --x.n[0][v];
    }
    out.placement = covering::to_placement(p, x, region, specs);
    for (int v : relays) {
      out.placement.push_back(
          {region.center(p.cells[v]), specs[0].type_id, Role::kRelay});
    }
    out.minimal = r.optimal;
    out.ok = true;
  } catch (const covering::InfeasibleCover&) {
    out.ok = false;
  } catch (const graphs::InfeasibleRepair&) {
    out.ok = false;
  }
  return out;
}

// Component label per sensor under the exact communication relation.
std::vector<int> component_labels(const Placement& placement,
                                  std::span<const SensorSpec> specs, int& count) {
  const int n = static_cast<int>(placement.size());
  std::vector<double> rc(n);
  for (int i = 0; i < n; ++i) {
    rc[i] = specs[type_index(specs, placement[i].type_id)].comm_radius;
  }
  std::vector<int> label(n, -1);
  count = 0;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    label[s] = count;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v = 0; v < n; ++v) {
        if (label[v] < 0 &&
            exact_distance(placement[u].position, placement[v].position) <=
                std::min(rc[u], rc[v])) {
          label[v] = count;
          queue.push_back(v);
        }
      }
    }
    ++count;
  }
  return label;
}

Cell cell_of(Point p, const GridRegion& region) {
  const double s = region.cell_size();
  const int col = std::clamp(static_cast<int>(std::floor(p.x / s)), 0, region.width() - 1);
  const int row = std::clamp(static_cast<int>(std::floor(p.y / s)), 0, region.height() - 1);
  return {col, row};
}

// Relays at cell centres from a Steiner tree over the connectivity graph.
std::optional<Placement> steiner_relays(const Placement& placement,
                                        const GridRegion& region,
                                        std::span<const SensorSpec> specs) {
  const graphs::CellGraph g_c =
      graphs::build_connectivity_graph(region, min_comm_radius(specs));
  std::vector<int> deployed;
  for (const PlacedSensor& ps : placement) {
    const int v = g_c.vertex_of_cell[region.index(cell_of(ps.position, region))];
    if (v >= 0) deployed.push_back(v);
  }
  std::sort(deployed.begin(), deployed.end());
  deployed.erase(std::unique(deployed.begin(), deployed.end()), deployed.end());
  try {
    const graphs::CollapsedGraph cg = graphs::collapse(deployed, g_c);
    Placement relays;
    for (int v : graphs::steiner_repair(cg)) {
      relays.push_back({region.center(g_c.vertices[v]), specs[0].type_id, Role::kRelay});
    }
    return relays;
  } catch (const graphs::InfeasibleRepair&) {
    return std::nullopt;
  }
}

}  // namespace

Partition partition(const GridRegion& region, int sub_w, int sub_h) {
  if (sub_w < 1 || sub_h < 1) throw std::invalid_argument("sub-area size must be >= 1");
  Partition p;
  p.sub_w = sub_w;
  p.sub_h = sub_h;
  for (int row = 0; row < region.height(); row += sub_h) {
    for (int col = 0; col < region.width(); col += sub_w) {
      p.areas.push_back({col, row, std::min(sub_w, region.width() - col),
                         std::min(sub_h, region.height() - row)});
    }
  }
  return p;
}

std::vector<std::vector<int>> coverage_counts(const Placement& placement,
                                              const GridRegion& region,
                                              std::span<const SensorSpec> specs) {
  return eval::coverage_counts(placement, region, specs);
}

Result synthesize_flat(const GridRegion& region, Method method,
                       std::span<const SensorSpec> specs, std::span<const int> k,
                       Seconds budget, uint64_t seed) {
  const Demands demands = Demands::Uniform(region, k);
  SubSolve s = solve_cover(region, method, specs, demands, true, budget, seed);
  if (!s.ok && s.timeout) throw SynthesisTimeout("no placement within the budget");
  if (!s.ok) throw SubareaInfeasible("region has no feasible placement", 0);
  Result r;
  r.placement = std::move(s.placement);
  r.timed_out = !s.minimal;
  r.areas = 1;
  for (const PlacedSensor& ps : r.placement) {
    if (ps.role == Role::kRelay) ++r.relays_added;
  }
  r.primary_count = static_cast<int>(r.placement.size()) - r.relays_added;
  int comps = 0;
  component_labels(r.placement, specs, comps);
  r.components_before_stitch = comps;
  return r;
}

Result hierarchical_synthesize(const GridRegion& region, Method method,
                               std::span<const SensorSpec> specs,
                               std::span<const int> k, const Config& config) {
  if (specs.empty() || k.size() != specs.size()) {
    throw std::invalid_argument("one demand per sensor type");
  }
  const Partition part = partition(region, config.sub_w, config.sub_h);
  if (part.areas.size() == 1) {
    return synthesize_flat(region, method, specs, k, config.budget, config.seed);
  }
  const auto t0 = Clock::now();
  const double total = config.budget.count();
  const double s = region.cell_size();
  Result res;
  res.areas = static_cast<int>(part.areas.size());

  auto run_pass = [&](const std::vector<std::vector<int>>& demand, double deadline) {
    for (size_t a = 0; a < part.areas.size(); ++a) {
      const SubArea& area = part.areas[a];
      const GridRegion crop = region.crop(area.col0, area.row0, area.width, area.height);
      if (crop.open_count() == 0) continue;
      Demands local;
      for (size_t t = 0; t < specs.size(); ++t) {
        std::vector<int> cells(crop.cell_count(), 0);
        for (int idx = 0; idx < crop.cell_count(); ++idx) {
          const Cell c = crop.cell_at(idx);
          const Cell g{c.col + area.col0, c.row + area.row0};
          if (!crop.occupied(idx)) cells[idx] = demand[t][region.index(g)];
        }
        local.per_type.push_back(std::move(cells));
      }
      const double left = std::max(0.0, deadline - seconds_since(t0));
      const double share = left / static_cast<double>(part.areas.size() - a);
      SubSolve sub = solve_cover(crop, method, specs, local, config.subarea_connectivity,
                                 Seconds(share), config.seed + a);
      if (!sub.ok && sub.timeout) {
        throw SynthesisTimeout("sub-area " + std::to_string(a) + " ran out of time");
      }
      if (!sub.ok) {
        throw SubareaInfeasible("sub-area " + std::to_string(a) + " has no feasible placement",
                                static_cast<int>(a));
      }
      res.timed_out = res.timed_out || !sub.minimal;
      for (PlacedSensor ps : sub.placement) {
        ps.position.x += area.col0 * s;
        ps.position.y += area.row0 * s;
        res.placement.push_back(ps);
      }
    }
  };

  std::vector<std::vector<int>> demand(specs.size(),
                                       std::vector<int>(region.cell_count(), 0));
  for (size_t t = 0; t < specs.size(); ++t) {
    for (int idx = 0; idx < region.cell_count(); ++idx) {
      if (!region.occupied(idx)) demand[t][idx] = config.repair ? std::min(k[t], 1) : k[t];
    }
  }
  run_pass(demand, total * (config.repair ? 0.45 : 0.85));
  if (config.repair) {
    const auto counts = eval::coverage_counts(res.placement, region, specs);
    bool any = false;
    for (size_t t = 0; t < specs.size(); ++t) {
      for (int idx = 0; idx < region.cell_count(); ++idx) {
        demand[t][idx] = region.occupied(idx) ? 0 : std::max(0, k[t] - counts[t][idx]);
        any = any || demand[t][idx] > 0;
      }
    }
    if (any) run_pass(demand, total * 0.85);
  }
  res.primary_count = 0;
  for (const PlacedSensor& ps : res.placement) res.primary_count += ps.role == Role::kPrimary;

  int comps = 0;
  const std::vector<int> label = component_labels(res.placement, specs, comps);
  res.components_before_stitch = comps;
  if (comps > 1) {
    const std::optional<Placement> steiner = steiner_relays(res.placement, region, specs);
    std::optional<Placement> relays;
    if (method == Method::kSmc) {
      std::vector<Placement> groups(comps);
      for (size_t i = 0; i < res.placement.size(); ++i) {
        groups[label[i]].push_back(res.placement[i]);
      }
      const int base = comps - 1;
      std::vector<int> sizes;
      for (int m = base; m <= 4 * base; m *= 2) sizes.push_back(m);
      for (size_t attempt = 0; attempt < sizes.size() && !relays; ++attempt) {
        const double left = std::max(0.0, total - seconds_since(t0));
        const double share = left / static_cast<double>(sizes.size() - attempt);
        Placement hint;
        if (steiner && static_cast<int>(steiner->size()) <= sizes[attempt]) hint = *steiner;
        const smc::StitchOutcome st = smc::stitch(region, specs, groups, 0, sizes[attempt],
                                                  smc::Seconds(share), &hint);
        if (st.status == smc::Status::kFeasible) relays = st.relays;
      }
      if (!relays) relays = steiner;
    } else {
      relays = steiner;
    }
    if (!relays) {
      throw StitchFailed(std::to_string(comps) + " components could not be connected",
                         comps);
    }
    for (const PlacedSensor& r : *relays) res.placement.push_back(r);
  }
  for (const PlacedSensor& ps : res.placement) res.relays_added += ps.role == Role::kRelay;
  return res;
}

}  // namespace sensynth::hierarchy
