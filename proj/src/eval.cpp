#include "sensynth/eval.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace sensynth::eval {

std::vector<std::vector<int>> coverage_counts(const Placement& placement,
                                              const GridRegion& region,
                                              std::span<const SensorSpec> specs) {
  std::vector<std::vector<int>> counts(specs.size(),
                                       std::vector<int>(region.cell_count(), 0));
  const double s = region.cell_size();
  const int lw = region.width() + 1;
  const int lh = region.height() + 1;
  std::vector<signed char> seen(static_cast<size_t>(lw) * lh);
  for (const PlacedSensor& sensor : placement) {
    const int t = type_index(specs, sensor.type_id);
    const double r = specs[t].sensing_radius;
    const Point p = sensor.position;
    const int c0 = std::max(0, static_cast<int>(std::floor((p.x - r) / s)));
    const int c1 = std::min(region.width() - 1,
                            static_cast<int>(std::floor((p.x + r) / s)));
    const int r0 = std::max(0, static_cast<int>(std::floor((p.y - r) / s)));
    const int r1 = std::min(region.height() - 1,
                            static_cast<int>(std::floor((p.y + r) / s)));
    if (c0 > c1 || r0 > r1) continue;
    // Corner verdicts, computed lazily once per sensor.
    std::fill(seen.begin(), seen.end(), -1);
    auto corner_ok = [&](int i, int j) {
      signed char& v = seen[region.lattice_index(i, j)];
      if (v < 0) v = covers_point(p, r, region.lattice_point(i, j), region);
      return v == 1;
    };
    for (int row = r0; row <= r1; ++row) {
      for (int col = c0; col <= c1; ++col) {
        const Cell cell{col, row};
        if (region.occupied(cell)) continue;
        if (corner_ok(col, row) && corner_ok(col + 1, row) &&
            corner_ok(col + 1, row + 1) && corner_ok(col, row + 1)) {
          ++counts[t][region.index(cell)];
        }
      }
    }
  }
  return counts;
}

int component_count(const Placement& placement,
                    std::span<const SensorSpec> specs) {
  const int n = static_cast<int>(placement.size());
  std::vector<double> rc(n);
  for (int i = 0; i < n; ++i) {
    rc[i] = specs[type_index(specs, placement[i].type_id)].comm_radius;
  }
  std::vector<int> label(n, -1);
  int components = 0;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::deque<int> queue{s};
    label[s] = components;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v = 0; v < n; ++v) {
        if (label[v] >= 0) continue;
        if (exact_distance(placement[u].position, placement[v].position) <=
            std::min(rc[u], rc[v])) {
          label[v] = components;
          queue.push_back(v);
        }
      }
    }
    ++components;
  }
  return components;
}

VerificationReport verify(const Placement& placement, const GridRegion& region,
                          std::span<const SensorSpec> specs,
                          const Demands& demands, bool check_connectivity) {
  VerificationReport report;
  for (size_t i = 0; i < placement.size(); ++i) {
    if (placement_blocked(placement[i].position, region)) {
      report.misplaced.push_back(static_cast<int>(i));
    }
  }
  report.placement_ok = report.misplaced.empty();

  report.per_cell_counts = coverage_counts(placement, region, specs);
  for (int t = 0; t < demands.types(); ++t) {
    for (int idx = 0; idx < region.cell_count(); ++idx) {
      if (region.occupied(idx)) continue;
      const int want = demands.at(t, idx);
      const int got = t < static_cast<int>(specs.size())
                          ? report.per_cell_counts[t][idx]
                          : 0;
      if (got < want) report.uncovered.push_back({region.cell_at(idx), t, got, want});
    }
  }
  report.coverage_ok = report.uncovered.empty();

  report.component_count = component_count(placement, specs);
  report.connected = !check_connectivity || report.component_count <= 1;
  return report;
}

double coverage_redundancy(const Placement& placement, const GridRegion& region,
                           std::span<const SensorSpec> specs,
                           std::span<const int> k) {
  const int k_total = std::accumulate(k.begin(), k.end(), 0);
  if (k_total < 1) throw std::invalid_argument("redundancy needs k >= 1");
  const auto counts = coverage_counts(placement, region, specs);
  double sum = 0.0;
  int open = 0;
  for (int idx = 0; idx < region.cell_count(); ++idx) {
    if (region.occupied(idx)) continue;
    ++open;
    for (const auto& per_type : counts) sum += per_type[idx];
  }
  if (open == 0) return 0.0;
  return sum / open / k_total;
}

}  // namespace sensynth::eval
