#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sensynth/graphs.hpp"

using namespace sensynth;
using namespace sensynth::graphs;

namespace {

bool has_edge(const CellGraph& g, Cell a, Cell b, const GridRegion& r) {
  return g.adjacent(g.vertex_of_cell[r.index(a)], g.vertex_of_cell[r.index(b)]);
}

BoolMatrix random_graph(int n, double p, std::mt19937_64& rng) {
  BoolMatrix m(n, std::vector<bool>(n, false));
  std::bernoulli_distribution coin(p);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) m[i][j] = m[j][i] = coin(rng);
  }
  return m;
}

}  // namespace

TEST(VisibilityGraph, SingleCell) {
  GridRegion r = GridRegion::Open(1, 1, 1.0);
  CellGraph wide = build_visibility_graph(r, 1.5);
  EXPECT_EQ(wide.size(), 1);
  EXPECT_EQ(wide.edge_count(), 0);
  EXPECT_TRUE(wide.self_cover[0]);
  EXPECT_FALSE(build_visibility_graph(r, 1.4).self_cover[0]);
}

TEST(VisibilityGraph, StripNeighboursOnly) {
  GridRegion r = GridRegion::Open(3, 1, 1.0);
  CellGraph g = build_visibility_graph(r, 3.0);
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      const bool want = oracle::max_corner_distance({a, 0}, {b, 0}, 1.0) <= 3.0;
      EXPECT_EQ(has_edge(g, {a, 0}, {b, 0}, r), want);
    }
  }
  EXPECT_EQ(g.edge_count(), 2);
}

TEST(VisibilityGraph, OccupiedCornerRemovesDiagonalPair) {
  GridRegion r = GridRegion::Open(2, 2, 1.0);
  r.set_occupied({1, 1}, true);
  CellGraph g = build_visibility_graph(r, 10.0);
  EXPECT_EQ(g.size(), 3);
  const auto open = r.open_cells();
  for (size_t a = 0; a < open.size(); ++a) {
    for (size_t b = a + 1; b < open.size(); ++b) {
      EXPECT_EQ(has_edge(g, open[a], open[b], r), !oracle::hull_blocked(open[a], open[b], r));
    }
  }
  EXPECT_FALSE(has_edge(g, {1, 0}, {0, 1}, r));
}

TEST(VisibilityGraph, SubsetOfConnectivityGraph) {
  std::mt19937_64 rng(2);
  for (int scene = 0; scene < 5; ++scene) {
    GridRegion r = oracle::random_region(7, 7, 0.2, rng);
    CellGraph v = build_visibility_graph(r, 3.0);
    CellGraph c = build_connectivity_graph(r, 4.0);
    ASSERT_EQ(v.size(), c.size());
    for (int i = 0; i < v.size(); ++i) {
      for (int j : v.adjacency[i]) EXPECT_TRUE(c.adjacent(i, j));
    }
  }
}

TEST(ConnectivityGraph, PairwiseRelaxedDistance) {
  GridRegion r = GridRegion::Open(4, 3, 1.0);
  r.set_occupied({1, 1}, true);
  CellGraph g = build_connectivity_graph(r, 3.5);
  const auto open = r.open_cells();
  ASSERT_EQ(g.size(), static_cast<int>(open.size()));
  for (size_t a = 0; a < open.size(); ++a) {
    for (size_t b = a + 1; b < open.size(); ++b) {
      EXPECT_EQ(has_edge(g, open[a], open[b], r),
                oracle::max_corner_distance(open[a], open[b], 1.0) <= 3.5);
    }
  }
}

TEST(ConnectivityGraph, SingleCellAndTinyRadius) {
  EXPECT_EQ(build_connectivity_graph(GridRegion::Open(1, 1, 1.0), 2.0).edge_count(), 0);
  EXPECT_EQ(build_connectivity_graph(GridRegion::Open(3, 3, 1.0), 0.1).edge_count(), 0);
}

TEST(Components, Examples) {
  GridRegion r = GridRegion::Open(3, 1, 1.0);
  CellGraph g = build_connectivity_graph(r, 10.0);
  EXPECT_EQ(connected_components(g, std::vector<int>{}).count, 0);
  EXPECT_EQ(connected_components(g, std::vector<int>{0, 1, 2}).count, 1);
  CellGraph sparse = build_connectivity_graph(r, 0.1);
  EXPECT_EQ(connected_components(sparse, std::vector<int>{0, 2}).count, 2);
}

TEST(HopConnectivity, Examples) {
  BoolMatrix path{{false, true, false}, {true, false, true}, {false, true, false}};
  EXPECT_TRUE(hop_connectivity(path));
  EXPECT_TRUE(hop_matrix(path, 2)[0][2]);
  EXPECT_FALSE(hop_matrix(path, 1)[0][2]);
  BoolMatrix two(4, std::vector<bool>(4, false));
  two[0][1] = two[1][0] = two[2][3] = two[3][2] = true;
  EXPECT_FALSE(hop_connectivity(two));
}

TEST(HopConnectivity, MatchesBfsOnRandomGraphs) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> size(1, 12);
  std::uniform_real_distribution<double> density(0.05, 0.6);
  for (int i = 0; i < 150; ++i) {
    const BoolMatrix m = random_graph(size(rng), density(rng), rng);
    EXPECT_EQ(hop_connectivity(m), oracle::bfs_connected(m));
    EXPECT_EQ(bfs_connected(m), oracle::bfs_connected(m));
  }
}

namespace {

// 1 x w strip whose cells link only to their neighbours.
CellGraph strip_graph(int w, GridRegion& r) {
  r = GridRegion::Open(w, 1, 1.0);
  return build_connectivity_graph(r, 2.3);
}

}  // namespace

TEST(Collapse, ConnectedDeploymentNeedsNoRepair) {
  GridRegion r;
  CellGraph g = strip_graph(4, r);
  CollapsedGraph cg = collapse(std::vector<int>{0, 1}, g);
  EXPECT_EQ(cg.terminals().size(), 1u);
  EXPECT_TRUE(steiner_repair(cg).empty());
}

TEST(Steiner, OneMiddleCellBridgesTwoComponents) {
  GridRegion r;
  CellGraph g = strip_graph(3, r);
  CollapsedGraph cg = collapse(std::vector<int>{0, 2}, g);
  EXPECT_EQ(cg.terminals().size(), 2u);
  const std::vector<int> added = steiner_repair(cg);
  ASSERT_EQ(added.size(), 1u);
  EXPECT_EQ(g.vertices[added[0]], (Cell{1, 0}));
}

TEST(Steiner, HopDistanceThreeAddsTwoInteriorCells) {
  GridRegion r;
  CellGraph g = strip_graph(4, r);
  std::vector<int> added = steiner_repair(collapse(std::vector<int>{0, 3}, g));
  std::sort(added.begin(), added.end());
  ASSERT_EQ(added.size(), 2u);
  EXPECT_EQ(g.vertices[added[0]], (Cell{1, 0}));
  EXPECT_EQ(g.vertices[added[1]], (Cell{2, 0}));
  std::vector<int> all{0, 3};
  all.insert(all.end(), added.begin(), added.end());
  EXPECT_EQ(connected_components(g, all).count, 1);
}

TEST(Steiner, UnreachableTerminalsReportInfeasible) {
  GridRegion r = GridRegion::Open(3, 1, 1.0);
  r.set_occupied({1, 0}, true);
  CellGraph g = build_connectivity_graph(r, 2.3);
  CollapsedGraph cg = collapse(std::vector<int>{0, 1}, g);
  try {
    steiner_repair(cg);
    FAIL() << "expected InfeasibleRepair";
  } catch (const InfeasibleRepair& e) {
    EXPECT_FALSE(e.isolated_components.empty());
  }
}

TEST(Steiner, RepairConnectsRandomDeployments) {
  std::mt19937_64 rng(23);
  for (int scene = 0; scene < 20; ++scene) {
    GridRegion r = GridRegion::Open(8, 8, 1.0);
    CellGraph g = build_connectivity_graph(r, 2.3);
    std::vector<int> deployed;
    std::bernoulli_distribution coin(0.1);
    for (int v = 0; v < g.size(); ++v) {
      if (coin(rng)) deployed.push_back(v);
    }
    if (deployed.empty()) deployed.push_back(0);
    std::vector<int> all = deployed;
    for (int v : steiner_repair(collapse(deployed, g))) {
      EXPECT_EQ(std::count(deployed.begin(), deployed.end(), v), 0);
      all.push_back(v);
    }
    EXPECT_EQ(connected_components(g, all).count, 1);
  }
}
