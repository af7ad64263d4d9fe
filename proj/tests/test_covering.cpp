#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sensynth/covering.hpp"
#include "sensynth/eval.hpp"

using namespace sensynth;
using namespace sensynth::covering;

namespace {

CoveringProblem problem_for(const GridRegion& r, double rs, int k) {
  const std::vector<graphs::CellGraph> vis{graphs::build_visibility_graph(r, rs)};
  const std::vector<int> ks{k};
  return build_covering(r, vis, Demands::Uniform(r, ks));
}

int exhaustive(const CoveringProblem& p) {
  return oracle::min_cover_exhaustive(p.neighborhoods[0], p.demand[0], p.vertex_count());
}

}  // namespace

TEST(Covering, SingleCellNeedsThree) {
  const CoverResult r = solve_covering(problem_for(GridRegion::Open(1, 1, 1.0), 2.0, 3),
                                       Seconds(5));
  EXPECT_TRUE(r.optimal);
  EXPECT_EQ(r.objective, 3);
}

TEST(Covering, StripCentreCoversAll) {
  const CoveringProblem p = problem_for(GridRegion::Open(3, 1, 1.0), 2.3, 1);
  const CoverResult r = solve_covering(p, Seconds(5));
  EXPECT_EQ(r.objective, 1);
  EXPECT_EQ(r.placement.n[0][1], 1);
  EXPECT_EQ(exhaustive(p), 1);
}

TEST(Covering, IsolatedHalvesNeedTwo) {
  GridRegion g = GridRegion::Open(3, 3, 1.0);
  for (int row = 0; row < 3; ++row) g.set_occupied({1, row}, true);
  const CoveringProblem p = problem_for(g, 10.0, 1);
  EXPECT_EQ(solve_covering(p, Seconds(5)).objective, 2);
  EXPECT_EQ(exhaustive(p), 2);
}

TEST(Covering, ZeroDemandGivesEmptyPlacement) {
  const CoverResult r = solve_covering(problem_for(GridRegion::Open(3, 3, 1.0), 3.0, 0),
                                       Seconds(5));
  EXPECT_EQ(r.objective, 0);
  EXPECT_EQ(r.placement.total(), 0);
}

TEST(Covering, UncoverableCellIsReported) {
  GridRegion g = GridRegion::Open(2, 1, 1.0);
  try {
    problem_for(g, 1.0, 1);
    FAIL() << "expected InfeasibleCover";
  } catch (const InfeasibleCover& e) {
    EXPECT_EQ(e.cell, (Cell{0, 0}));
  }
}

TEST(Covering, NeighbourhoodsMatchIndependentRule) {
  std::mt19937_64 rng(4);
  GridRegion g = oracle::random_region(5, 5, 0.2, rng);
  const CoveringProblem p = problem_for(g, 3.0, 1);
  for (int i = 0; i < p.vertex_count(); ++i) {
    std::vector<int> want;
    for (int j = 0; j < p.vertex_count(); ++j) {
      if (oracle::max_corner_distance(p.cells[i], p.cells[j], 1.0) <= 3.0 &&
          !oracle::hull_blocked(p.cells[i], p.cells[j], g, 16)) {
        want.push_back(j);
      }
    }
    std::vector<int> got = p.neighborhoods[0][i];
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, want);
  }
}

TEST(Covering, GreedyFeasibleAndNotBelowOptimum) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 12; ++trial) {
    GridRegion g = oracle::random_region(4, 4, 0.2, rng);
    if (g.open_count() == 0) continue;
    const CoveringProblem p = problem_for(g, 2.5, 1 + trial % 3);
    const IntegerPlacement greedy = greedy_cover(p);
    EXPECT_TRUE(satisfies(p, greedy));
    const CoverResult r = solve_covering(p, Seconds(10));
    ASSERT_TRUE(r.optimal);
    EXPECT_TRUE(satisfies(p, r.placement));
    EXPECT_EQ(r.objective, exhaustive(p));
    EXPECT_GE(greedy.total(), r.objective);
    EXPECT_LE(r.lower_bound, r.objective + 1e-9);
  }
}

TEST(CoveringLp, TriangleHasHalfIntegralOptimum) {
  const LpResult r = solve_covering_lp({{0, 1}, {1, 2}, {0, 2}}, {1, 1, 1}, 3, {0, 0, 0},
                                       {-1, -1, -1});
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.objective, 1.5, 1e-9);
  for (double x : r.x) EXPECT_NEAR(x, 0.5, 1e-9);
}

TEST(CoveringLp, RespectsBounds) {
  const LpResult r = solve_covering_lp({{0, 1}}, {3}, 2, {0, 0}, {1, -1});
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.objective, 3.0, 1e-9);
  EXPECT_LE(r.x[0], 1.0 + 1e-9);
  const LpResult infeasible = solve_covering_lp({{0}}, {2}, 1, {0}, {1});
  EXPECT_FALSE(infeasible.feasible);
}

// Dense, highly degenerate instance. Any feasible x satisfies
// sum x * max|nbhd| >= sum rhs, and the LP can never beat an integer cover.
TEST(CoveringLp, LargeDegenerateInstanceStaysFeasible) {
  GridRegion g = GridRegion::Open(20, 20, 1.0);
  g.set_occupied({7, 7}, true);
  g.set_occupied({12, 3}, true);
  const CoveringProblem p = problem_for(g, 6.0, 3);
  const int m = p.vertex_count();
  size_t widest = 0;
  for (const auto& nb : p.neighborhoods[0]) widest = std::max(widest, nb.size());
  const LpResult r = solve_covering_lp(p.neighborhoods[0], std::vector<int>(m, 3), m,
                                       std::vector<int>(m, 0), std::vector<int>(m, -1));
  ASSERT_TRUE(r.feasible);
  EXPECT_GE(r.objective * static_cast<double>(widest), 3.0 * m - 1e-6);
  EXPECT_LE(r.objective, greedy_cover(p).total() + 1e-9);
  for (const auto& nb : p.neighborhoods[0]) {
    double got = 0.0;
    for (int j : nb) got += r.x[j];
    EXPECT_GE(got, 3.0 - 1e-6);
  }
}

TEST(CoveringLp, StopsAtDeadline) {
  GridRegion g = GridRegion::Open(20, 20, 1.0);
  const CoveringProblem p = problem_for(g, 6.0, 3);
  const int m = p.vertex_count();
  const LpResult r = solve_covering_lp(p.neighborhoods[0], std::vector<int>(m, 3), m,
                                       std::vector<int>(m, 0), std::vector<int>(m, -1),
                                       Seconds(0));
  EXPECT_TRUE(r.timed_out);
  EXPECT_FALSE(r.feasible);
}

TEST(Repair, ConnectedInputUnchanged) {
  GridRegion g = GridRegion::Open(3, 1, 1.0);
  const graphs::CellGraph gc = graphs::build_connectivity_graph(g, 2.3);
  IntegerPlacement x{{{1, 1, 0}}};
  const RepairResult r = connectivity_repair(x, gc);
  EXPECT_TRUE(r.relay_vertices.empty());
  EXPECT_EQ(r.placement.n, x.n);
}

TEST(Repair, BridgeAddsOneRelay) {
  GridRegion g = GridRegion::Open(3, 1, 1.0);
  const graphs::CellGraph gc = graphs::build_connectivity_graph(g, 2.3);
  const RepairResult r = connectivity_repair(IntegerPlacement{{{2, 0, 1}}}, gc);
  ASSERT_EQ(r.relay_vertices.size(), 1u);
  EXPECT_EQ(r.relay_vertices[0], 1);
  EXPECT_EQ(r.placement.n[0][1], 1);
}

TEST(Repair, UnconnectableHalvesThrow) {
  GridRegion g = GridRegion::Open(3, 1, 1.0);
  g.set_occupied({1, 0}, true);
  const graphs::CellGraph gc = graphs::build_connectivity_graph(g, 2.3);
  EXPECT_THROW(connectivity_repair(IntegerPlacement{{{1, 1}}}, gc), graphs::InfeasibleRepair);
}

TEST(Repair, OutputVerifiesAtCellCentres) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    GridRegion g = oracle::random_region(8, 8, 0.1, rng);
    const SensorSpec spec{0, 2.5, 2.5};
    const std::vector<SensorSpec> specs{spec};
    const std::vector<int> k{1};
    const CoveringProblem p = problem_for(g, spec.sensing_radius, 1);
    const graphs::CellGraph gc = graphs::build_connectivity_graph(g, spec.comm_radius);
    try {
      const RepairResult rep = connectivity_repair(solve_covering(p, Seconds(10)).placement, gc);
      const Placement placement = to_placement(p, rep.placement, g, specs);
      EXPECT_TRUE(eval::verify(placement, g, specs, Demands::Uniform(g, k)).ok());
    } catch (const graphs::InfeasibleRepair&) {
      // Free space split under r_c: nothing to verify.
    } catch (const InfeasibleCover&) {
    }
  }
}

namespace {

std::vector<int> assignment(const DdSystem& s, const std::vector<int>& c,
                            const std::vector<int>& q) {
  std::vector<int> v(s.var_count, 0);
  for (int i = 0; i < s.n; ++i) {
    v[s.c_var[i]] = c[i];
    v[s.q_var[i]] = q[i];
  }
  for (int i = 0; i < s.n; ++i) {
    int d = 0;
    for (int j = 0; j < s.n; ++j) {
      if (j == i) continue;
      const int a = s.edge[i * s.n + j] && q[i] && q[j] ? 1 : 0;
      v[s.a_var[i][j]] = a;
      d += a;
    }
    v[s.d_var[i]] = d;
  }
  return v;
}

bool accepted(const DdSystem& s, const std::vector<int>& values) {
  for (const LinearConstraint& c : s.constraints) {
    if (!c.holds(values)) return false;
  }
  return true;
}

}  // namespace

TEST(DdEncoding, TwoAdjacentDeployedCellsFeasible) {
  GridRegion g = GridRegion::Open(2, 1, 1.0);
  const auto gv = graphs::build_visibility_graph(g, 3.0);
  const auto gc = graphs::build_connectivity_graph(g, 3.0);
  const DdSystem s = dd_connectivity_encoding(gv, gc, 1);
  const auto v = assignment(s, {1, 1}, {1, 1});
  EXPECT_EQ(v[s.a_var[0][1]], 1);
  EXPECT_TRUE(accepted(s, v));
  const DdCheck check = check_dd_exhaustive(s, gc);
  EXPECT_GT(check.feasible_assignments, 0);
  EXPECT_EQ(check.disconnected_accepted, 0);
}

TEST(DdEncoding, PathOfThreeMeetsBoundWithEquality) {
  GridRegion g = GridRegion::Open(3, 1, 1.0);
  const auto gv = graphs::build_visibility_graph(g, 2.3);
  const auto gc = graphs::build_connectivity_graph(g, 2.3);
  const DdSystem s = dd_connectivity_encoding(gv, gc, 1);
  EXPECT_TRUE(accepted(s, assignment(s, {1, 1, 1}, {1, 1, 1})));
}

TEST(DdEncoding, PathOfFourRejected) {
  GridRegion g = GridRegion::Open(4, 1, 1.0);
  const auto gv = graphs::build_visibility_graph(g, 2.3);
  const auto gc = graphs::build_connectivity_graph(g, 2.3);
  const DdSystem s = dd_connectivity_encoding(gv, gc, 1);
  EXPECT_FALSE(accepted(s, assignment(s, {1, 1, 1, 1}, {1, 1, 1, 1})));
  const DdCheck check = check_dd_exhaustive(s, gc);
  EXPECT_GT(check.connected_rejected, 0);
  EXPECT_EQ(check.disconnected_accepted, 0);
}

TEST(DdEncoding, SingleDeployedCellFeasible) {
  GridRegion g = GridRegion::Open(1, 1, 1.0);
  const auto gv = graphs::build_visibility_graph(g, 2.0);
  const auto gc = graphs::build_connectivity_graph(g, 2.0);
  const DdSystem s = dd_connectivity_encoding(gv, gc, 1);
  EXPECT_TRUE(accepted(s, assignment(s, {1}, {1})));
}

TEST(DdEncoding, DisconnectedPairRejected) {
  GridRegion g = GridRegion::Open(3, 1, 1.0);
  const auto gv = graphs::build_visibility_graph(g, 10.0);
  const auto gc = graphs::build_connectivity_graph(g, 2.3);
  const DdSystem s = dd_connectivity_encoding(gv, gc, 1);
  EXPECT_FALSE(accepted(s, assignment(s, {1, 0, 1}, {1, 0, 1})));
}

TEST(DdEncoding, CheckerRefusesLargeInstances) {
  GridRegion g = GridRegion::Open(3, 3, 1.0);
  const auto gv = graphs::build_visibility_graph(g, 2.0);
  const auto gc = graphs::build_connectivity_graph(g, 2.0);
  EXPECT_THROW(check_dd_exhaustive(dd_connectivity_encoding(gv, gc, 1), gc),
               std::invalid_argument);
}

TEST(SelectMethod, TableRows) {
  EXPECT_EQ(select_method(0.3, 5, 2, 500).method, Method::kMilp);
  EXPECT_EQ(select_method(0.05, 5, 2, 500).method, Method::kMilp);
  EXPECT_EQ(select_method(0.3, 2, 2, 500).method, Method::kSmc);
  EXPECT_EQ(select_method(0.10, 1, 1, 500).method, Method::kSmc);
  const Recommendation either = select_method(0.20, 5, 1, 800, 1200);
  EXPECT_EQ(either.method, Method::kEither);
  EXPECT_EQ(select_method(0.20, 5, 1, 1500, 1200).method, Method::kSmc);
  EXPECT_EQ(select_method(0.20, 2, 1, 800).method, Method::kSmc);
  EXPECT_EQ(select_method(0.40, 5, 0.5, 800).method, Method::kSmc);
  EXPECT_THROW(select_method(1.5, 0, 1, 10), std::invalid_argument);
}
