#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sensynth/eval.hpp"
#include "sensynth/scenario.hpp"
#include "sensynth/smc.hpp"

using namespace sensynth;
using namespace sensynth::smc;

namespace {

const std::vector<SensorSpec> kWide{{0, 10.0, 10.0}};

SolveOutcome solve_once(const GridRegion& r, std::vector<int> counts,
                        const std::vector<SensorSpec>& specs, std::vector<int> k,
                        double budget = 30.0) {
  SmcProblem p = encode(r, counts, specs, Demands::Uniform(r, k));
  return smc_solve(p, Seconds(budget));
}

}  // namespace

TEST(SmcEncode, SingleCellSingleSensor) {
  const GridRegion r = GridRegion::Open(1, 1, 1.0);
  const SolveOutcome out = solve_once(r, {1}, kWide, {1});
  ASSERT_EQ(out.status, Status::kFeasible);
  ASSERT_EQ(out.placement.size(), 1u);
  const Point p = out.placement[0].position;
  EXPECT_GE(p.x, 0.0);
  EXPECT_LE(p.x, 1.0);
  EXPECT_GE(p.y, 0.0);
  EXPECT_LE(p.y, 1.0);
}

TEST(SmcEncode, CardinalityRulesOutTooFewSensors) {
  const GridRegion r = GridRegion::Open(1, 1, 1.0);
  EXPECT_EQ(solve_once(r, {1}, kWide, {3}).status, Status::kInfeasible);
}

TEST(SmcEncode, CountingBoundGivesEarlyUnsat) {
  const GridRegion r = GridRegion::Open(1, 1, 1.0);
  const std::vector<int> counts{2};
  const std::vector<int> k{3};
  SmcProblem p = encode(r, counts, kWide, Demands::Uniform(r, k));
  EXPECT_TRUE(p.trivially_unsat);
}

TEST(SmcEncode, HeterogeneousDemandsVerify) {
  const GridRegion r = GridRegion::Open(2, 2, 1.0);
  const std::vector<SensorSpec> specs{{7, 3.0, 5.0}, {9, 3.5, 5.0}};
  const SolveOutcome out = solve_once(r, {1, 2}, specs, {1, 2});
  ASSERT_EQ(out.status, Status::kFeasible);
  int a = 0, b = 0;
  for (const auto& s : out.placement) (s.type_id == 7 ? a : b)++;
  EXPECT_EQ(a, 1);
  EXPECT_EQ(b, 2);
  const std::vector<int> k{1, 2};
  const auto report = eval::verify(out.placement, r, specs, Demands::Uniform(r, k));
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(solve_once(r, {1, 1}, specs, {1, 2}).status, Status::kInfeasible);
}

TEST(SmcExclusions, SmallRegionAddsNone) {
  const GridRegion r = GridRegion::Open(2, 2, 1.0);
  const std::vector<int> counts{3};
  const std::vector<int> k{1};
  SmcProblem p = encode(r, counts, kWide, Demands::Uniform(r, k));
  precompute_exclusions(p);
  EXPECT_EQ(p.exclusion_stats.total(), 0);
}

TEST(SmcExclusions, CountEqualsSensorsTimesFarPairs) {
  const GridRegion r = GridRegion::Open(6, 1, 1.0);
  const std::vector<SensorSpec> specs{{0, 1.5, 10.0}};
  const std::vector<int> counts{2};
  const std::vector<int> k{1};
  SmcProblem p = encode(r, counts, specs, Demands::Uniform(r, k));
  precompute_exclusions(p);
  int64_t corner_far = 0;
  for (int a = 0; a < 14; ++a) {
    for (int b = a + 1; b < 14; ++b) {
      const Point pa{static_cast<double>(a % 7), static_cast<double>(a / 7)};
      const Point pb{static_cast<double>(b % 7), static_cast<double>(b / 7)};
      if (oracle::dist(pa, pb) > 3.0) ++corner_far;
    }
  }
  int64_t cell_far = 0;
  for (int a = 0; a < 6; ++a) {
    for (int b = a + 1; b < 6; ++b) {
      if (oracle::max_corner_distance({a, 0}, {b, 0}, 1.0) > 3.0) ++cell_far;
    }
  }
  EXPECT_EQ(p.exclusion_stats.corner_pairs, 2 * corner_far);
  EXPECT_EQ(p.exclusion_stats.cell_pairs, 2 * cell_far);
}

TEST(SmcSolve, OneSensorCoversOpenSquare) {
  const GridRegion r = GridRegion::Open(2, 2, 1.0);
  const std::vector<SensorSpec> specs{{0, 3.0, 3.0}};
  const SolveOutcome out = solve_once(r, {1}, specs, {1});
  ASSERT_EQ(out.status, Status::kFeasible);
  const std::vector<int> k{1};
  EXPECT_TRUE(eval::verify(out.placement, r, specs, Demands::Uniform(r, k)).ok());
}

TEST(SmcSolve, WallSplitsStripIntoTwoViews) {
  GridRegion r = GridRegion::Open(3, 1, 1.0);
  r.set_occupied({1, 0}, true);
  const std::vector<SensorSpec> specs{{0, 2.5, 10.0}};
  EXPECT_EQ(solve_once(r, {1}, specs, {1}).status, Status::kInfeasible);
  const SolveOutcome two = solve_once(r, {2}, specs, {1});
  ASSERT_EQ(two.status, Status::kFeasible);
  const std::vector<int> k{1};
  EXPECT_TRUE(eval::verify(two.placement, r, specs, Demands::Uniform(r, k)).ok());
}

TEST(SmcSolve, NoObstaclesNeedsNoSelectors) {
  const GridRegion r = GridRegion::Open(3, 3, 1.0);
  const std::vector<int> counts{2};
  const std::vector<int> k{1};
  SmcProblem p = encode(r, counts, kWide, Demands::Uniform(r, k));
  EXPECT_TRUE(p.rects.empty());
  for (const auto& groups : p.selector_groups) EXPECT_TRUE(groups.empty());
}

TEST(BinarySearch, ThreeCoLocatedSensorsForOneCell) {
  const GridRegion r = GridRegion::Open(1, 1, 1.0);
  const std::vector<int> k{3};
  const SearchResult s = binary_search_min_n(r, kWide, Demands::Uniform(r, k), 0, Seconds(30));
  ASSERT_EQ(s.status, Status::kFeasible);
  EXPECT_EQ(s.n_star, 3);
  EXPECT_TRUE(s.proven_minimal);
}

TEST(BinarySearch, CapBelowCountingBoundIsInfeasible) {
  const GridRegion r = GridRegion::Open(1, 1, 1.0);
  const std::vector<int> k{3};
  EXPECT_EQ(binary_search_min_n(r, kWide, Demands::Uniform(r, k), 2, Seconds(30)).status,
            Status::kInfeasible);
}

TEST(BinarySearch, FeasibleAtTwoNotAtOne) {
  GridRegion r = GridRegion::Open(3, 1, 1.0);
  r.set_occupied({1, 0}, true);
  const std::vector<SensorSpec> specs{{0, 2.5, 10.0}};
  const std::vector<int> k{1};
  const Demands d = Demands::Uniform(r, k);
  const SearchResult s = binary_search_min_n(r, specs, d, 0, Seconds(30));
  ASSERT_EQ(s.status, Status::kFeasible);
  EXPECT_EQ(s.n_star, 2);
  EXPECT_TRUE(eval::verify(s.placement, r, specs, d).ok());
  EXPECT_EQ(solve_at(r, std::vector<int>{1}, specs, d, Seconds(30)).status, Status::kInfeasible);
}

TEST(Greedy, CompleteOnOpenGrid) {
  const GridRegion r = GridRegion::Open(6, 6, 1.0);
  const std::vector<SensorSpec> specs{{0, 2.0, 2.0}};
  const std::vector<int> k{2};
  const Demands d = Demands::Uniform(r, k);
  const GreedyResult g = greedy_placement(r, specs, d, true);
  ASSERT_TRUE(g.complete);
  ASSERT_TRUE(g.connected);
  EXPECT_TRUE(eval::verify(g.placement, r, specs, d).ok());
}

TEST(Stitch, RelayJoinsTwoGroups) {
  const GridRegion r = GridRegion::Open(6, 1, 1.0);
  const std::vector<SensorSpec> specs{{0, 1.0, 2.0}};
  const std::vector<Placement> groups{{{{0.5, 0.5}, 0, Role::kPrimary}},
                                      {{{3.5, 0.5}, 0, Role::kPrimary}}};
  EXPECT_NE(stitch(r, specs, groups, 0, 0, Seconds(10)).status, Status::kFeasible);
  const StitchOutcome out = stitch(r, specs, groups, 0, 1, Seconds(10));
  ASSERT_EQ(out.status, Status::kFeasible);
  ASSERT_EQ(out.relays.size(), 1u);
  Placement all{groups[0][0], groups[1][0], out.relays[0]};
  EXPECT_EQ(eval::component_count(all, specs), 1);
}

TEST(SolveAt, HonoursShortBudgetOnHeavyScene) {
  scenario::ScenarioSpec spec;
  spec.extent = 0.25;
  spec.gamma_target = 5;
  spec.seed = 1;
  const GridRegion r = scenario::generate(spec).region;
  const std::vector<SensorSpec> specs{{0, 6.0, 6.0}};
  const std::vector<int> k{3};
  const std::vector<int> counts{30};
  const auto t0 = std::chrono::steady_clock::now();
  const SolveOutcome out =
      solve_at(r, counts, specs, Demands::Uniform(r, k), Seconds(0.5));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 5.0);
  if (out.status == Status::kFeasible) {
    EXPECT_TRUE(eval::verify(out.placement, r, specs, Demands::Uniform(r, k)).ok());
  }
}
