#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sensynth/covering.hpp"
#include "sensynth/eval.hpp"
#include "sensynth/sweep.hpp"

using namespace sensynth;
using namespace sensynth::eval;

TEST(Verify, EmptyPlacementFailsCoverage) {
  const GridRegion r = GridRegion::Open(2, 2, 1.0);
  const std::vector<SensorSpec> specs{{0, 3.0, 3.0}};
  const std::vector<int> k{1};
  const VerificationReport rep = verify({}, r, specs, Demands::Uniform(r, k));
  EXPECT_FALSE(rep.coverage_ok);
  EXPECT_EQ(rep.uncovered.size(), 4u);
}

TEST(Verify, SingleSensorSingleCell) {
  const GridRegion r = GridRegion::Open(1, 1, 1.0);
  const std::vector<SensorSpec> specs{{0, 1.0, 1.0}};
  const std::vector<int> k{1};
  const VerificationReport rep =
      verify({{{0.5, 0.5}, 0, Role::kPrimary}}, r, specs, Demands::Uniform(r, k));
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.component_count, 1);
}

TEST(Verify, SensorInsideObstacleFlagged) {
  GridRegion r = GridRegion::Open(2, 1, 1.0);
  r.set_occupied({1, 0}, true);
  const std::vector<SensorSpec> specs{{0, 2.0, 2.0}};
  const std::vector<int> k{1};
  const VerificationReport rep =
      verify({{{1.5, 0.5}, 0, Role::kPrimary}}, r, specs, Demands::Uniform(r, k));
  EXPECT_FALSE(rep.placement_ok);
  EXPECT_EQ(rep.misplaced, (std::vector<int>{0}));
}

TEST(Verify, ConnectivityUsesSmallerRadius) {
  const GridRegion r = GridRegion::Open(4, 1, 1.0);
  const std::vector<SensorSpec> specs{{0, 5.0, 2.0}, {1, 5.0, 4.0}};
  const std::vector<int> k{0, 0};
  const Placement p{{{0.5, 0.5}, 0, Role::kPrimary}, {{3.5, 0.5}, 1, Role::kPrimary}};
  const VerificationReport rep = verify(p, r, specs, Demands::Uniform(r, k));
  EXPECT_EQ(rep.component_count, 2);
  EXPECT_FALSE(rep.connected);
}

TEST(Verify, AgreesWithIndependentCoverageCount) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  for (int scene = 0; scene < 10; ++scene) {
    const GridRegion r = oracle::random_region(6, 6, 0.15, rng);
    const std::vector<SensorSpec> specs{{0, 2.5, 3.0}};
    Placement p;
    for (int i = 0; i < 6; ++i) p.push_back({{u(rng), u(rng)}, 0, Role::kPrimary});
    const auto counts = coverage_counts(p, r, specs);
    for (int idx = 0; idx < r.cell_count(); ++idx) {
      const Cell c = r.cell_at(idx);
      if (r.occupied(c)) continue;
      int want = 0;
      for (const PlacedSensor& s : p) {
        bool all = true;
        for (Point corner : oracle::cell_corners(c, 1.0)) {
          all = all && oracle::dist(s.position, corner) <= 2.5 &&
                oracle::los(s.position, corner, r);
        }
        want += all;
      }
      EXPECT_EQ(counts[0][idx], want);
    }
  }
}

TEST(Verify, RelaxedCoverNeverFailsExactCheck) {
  // Cell-centre placements from the covering solver rely on the relaxed
  // predicates; the exact verifier must accept every one of them.
  std::mt19937_64 rng(31);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const GridRegion r = oracle::random_region(5, 5, 0.2, rng);
    if (r.open_count() == 0) continue;
    const std::vector<SensorSpec> specs{{0, 2.0 + (trial % 5) * 0.5, 10.0}};
    const std::vector<int> k{1 + trial % 2};
    const std::vector<graphs::CellGraph> vis{
        graphs::build_visibility_graph(r, specs[0].sensing_radius)};
    try {
      const auto p = covering::build_covering(r, vis, Demands::Uniform(r, k));
      const auto x = covering::greedy_cover(p);
      const Placement placement = covering::to_placement(p, x, r, specs);
      const auto rep = verify(placement, r, specs, Demands::Uniform(r, k), false);
      ASSERT_TRUE(rep.coverage_ok) << "trial " << trial;
      ASSERT_TRUE(rep.placement_ok);
      ++checked;
    } catch (const covering::InfeasibleCover&) {
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(Redundancy, SixOverThreeIsTwo) {
  const GridRegion r = GridRegion::Open(2, 2, 1.0);
  const std::vector<SensorSpec> specs{{0, 5.0, 5.0}};
  Placement p(6, {{1.0, 1.0}, 0, Role::kPrimary});
  EXPECT_DOUBLE_EQ(coverage_redundancy(p, r, specs, std::vector<int>{3}), 2.0);
  Placement exact(3, {{1.0, 1.0}, 0, Role::kPrimary});
  EXPECT_DOUBLE_EQ(coverage_redundancy(exact, r, specs, std::vector<int>{3}), 1.0);
  EXPECT_THROW(coverage_redundancy(p, r, specs, std::vector<int>{0}), std::invalid_argument);
}

TEST(Redundancy, HandCountedStrip) {
  // Counts (2, 1, 1) as in the hierarchy hand count: mean 4/3, k = 1.
  const GridRegion r = GridRegion::Open(3, 1, 1.0);
  const std::vector<SensorSpec> specs{{0, 1.2, 5.0}};
  const Placement p{{{0.5, 0.5}, 0, Role::kPrimary},
                    {{1.0, 0.5}, 0, Role::kPrimary},
                    {{2.5, 0.5}, 0, Role::kPrimary}};
  EXPECT_NEAR(coverage_redundancy(p, r, specs, std::vector<int>{1}), 4.0 / 3.0, 1e-12);
}

TEST(Classify, TenPercentAndIntervals) {
  EXPECT_EQ(classify({1.0, 1.0, 1.0}, {1.05, 1.05, 1.05}), Verdict::kSmcSlight);
  EXPECT_EQ(classify({1.5, 1.5, 1.5}, {1.0, 1.0, 1.0}), Verdict::kMilpSignificant);
  EXPECT_EQ(classify({1.0, 1.01, 0.99}, {1.5, 1.51, 1.49}), Verdict::kSmcSignificant);
  // Far apart means but wide intervals: only slight.
  EXPECT_EQ(classify({1.0, 2.0, 0.5}, {1.5, 1.5, 1.5}), Verdict::kSmcSlight);
  EXPECT_EQ(classify({}, {1.0}), Verdict::kMilpSignificant);
  EXPECT_EQ(classify({}, {}), Verdict::kInfeasible);
}

TEST(Sweep, OneCellGivesOneRowPerSeedAndMethod) {
  SweepConfig c;
  c.width = c.height = 6;
  c.extents = {0.1};
  c.gammas = {0};
  c.betas = {2.0};
  c.seeds = 1;
  c.k = 1;
  c.sensing_radius = 3.0;
  c.budget = std::chrono::duration<double>(30);
  const SweepResult r = sweep(c);
  ASSERT_EQ(r.rows.size(), 2u);
  ASSERT_EQ(r.cells.size(), 1u);
  for (const SweepRow& row : r.rows) {
    EXPECT_TRUE(row.verified);
    EXPECT_EQ(row.relays_added, 0);  // beta = 2: coverage implies connectivity
  }
  std::ostringstream csv;
  write_csv(r, csv);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_EQ(text.rfind("extent,gamma_target,gamma_achieved,beta,method,hierarchy,seed,", 0), 0u);
}
