#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sensynth/geometry.hpp"

using namespace sensynth;

namespace {

GridRegion with_occupied(int w, int h, std::initializer_list<Cell> cells) {
  GridRegion r = GridRegion::Open(w, h, 1.0);
  for (Cell c : cells) r.set_occupied(c, true);
  return r;
}

}  // namespace

TEST(GridRegion, CornersAndCounts) {
  GridRegion r = with_occupied(3, 2, {{1, 0}});
  EXPECT_EQ(r.open_count(), 5);
  EXPECT_EQ(r.occupied_count(), 1);
  const auto c = r.corners({2, 1});
  EXPECT_EQ(c[0], (Point{2, 1}));
  EXPECT_EQ(c[2], (Point{3, 2}));
  EXPECT_THROW(GridRegion(0, 2, 1.0, {}), std::invalid_argument);
}

TEST(GridRegion, CropUsesLocalCoordinates) {
  GridRegion r = with_occupied(4, 4, {{2, 3}});
  GridRegion c = r.crop(2, 2, 2, 2);
  EXPECT_EQ(c.width(), 2);
  EXPECT_TRUE(c.occupied(Cell{0, 1}));
  EXPECT_EQ(c.occupied_count(), 1);
}

TEST(Discretize, EmptyListLeavesAllOpen) {
  GridRegion r = discretize_obstacles({}, 4, 4, 1.0);
  EXPECT_EQ(r.open_count(), 16);
}

TEST(Discretize, AlignedBoxOccupiesOneCell) {
  const std::vector<Polygon> polys{{{1, 1}, {2, 1}, {2, 2}, {1, 2}}};
  GridRegion r = discretize_obstacles(polys, 4, 4, 1.0);
  EXPECT_EQ(r.occupied_count(), 1);
  EXPECT_TRUE(r.occupied(Cell{1, 1}));
}

TEST(Discretize, TriangleClippingTwoCells) {
  const std::vector<Polygon> polys{{{0.6, 0.0}, {1.4, 0.0}, {1.0, 0.3}}};
  GridRegion r = discretize_obstacles(polys, 3, 3, 1.0);
  EXPECT_TRUE(r.occupied(Cell{0, 0}));
  EXPECT_TRUE(r.occupied(Cell{1, 0}));
  EXPECT_EQ(r.occupied_count(), 2);
}

TEST(Discretize, EdgeTouchLeavesNeighbourOpen) {
  const std::vector<Polygon> polys{{{1, 1}, {2, 1}, {2, 2}, {1, 2}}};
  GridRegion r = discretize_obstacles(polys, 3, 3, 1.0);
  EXPECT_FALSE(r.occupied(Cell{0, 1}));
  EXPECT_FALSE(r.occupied(Cell{2, 2}));
}

TEST(Discretize, DegeneratePolygonRejected) {
  const std::vector<Polygon> polys{{{0, 0}, {1, 1}}};
  EXPECT_THROW(discretize_obstacles(polys, 2, 2, 1.0), std::invalid_argument);
}

TEST(ExactDistance, Examples) {
  EXPECT_DOUBLE_EQ(exact_distance({0, 0}, {3, 4}), 5.0);
  EXPECT_DOUBLE_EQ(exact_distance({2, 2}, {2, 2}), 0.0);
  EXPECT_DOUBLE_EQ(exact_distance({1, 2}, {4, 6}), 5.0);
}

TEST(ExactLos, ObstacleFreeAlwaysVisible) {
  GridRegion r = GridRegion::Open(5, 5, 1.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    EXPECT_TRUE(exact_los({u(rng), u(rng)}, {u(rng), u(rng)}, r));
  }
}

TEST(ExactLos, DiagonalThroughObstacleBlocked) {
  GridRegion r = with_occupied(3, 3, {{1, 1}});
  EXPECT_FALSE(exact_los({0.5, 0.5}, {2.5, 2.5}, r));
  EXPECT_TRUE(oracle::segment_hits_box({0.5, 0.5}, {2.5, 2.5}, {1, 1, 2, 2}));
}

TEST(ExactLos, SegmentBesideObstacleVisible) {
  GridRegion r = with_occupied(3, 3, {{1, 1}});
  EXPECT_TRUE(exact_los({0.5, 0.5}, {0.5, 2.5}, r));
  EXPECT_FALSE(oracle::segment_hits_box({0.5, 0.5}, {0.5, 2.5}, {1, 1, 2, 2}));
}

TEST(ExactLos, GrazingFaceOrVertexBlocks) {
  GridRegion r = with_occupied(3, 3, {{1, 1}});
  EXPECT_FALSE(exact_los({0, 1}, {3, 1}, r));      // along the bottom face
  EXPECT_FALSE(exact_los({0, 0}, {3, 3}, r));      // through two vertices
  EXPECT_TRUE(exact_los({1, 1}, {0, 0}, r));       // endpoint on a vertex
}

TEST(ExactLos, SymmetricOnRandomScenes) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  for (int scene = 0; scene < 20; ++scene) {
    GridRegion r = oracle::random_region(6, 6, 0.2, rng);
    for (int i = 0; i < 200; ++i) {
      const Point p{u(rng), u(rng)}, q{u(rng), u(rng)};
      EXPECT_EQ(exact_los(p, q, r), exact_los(q, p, r));
      EXPECT_EQ(exact_los(p, q, r), oracle::los(p, q, r));
    }
  }
}

TEST(RelaxedDistance, Examples) {
  GridRegion r = GridRegion::Open(4, 1, 1.0);
  EXPECT_DOUBLE_EQ(relaxed_distance({0, 0}, {0, 0}, r), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(relaxed_distance({0, 0}, {1, 0}, r), std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(relaxed_distance({0, 0}, {3, 0}, r), std::sqrt(17.0));
  EXPECT_DOUBLE_EQ(relaxed_distance({3, 0}, {0, 0}, r), std::sqrt(17.0));
}

TEST(RelaxedDistance, MatchesCornerEnumerationAndBoundsSamples) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridRegion r = GridRegion::Open(6, 5, 0.5);
  for (int a = 0; a < r.cell_count(); ++a) {
    for (int b = 0; b < r.cell_count(); b += 3) {
      const Cell ca = r.cell_at(a), cb = r.cell_at(b);
      const double d = relaxed_distance(ca, cb, r);
      EXPECT_NEAR(d, oracle::max_corner_distance(ca, cb, 0.5), 1e-12);
      const Point p{(ca.col + u(rng)) * 0.5, (ca.row + u(rng)) * 0.5};
      const Point q{(cb.col + u(rng)) * 0.5, (cb.row + u(rng)) * 0.5};
      EXPECT_GE(d + 1e-12, exact_distance(p, q));
    }
  }
}

TEST(RelaxedPredicates, OccupiedArgumentIsContractViolation) {
  GridRegion r = with_occupied(2, 2, {{1, 1}});
  EXPECT_THROW(relaxed_distance({1, 1}, {0, 0}, r), ContractViolation);
  EXPECT_THROW(relaxed_visibility({0, 0}, {1, 1}, r), ContractViolation);
}

TEST(RelaxedVisibility, Examples) {
  EXPECT_TRUE(relaxed_visibility({0, 0}, {3, 2}, GridRegion::Open(4, 4, 1.0)));
  GridRegion diag = with_occupied(3, 3, {{1, 1}});
  EXPECT_FALSE(relaxed_visibility({0, 0}, {2, 2}, diag));
  EXPECT_TRUE(oracle::hull_blocked({0, 0}, {2, 2}, diag));
  GridRegion side = with_occupied(3, 3, {{2, 1}});
  EXPECT_TRUE(relaxed_visibility({0, 0}, {0, 2}, side));
  EXPECT_FALSE(oracle::hull_blocked({0, 0}, {0, 2}, side));
}

TEST(RelaxedVisibility, AgreesWithHullSamplingOracle) {
  std::mt19937_64 rng(11);
  for (int scene = 0; scene < 6; ++scene) {
    GridRegion r = oracle::random_region(5, 5, 0.2, rng);
    const auto open = r.open_cells();
    for (size_t a = 0; a < open.size(); ++a) {
      for (size_t b = a; b < open.size(); ++b) {
        EXPECT_EQ(relaxed_visibility(open[a], open[b], r),
                  !oracle::hull_blocked(open[a], open[b], r, 16))
            << open[a].col << "," << open[a].row << " " << open[b].col << "," << open[b].row;
      }
    }
  }
}

TEST(RelaxedVisibility, ImpliesExactLosForInteriorPoints) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1e-9, 1.0 - 1e-9);
  for (int scene = 0; scene < 10; ++scene) {
    GridRegion r = oracle::random_region(6, 6, 0.25, rng);
    const auto open = r.open_cells();
    for (size_t a = 0; a < open.size(); ++a) {
      for (size_t b = 0; b < open.size(); b += 2) {
        if (!relaxed_visibility(open[a], open[b], r)) continue;
        for (int k = 0; k < 10; ++k) {
          const Point p{open[a].col + u(rng), open[a].row + u(rng)};
          const Point q{open[b].col + u(rng), open[b].row + u(rng)};
          ASSERT_TRUE(oracle::los(p, q, r));
        }
      }
    }
  }
}
