#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <filesystem>

#include "sensynth/scenario.hpp"

using namespace sensynth;
using namespace sensynth::scenario;

namespace {

// Mean occupied 8-neighbour count, written out directly.
double gamma_by_hand(const GridRegion& r) {
  int cells = 0, sum = 0;
  for (int row = 0; row < r.height(); ++row) {
    for (int col = 0; col < r.width(); ++col) {
      if (!r.occupied(Cell{col, row})) continue;
      ++cells;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const Cell q{col + dc, row + dr};
          if ((dr || dc) && r.in_bounds(q) && r.occupied(q)) ++sum;
        }
      }
    }
  }
  return static_cast<double>(sum) / cells;
}

bool free_space_connected(const GridRegion& r) {
  std::vector<bool> seen(r.cell_count(), false);
  int start = -1, open = 0;
  for (int i = 0; i < r.cell_count(); ++i) {
    if (!r.occupied(i)) {
      ++open;
      if (start < 0) start = i;
    }
  }
  if (open == 0) return true;
  std::deque<int> q{start};
  seen[start] = true;
  int reached = 1;
  while (!q.empty()) {
    const Cell c = r.cell_at(q.front());
    q.pop_front();
    const Cell next[4] = {{c.col + 1, c.row}, {c.col - 1, c.row}, {c.col, c.row + 1},
                          {c.col, c.row - 1}};
    for (Cell n : next) {
      if (!r.in_bounds(n) || r.occupied(n) || seen[r.index(n)]) continue;
      seen[r.index(n)] = true;
      ++reached;
      q.push_back(r.index(n));
    }
  }
  return reached == open;
}

}  // namespace

TEST(Gamma, Examples) {
  GridRegion one = GridRegion::Open(3, 3, 1.0);
  one.set_occupied({1, 1}, true);
  EXPECT_DOUBLE_EQ(compute_gamma(one), 0.0);
  GridRegion block = GridRegion::Open(4, 4, 1.0);
  for (Cell c : {Cell{1, 1}, Cell{2, 1}, Cell{1, 2}, Cell{2, 2}}) block.set_occupied(c, true);
  EXPECT_DOUBLE_EQ(compute_gamma(block), 3.0);
  GridRegion strip = GridRegion::Open(5, 3, 1.0);
  for (int c = 1; c <= 3; ++c) strip.set_occupied({c, 1}, true);
  EXPECT_DOUBLE_EQ(compute_gamma(strip), 4.0 / 3.0);
  EXPECT_THROW(compute_gamma(GridRegion::Open(2, 2, 1.0)), UndefinedGamma);
}

TEST(Gamma, BoundaryCellsHaveFewerNeighbours) {
  GridRegion r = GridRegion::Open(2, 2, 1.0);
  for (int i = 0; i < 4; ++i) r.set_occupied(r.cell_at(i), true);
  EXPECT_DOUBLE_EQ(compute_gamma(r), 3.0);
  EXPECT_DOUBLE_EQ(block_gamma(2, 2), 3.0);
  EXPECT_DOUBLE_EQ(block_gamma(1, 3), 4.0 / 3.0);
}

TEST(Generate, ZeroExtentIsEmpty) {
  ScenarioSpec s;
  s.extent = 0.0;
  const Generated g = generate(s);
  EXPECT_EQ(g.region.occupied_count(), 0);
  EXPECT_FALSE(g.gamma_achieved.has_value());
}

TEST(Generate, SingletonsForLowGamma) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    ScenarioSpec s;
    s.extent = 0.25;
    s.gamma_target = 0.0;
    s.seed = seed;
    const Generated g = generate(s);
    EXPECT_LT(gamma_by_hand(g.region), 0.5);
    EXPECT_NEAR(g.region.occupied_count(), 100, 1);
    EXPECT_TRUE(free_space_connected(g.region));
  }
}

TEST(Generate, BlocksForHighGamma) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    ScenarioSpec s;
    s.extent = 0.25;
    s.gamma_target = 6.0;
    s.seed = seed;
    const Generated g = generate(s);
    EXPECT_GE(gamma_by_hand(g.region), 5.5);
    EXPECT_NEAR(*g.gamma_achieved, gamma_by_hand(g.region), 1e-12);
    EXPECT_TRUE(free_space_connected(g.region));
  }
}

TEST(Generate, ExtentWithinOneCellAndConnectedAcrossSuite) {
  for (double extent : {0.05, 0.15, 0.25, 0.5}) {
    for (double gamma : {0.0, 1.0, 3.0, 5.0, 7.0}) {
      ScenarioSpec s;
      s.extent = extent;
      s.gamma_target = gamma;
      s.seed = 3;
      const Generated g = generate(s);
      EXPECT_LE(std::abs(g.region.occupied_count() - extent * 400), 1.0);
      EXPECT_TRUE(free_space_connected(g.region));
      EXPECT_EQ(g.gamma_in_tolerance, std::abs(*g.gamma_achieved - gamma) <= 0.5);
    }
  }
}

TEST(Generate, Deterministic) {
  ScenarioSpec s;
  s.extent = 0.2;
  s.gamma_target = 3.0;
  s.seed = 99;
  EXPECT_EQ(generate(s).region, generate(s).region);
  ScenarioSpec t = s;
  t.seed = 100;
  EXPECT_NE(generate(s).region, generate(t).region);
}

TEST(Generate, RejectsBadExtent) {
  ScenarioSpec s;
  s.extent = 1.0;
  EXPECT_THROW(generate(s), std::invalid_argument);
}

TEST(AsciiMap, DiagonalPair) {
  const GridRegion r = parse_ascii_map("#.\n.#\n");
  EXPECT_EQ(r.occupied_count(), 2);
  EXPECT_TRUE(r.occupied(Cell{0, 1}));  // first line is the top row
  EXPECT_DOUBLE_EQ(compute_gamma(r), 1.0);
  EXPECT_EQ(to_ascii_map(r), "#.\n.#\n");
}

TEST(AsciiMap, Errors) {
  EXPECT_THROW(parse_ascii_map(""), ParseError);
  try {
    parse_ascii_map("..\n.\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2);
    EXPECT_EQ(e.column, 2);
  }
  try {
    parse_ascii_map("..\n.x\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2);
    EXPECT_EQ(e.column, 2);
  }
}

TEST(ScenarioJson, RoundTrip) {
  ScenarioSpec spec;
  spec.width = 7;
  spec.height = 5;
  spec.cell_size = 2.5;
  spec.extent = 0.2;
  spec.gamma_target = 2.0;
  spec.seed = 4;
  Scenario s{generate(spec).region, {{0, 6.0, 12.0}, {3, 4.0, 4.0}}, {3, 1}, 4};
  EXPECT_EQ(from_json(to_json(s)), s);
  const auto path = std::filesystem::temp_directory_path() / "sensynth_roundtrip.json";
  save(s, path.string());
  EXPECT_EQ(load(path.string()), s);
  std::filesystem::remove(path);
}

TEST(ScenarioJson, MalformedInputs) {
  EXPECT_THROW(from_json("{"), ParseError);
  EXPECT_THROW(from_json(R"({"width": 2})"), ParseError);
  EXPECT_THROW(from_json(R"({"width":2,"height":1,"cell_size_m":1,"occupancy":[".."],
    "sensors":[{"type_id":0,"r_s_m":1,"r_c_m":1}],"k":[1,2]})"),
               ParseError);
  EXPECT_THROW(from_json(R"({"width":3,"height":1,"cell_size_m":1,"occupancy":[".."],
    "sensors":[{"type_id":0,"r_s_m":1,"r_c_m":1}],"k":[1]})"),
               ParseError);
}
