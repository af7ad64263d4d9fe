#ifndef SENSYNTH_CONVEX_HPP_
#define SENSYNTH_CONVEX_HPP_

#include <span>
#include <variant>
#include <vector>

#include "sensynth/geometry.hpp"

namespace sensynth::convex {

// a . s <= b for one sensor's position s. The normal (a_x, a_y) is stored with
// unit length so that violations are distances.
struct HalfPlane {
  int sensor = 0;
  double a_x = 0.0;
  double a_y = 0.0;
  double b = 0.0;
};

// |s - center| <= radius.
struct Ball {
  int sensor = 0;
  Point center;
  double radius = 0.0;
};

// |s_i - s_j| <= radius.
struct PairBall {
  int i = 0;
  int j = 0;
  double radius = 0.0;
};

using Constraint = std::variant<HalfPlane, Ball, PairBall>;

// Normalizes (a_x, a_y, b) so the normal has unit length. A zero normal is
// rejected with std::invalid_argument.
HalfPlane make_half_plane(int sensor, double a_x, double a_y, double b);

// Positions indexed by sensor id.
using Coordinates = std::vector<Point>;

double violation(const Constraint& c, const Coordinates& x);
// Euclidean projection onto the constraint set, in place.
void project(const Constraint& c, Coordinates& x);
// Sensor ids a constraint touches (one or two).
std::vector<int> sensors_of(const Constraint& c);

struct Options {
  double eps = 1e-6;          // feasibility tolerance, meters
  int max_iters = 100000;     // projection sweeps
  int stall_window = 50;
  double stall_rel = 1e-6;    // relative residual improvement per window
};

// Tolerances scaled to a grid with the given cell edge.
Options options_for_cell(double cell_size);

enum class Verdict { kFeasible, kInfeasible, kUnknown };

struct Outcome {
  Verdict verdict = Verdict::kUnknown;
  Coordinates witness;        // valid for kFeasible
  std::vector<int> core;      // indices into the input, valid for kInfeasible
  double residual = 0.0;      // max violation at termination
  int sweeps = 0;
};

// Cyclic projections from `start`. Constraints are split into blocks of
// sensors coupled by PairBall and each block is solved on its own; the first
// infeasible block yields the core. Sensors mentioned by no constraint keep
// their start position.
Outcome feasibility(std::span<const Constraint> constraints,
                    const Coordinates& start, const Options& options);

}  // namespace sensynth::convex

#endif  // SENSYNTH_CONVEX_HPP_
