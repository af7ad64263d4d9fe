#ifndef SENSYNTH_COVERING_HPP_
#define SENSYNTH_COVERING_HPP_

#include <chrono>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sensynth/geometry.hpp"
#include "sensynth/graphs.hpp"
#include "sensynth/placement.hpp"

namespace sensynth::covering {

using Seconds = std::chrono::duration<double>;

// Integer k-cover over per-type visibility graphs. Vertex ids follow
// GridRegion::open_cells().
struct CoveringProblem {
  std::vector<Cell> cells;
  // [type][vertex]: vertices j whose sensors cover vertex i (self included
  // when the graph marks self cover).
  std::vector<std::vector<std::vector<int>>> neighborhoods;
  std::vector<std::vector<int>> demand;  // [type][vertex]
  int budget = 0;                        // total sensor cap, 0 = none

  int types() const { return static_cast<int>(demand.size()); }
  int vertex_count() const { return static_cast<int>(cells.size()); }
};

class InfeasibleCover : public std::runtime_error {
 public:
  InfeasibleCover(const std::string& what, Cell cell, int type)
      : std::runtime_error(what), cell(cell), type(type) {}
  Cell cell;
  int type;
};

// visibility[t] is the visibility graph for type t. Throws InfeasibleCover
// for a demanded vertex with an empty neighborhood.
CoveringProblem build_covering(const GridRegion& region,
                               std::span<const graphs::CellGraph> visibility,
                               const Demands& demands, int budget = 0);

struct IntegerPlacement {
  std::vector<std::vector<int>> n;  // [type][vertex]
  int total() const;
};

bool satisfies(const CoveringProblem& problem, const IntegerPlacement& x);

// Greedy set multicover: repeatedly add a sensor at the vertex covering the
// most residual demand (ties to the lowest vertex), per type.
IntegerPlacement greedy_cover(const CoveringProblem& problem);

struct LpResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;  // per column
  double lower_bound = 0.0;  // certified by an exactly feasible dual vector
  bool timed_out = false;
};

// min sum x  s.t.  sum_{j in rows[i]} x_j >= rhs_i,  lower <= x <= upper
// (upper < 0 means unbounded). Solved through its dual with a dense primal
// simplex. Feasibility is decided combinatorially before any pivoting.
LpResult solve_covering_lp(const std::vector<std::vector<int>>& rows,
                           const std::vector<int>& rhs, int columns,
                           const std::vector<int>& lower,
                           const std::vector<int>& upper,
                           Seconds budget = Seconds(std::numeric_limits<double>::infinity()));

struct CoverResult {
  IntegerPlacement placement;
  bool feasible = false;   // a placement within budget exists (found)
  bool optimal = false;    // search closed
  int objective = 0;
  double lower_bound = 0.0;
  long nodes = 0;
};

// Branch and bound per type; anytime. Budget violation reports infeasible.
CoverResult solve_covering(const CoveringProblem& problem, Seconds budget);

// Sensors at cell centres; type ids from specs.
Placement to_placement(const CoveringProblem& problem, const IntegerPlacement& x,
                       const GridRegion& region, std::span<const SensorSpec> specs);

struct RepairResult {
  IntegerPlacement placement;
  std::vector<int> relay_vertices;  // added type-0 sensors
};

// Collapses deployed components of g_c and bridges them with Steiner relays
// of type 0. Throws graphs::InfeasibleRepair.
RepairResult connectivity_repair(const IntegerPlacement& x,
                                 const graphs::CellGraph& g_c);

// Affine relaxation of algebraic connectivity over binary deployment
// variables. Variables: C_i, q_i, a_ij (i < j, one per vertex pair), d_i.
struct LinearTerm {
  int var;
  int coef;
};
struct LinearConstraint {
  enum class Sense { kLe, kGe, kEq };
  std::vector<LinearTerm> terms;
  Sense sense = Sense::kGe;
  int rhs = 0;
  std::string family;  // coverage, q, a1, a2, degree, aff_connect
  bool holds(const std::vector<int>& values) const;
};
struct DdSystem {
  int n = 0;
  int k = 0;
  int big_m = 0;    // C_i <= M q_i
  int big_n = 0;    // aff_connect slack
  std::vector<int> c_var, q_var, d_var;
  std::vector<std::vector<int>> a_var;  // [i][j], symmetric
  std::vector<bool> edge;               // flattened [i*n+j] of E_c
  int var_count = 0;
  std::vector<LinearConstraint> constraints;
};

DdSystem dd_connectivity_encoding(const graphs::CellGraph& g_v,
                                  const graphs::CellGraph& g_c, int k);

struct DdCheck {
  long feasible_assignments = 0;
  long disconnected_accepted = 0;  // soundness violations
  long connected_rejected = 0;     // deployments the relaxation refuses
};

// Enumerates q in {0,1}^n, C_i in [q_i, k] (0 when q_i = 0), and each a_ij
// over the values allowed by its own edge constraints; d follows from a.
// Throws std::invalid_argument above 8 vertices.
DdCheck check_dd_exhaustive(const DdSystem& system, const graphs::CellGraph& g_c);

enum class Method { kSmc, kMilp, kEither };
struct Recommendation {
  Method method = Method::kSmc;
  int row = 0;  // 1-based row of the selection table
};
Recommendation select_method(double extent, double gamma, double beta,
                             int open_cells, int chi = 1200);
std::string to_string(Method m);

}  // namespace sensynth::covering

#endif  // SENSYNTH_COVERING_HPP_
