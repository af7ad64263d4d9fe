#ifndef SENSYNTH_SMC_HPP_
#define SENSYNTH_SMC_HPP_

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "sensynth/convex.hpp"
#include "sensynth/geometry.hpp"
#include "sensynth/placement.hpp"
#include "sensynth/sat.hpp"

namespace sensynth::smc {

using Seconds = std::chrono::duration<double>;

struct Config {
  bool connectivity = true;
  // Triple clauses forbidding links between sensors that cover cells too far
  // apart to be bridged. Quadratic in cells and sensors, so off by default.
  bool connectivity_exclusions = false;
  // Pins the first k sensors of each type onto the first demanded cell.
  bool symmetry_breaking = true;
  uint64_t seed = 0;
};

// Occupied cells merged into disjoint axis-aligned rectangles (row runs
// extended upward). The union equals the union of occupied cells.
std::vector<Rect> obstacle_rects(const GridRegion& region);

enum class TemplateKind {
  kBall,        // sensor within range of a corner
  kSelector,    // one convex branch of "obstacle does not block"
  kCellMember,  // sensor inside an open cell (placement)
  kLink,        // two sensors within communication range
};

// A sensor-independent constraint pattern. Pseudo-booleans instantiate a
// template for one sensor (or an unordered pair for links).
struct Template {
  TemplateKind kind = TemplateKind::kBall;
  int type = 0;      // sensor type the geometry was sized for
  int corner = -1;   // lattice index for kBall / kSelector
  int rect = -1;     // obstacle rectangle for kSelector
  int branch = -1;   // 0,1: line sides; 2..5: faces left/right/bottom/top
  int cell = -1;     // cell index for kCellMember
  // Constraints with sensor id 0 (and 1 for the second end of a link).
  std::vector<convex::Constraint> constraints;
};

struct PseudoBool {
  int var = -1;
  int tmpl = -1;
  int sensor_a = -1;
  int sensor_b = -1;  // links only
};

struct ExclusionStats {
  int64_t corner_pairs = 0;
  int64_t cell_pairs = 0;
  int64_t link_triples = 0;
  int64_t total() const { return corner_pairs + cell_pairs + link_triples; }
};

namespace detail {
class Tables;
}

// A disjunction "b^s -> some branch for this obstacle" for one sensor.
struct SelectorGroup {
  int bs_var = -1;
  int rect = -1;
  std::vector<int> vars;  // selector pseudo-booleans in branch order
};

struct SmcProblem {
  GridRegion region;
  std::vector<SensorSpec> specs;
  Demands demands;
  Config config;
  std::vector<int> sensor_type;  // per sensor, position in specs
  sat::Solver solver;
  bool trivially_unsat = false;

  std::vector<Rect> rects;
  std::vector<Template> templates;
  std::vector<PseudoBool> pbs;
  std::unordered_map<int, int> pb_of_var;
  // [sensor][lattice index] -> b^s var or -1.
  std::vector<std::vector<int>> bs;
  // [sensor][cell index] -> b^u var or -1.
  std::vector<std::vector<int>> bu;
  // [i][j] (i < j) -> link var or -1.
  std::vector<std::vector<int>> bc;
  // [sensor][hops] reachability from sensor 0, and the auxiliary edge-use
  // variables (i, j, h, var).
  std::vector<std::vector<int>> reach;
  std::vector<std::array<int, 4>> reach_aux;
  // [sensor][cell index] -> idle-placement pseudo-boolean or -1.
  std::vector<std::vector<int>> member;
  std::vector<std::vector<SelectorGroup>> selector_groups;
  ExclusionStats exclusion_stats;

  int sensor_count() const { return static_cast<int>(sensor_type.size()); }
  // Pseudo-boolean variable for (template, sensors), or -1.
  int pb_var(int tmpl, int a, int b = -1) const;

  // Registry for lifting: (tmpl, a, b) -> var.
  std::unordered_map<uint64_t, int> pb_index;
  // Margins used when instantiating templates.
  double ball_shrink = 0.0;
  double delta = 0.0;
  std::vector<std::optional<Point>> hint;
  std::shared_ptr<detail::Tables> tables;
};

// Builds the propositional skeleton and pseudo-boolean map for the given
// number of sensors per type. Sensors are numbered type by type.
SmcProblem encode(const GridRegion& region, std::span<const int> sensors_per_type,
                  std::span<const SensorSpec> specs, const Demands& demands,
                  const Config& config = {});

// Adds distance-based exclusion clauses; counts land in exclusion_stats.
void precompute_exclusions(SmcProblem& problem);

// Biases the SAT search toward the given sensor positions (missing entries
// leave a sensor unhinted).
void apply_hint(SmcProblem& problem,
                std::span<const std::optional<Point>> positions);

enum class Status { kFeasible, kInfeasible, kTimeout };

struct LoopStats {
  int iterations = 0;
  int cores = 0;
  int unknowns = 0;
  int verify_rejects = 0;
  int64_t blocking_clauses = 0;
  double sat_seconds = 0.0;
  double convex_seconds = 0.0;
};

struct SolveOutcome {
  Status status = Status::kTimeout;
  Placement placement;
  LoopStats stats;
};

SolveOutcome smc_solve(SmcProblem& problem, Seconds budget);

// Greedy cover at cell centres using the encodable coverage relation, plus
// Steiner relays at cell centres when connectivity is requested. Sensors are
// grouped by type and ordered for the symmetry-breaking clauses.
struct GreedyResult {
  Placement placement;
  bool complete = false;   // coverage demands met
  bool connected = false;  // relays found (or connectivity not requested)
};
GreedyResult greedy_placement(const GridRegion& region,
                              std::span<const SensorSpec> specs,
                              const Demands& demands, bool connectivity);

struct Probe {
  std::vector<int> counts;
  Status status = Status::kTimeout;
  double seconds = 0.0;
};

struct SearchResult {
  Status status = Status::kTimeout;
  std::vector<int> counts;  // per type at the optimum found
  int n_star = 0;
  Placement placement;
  bool proven_minimal = false;
  std::vector<Probe> probes;
};

// Smallest total sensor count with a verified placement. n_max = 0 takes the
// greedy count. Heterogeneous specs are searched one type at a time.
SearchResult binary_search_min_n(const GridRegion& region,
                                 std::span<const SensorSpec> specs,
                                 const Demands& demands, int n_max,
                                 Seconds budget, const Config& config = {});

// One SMC probe at a fixed sensor count per type, with greedy hints.
SolveOutcome solve_at(const GridRegion& region, std::span<const int> counts,
                      std::span<const SensorSpec> specs, const Demands& demands,
                      Seconds budget, const Config& config = {},
                      const Placement* hint = nullptr);

// Connects existing sensor groups with `relays` extra sensors of type
// `relay_type` (position in specs). Each group is a connected set of fixed
// sensors; relays may sit anywhere in free space.
struct StitchOutcome {
  Status status = Status::kTimeout;
  Placement relays;
  LoopStats stats;
};
StitchOutcome stitch(const GridRegion& region, std::span<const SensorSpec> specs,
                     const std::vector<Placement>& groups, int relay_type,
                     int relays, Seconds budget,
                     const Placement* hint = nullptr);

}  // namespace sensynth::smc

#endif  // SENSYNTH_SMC_HPP_
