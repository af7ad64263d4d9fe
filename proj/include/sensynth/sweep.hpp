#ifndef SENSYNTH_SWEEP_HPP_
#define SENSYNTH_SWEEP_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sensynth/hierarchy.hpp"

namespace sensynth::eval {

struct SweepConfig {
  int width = 20;
  int height = 20;
  double cell_size = 1.0;
  double sensing_radius = 6.0;
  std::vector<double> extents{0.05, 0.15, 0.25, 0.5};
  std::vector<double> gammas{0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<double> betas{2.0, 1.0, 0.5};
  int k = 3;
  int seeds = 5;
  uint64_t base_seed = 0;
  std::chrono::duration<double> budget{120.0};
  int chi = 1200;
  int sub_area = 10;
  bool repair = true;
  int parallel = 1;
};

enum class Verdict {
  kSmcSignificant,
  kSmcSlight,
  kMilpSlight,
  kMilpSignificant,
  kInfeasible,
};
std::string to_string(Verdict v);

struct SweepRow {
  double extent = 0.0;
  double gamma_target = 0.0;
  double gamma_achieved = 0.0;
  double beta = 0.0;
  hierarchy::Method method = hierarchy::Method::kSmc;
  bool hierarchy = false;
  uint64_t seed = 0;
  int n_sensors = 0;
  int relays_added = 0;
  double alpha = 0.0;
  double runtime_s = 0.0;
  bool verified = false;
  Verdict verdict = Verdict::kInfeasible;  // of the (extent, gamma, beta) cell
};

struct CellSummary {
  double extent = 0.0;
  double gamma_target = 0.0;
  double beta = 0.0;
  double smc_alpha = 0.0;   // mean over verified runs
  double milp_alpha = 0.0;
  int smc_verified = 0;
  int milp_verified = 0;
  double smc_runtime = 0.0;  // mean over all runs
  double milp_runtime = 0.0;
  Verdict verdict = Verdict::kInfeasible;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // cell-major, then seed, SMC before MILP
  std::vector<CellSummary> cells;
};

// Compares two samples of alpha (lower is better). Means within 10% of each
// other, or overlapping 95% normal-approximation intervals, are "slight".
Verdict classify(const std::vector<double>& smc_alpha,
                 const std::vector<double>& milp_alpha);

// One synthesis run on a generated scene; failures come back unverified.
SweepRow run_one(const SweepConfig& config, double extent, double gamma,
                 double beta, uint64_t seed, hierarchy::Method method);

// Runs every (extent, gamma, beta, seed, method) combination. The progress
// callback, if set, sees each finished row (from worker threads, serialized).
SweepResult sweep(const SweepConfig& config,
                  const std::function<void(const SweepRow&)>& progress = {});

void write_csv(const SweepResult& result, std::ostream& out);

}  // namespace sensynth::eval

#endif  // SENSYNTH_SWEEP_HPP_
