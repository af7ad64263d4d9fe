#include "sensynth/sweep.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "sensynth/eval.hpp"
#include "sensynth/scenario.hpp"

namespace sensynth::eval {

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double ci_half_width(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return 1.96 * std::sqrt(ss / (v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kSmcSignificant: return "smc_significantly_better";
    case Verdict::kSmcSlight: return "smc_slightly_better";
    case Verdict::kMilpSlight: return "milp_slightly_better";
    case Verdict::kMilpSignificant: return "milp_significantly_better";
    case Verdict::kInfeasible: return "infeasible";
  }
  return "infeasible";
}

Verdict classify(const std::vector<double>& smc_alpha,
                 const std::vector<double>& milp_alpha) {
  if (smc_alpha.empty() && milp_alpha.empty()) return Verdict::kInfeasible;
  if (milp_alpha.empty()) return Verdict::kSmcSignificant;
  if (smc_alpha.empty()) return Verdict::kMilpSignificant;
  const double ms = mean(smc_alpha);
  const double mm = mean(milp_alpha);
  const bool smc_wins = ms <= mm;
  const double lo = std::min(ms, mm);
  const double hi = std::max(ms, mm);
  const bool within = hi <= 1.1 * lo;
  const double hs = ci_half_width(smc_alpha);
  const double hm = ci_half_width(milp_alpha);
  const bool overlap = ms - hs <= mm + hm && mm - hm <= ms + hs;
  if (within || overlap) return smc_wins ? Verdict::kSmcSlight : Verdict::kMilpSlight;
  return smc_wins ? Verdict::kSmcSignificant : Verdict::kMilpSignificant;
}

SweepRow run_one(const SweepConfig& config, double extent, double gamma,
                 double beta, uint64_t seed, hierarchy::Method method) {
  SweepRow row;
  row.extent = extent;
  row.gamma_target = gamma;
  row.beta = beta;
  row.method = method;
  row.seed = seed;
  row.gamma_achieved = std::nan("");

  scenario::ScenarioSpec spec;
  spec.width = config.width;
  spec.height = config.height;
  spec.cell_size = config.cell_size;
  spec.extent = extent;
  spec.gamma_target = gamma;
  spec.seed = seed;
  GridRegion region;
  try {
    const scenario::Generated g = scenario::generate(spec);
    region = g.region;
    if (g.gamma_achieved) row.gamma_achieved = *g.gamma_achieved;
  } catch (const std::exception&) {
    return row;
  }
  const std::vector<SensorSpec> specs{
      {0, config.sensing_radius, beta * config.sensing_radius}};
  const std::vector<int> k{config.k};
  row.hierarchy = method == hierarchy::Method::kSmc || region.open_count() > config.chi;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    hierarchy::Result r;
    if (row.hierarchy) {
      hierarchy::Config hc;
      hc.sub_w = hc.sub_h = config.sub_area;
      hc.repair = config.repair;
      hc.budget = config.budget;
      hc.seed = seed;
      r = hierarchy::hierarchical_synthesize(region, method, specs, k, hc);
    } else {
      r = hierarchy::synthesize_flat(region, method, specs, k, config.budget, seed);
    }
    row.n_sensors = static_cast<int>(r.placement.size());
    row.relays_added = r.relays_added;
    row.verified = verify(r.placement, region, specs, Demands::Uniform(region, k)).ok();
    row.alpha = coverage_redundancy(r.placement, region, specs, k);
  } catch (const std::exception&) {
    row.verified = false;
  }
  row.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

SweepResult sweep(const SweepConfig& config,
                  const std::function<void(const SweepRow&)>& progress) {
  struct Job {
    double extent, gamma, beta;
    uint64_t seed;
    hierarchy::Method method;
  };
  std::vector<Job> jobs;
  for (double e : config.extents) {
    for (double g : config.gammas) {
      for (double b : config.betas) {
        for (int s = 0; s < config.seeds; ++s) {
          for (auto m : {hierarchy::Method::kSmc, hierarchy::Method::kMilp}) {
            jobs.push_back({e, g, b, config.base_seed + static_cast<uint64_t>(s), m});
          }
        }
      }
    }
  }
  SweepResult result;
  result.rows.resize(jobs.size());
  std::atomic<size_t> next{0};
  std::mutex mu;
  auto worker = [&] {
    for (size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      SweepRow row = run_one(config, j.extent, j.gamma, j.beta, j.seed, j.method);
      std::lock_guard lock(mu);
      result.rows[i] = row;
      if (progress) progress(row);
    }
  };
  const int threads = std::max(1, config.parallel);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const size_t per_cell = 2 * static_cast<size_t>(config.seeds);
  for (size_t c = 0; c * per_cell < result.rows.size(); ++c) {
    CellSummary cell;
    std::vector<double> smc, milp;
    double smc_time = 0.0, milp_time = 0.0;
    for (size_t i = c * per_cell; i < (c + 1) * per_cell; ++i) {
      const SweepRow& r = result.rows[i];
      cell.extent = r.extent;
      cell.gamma_target = r.gamma_target;
      cell.beta = r.beta;
      const bool is_smc = r.method == hierarchy::Method::kSmc;
      (is_smc ? smc_time : milp_time) += r.runtime_s;
      if (r.verified) (is_smc ? smc : milp).push_back(r.alpha);
    }
    cell.smc_alpha = mean(smc);
    cell.milp_alpha = mean(milp);
    cell.smc_verified = static_cast<int>(smc.size());
    cell.milp_verified = static_cast<int>(milp.size());
    cell.smc_runtime = smc_time / config.seeds;
    cell.milp_runtime = milp_time / config.seeds;
    cell.verdict = classify(smc, milp);
    for (size_t i = c * per_cell; i < (c + 1) * per_cell; ++i) {
      result.rows[i].verdict = cell.verdict;
    }
    result.cells.push_back(cell);
  }
  return result;
}

void write_csv(const SweepResult& result, std::ostream& out) {
  out << "extent,gamma_target,gamma_achieved,beta,method,hierarchy,seed,n_sensors,"
         "relays_added,alpha,runtime_s,verified,verdict\n";
  for (const SweepRow& r : result.rows) {
    out << r.extent << ',' << r.gamma_target << ',' << r.gamma_achieved << ',' << r.beta
        << ',' << (r.method == hierarchy::Method::kSmc ? "smc" : "milp") << ','
        << (r.hierarchy ? "true" : "false") << ',' << r.seed << ',' << r.n_sensors << ','
        << r.relays_added << ',' << r.alpha << ',' << r.runtime_s << ','
        << (r.verified ? "true" : "false") << ',' << to_string(r.verdict) << '\n';
  }
}

}  // namespace sensynth::eval
