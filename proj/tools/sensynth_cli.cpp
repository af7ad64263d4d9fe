#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sensynth/covering.hpp"
#include "sensynth/eval.hpp"
#include "sensynth/hierarchy.hpp"
#include "sensynth/scenario.hpp"
#include "sensynth/sweep.hpp"

namespace {

using namespace sensynth;
using nlohmann::json;

enum Exit { kOk = 0, kUsage = 2, kInfeasible = 3, kVerifyFail = 4, kTimeout = 5 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

json report_json(const eval::VerificationReport& r) {
  json uncovered = json::array();
  for (const auto& s : r.uncovered) {
    uncovered.push_back({{"col", s.cell.col}, {"row", s.cell.row}, {"type", s.type},
                         {"achieved", s.achieved}, {"demanded", s.demanded}});
  }
  return {{"ok", r.ok()},
          {"coverage_ok", r.coverage_ok},
          {"uncovered", uncovered},
          {"connected", r.connected},
          {"component_count", r.component_count},
          {"placement_ok", r.placement_ok},
          {"misplaced", r.misplaced}};
}

Placement placement_from_json(const json& j) {
  Placement p;
  for (const auto& s : j.at("sensors")) {
    const std::string role = s.value("role", "primary");
    if (role != "primary" && role != "relay") throw UsageError("unknown role " + role);
    p.push_back({{s.at("x_m").get<double>(), s.at("y_m").get<double>()},
                 s.at("type_id").get<int>(),
                 role == "relay" ? Role::kRelay : Role::kPrimary});
  }
  return p;
}

struct GenerateArgs {
  int width = 20, height = 20;
  double cell_size = 1.0, extent = 0.0, gamma = 0.0;
  uint64_t seed = 0;
  double r_s = 6.0, beta = 1.0;
  int k = 3;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  scenario::ScenarioSpec spec;
  spec.width = a.width;
  spec.height = a.height;
  spec.cell_size = a.cell_size;
  spec.extent = a.extent;
  spec.gamma_target = a.gamma;
  spec.seed = a.seed;
  const scenario::Generated g = scenario::generate(spec);
  scenario::Scenario s{g.region, {{0, a.r_s, a.beta * a.r_s}}, {a.k}, a.seed};
  write_file(a.out, scenario::to_json(s));
  std::cerr << "extent " << g.extent_achieved << ", gamma "
            << (g.gamma_achieved ? std::to_string(*g.gamma_achieved) : "undefined")
            << (g.gamma_in_tolerance ? "" : " (outside tolerance)") << "\n";
  return kOk;
}

struct SynthArgs {
  std::string scenario, method = "auto", out;
  std::vector<int> k;
  int sub_area = 10;
  double budget = 120.0;
  uint64_t seed = 0;
  int chi = 1200;
  bool no_repair = false;
};

int cmd_synth(const SynthArgs& a) {
  scenario::Scenario sc = scenario::from_json(read_file(a.scenario));
  if (!a.k.empty()) {
    if (a.k.size() != sc.sensors.size()) throw UsageError("--k needs one value per sensor type");
    sc.k = a.k;
  }
  const GridRegion& region = sc.region;
  hierarchy::Method method = hierarchy::Method::kSmc;
  json chosen;
  if (a.method == "auto") {
    const double extent = static_cast<double>(region.occupied_count()) / region.cell_count();
    const double gamma = region.occupied_count() > 0 ? scenario::compute_gamma(region) : 0.0;
    const covering::Recommendation rec =
        covering::select_method(extent, gamma, sc.sensors[0].beta(), region.open_count(), a.chi);
    method = rec.method == covering::Method::kSmc ? hierarchy::Method::kSmc
                                                  : hierarchy::Method::kMilp;
    std::cerr << "auto: table row " << rec.row << " recommends " << covering::to_string(rec.method)
              << ", running " << (method == hierarchy::Method::kSmc ? "smc" : "milp") << "\n";
    chosen = {{"recommended", covering::to_string(rec.method)}, {"table_row", rec.row}};
  } else if (a.method == "milp") {
    method = hierarchy::Method::kMilp;
  }
  const bool use_hierarchy =
      method == hierarchy::Method::kSmc || region.open_count() > a.chi;

  const auto t0 = std::chrono::steady_clock::now();
  hierarchy::Result r;
  int code = kOk;
  std::string failure;
  try {
    if (use_hierarchy) {
      hierarchy::Config hc;
      hc.sub_w = hc.sub_h = a.sub_area;
      hc.repair = !a.no_repair;
      hc.budget = hierarchy::Seconds(a.budget);
      hc.seed = a.seed;
      r = hierarchy::hierarchical_synthesize(region, method, sc.sensors, sc.k, hc);
    } else {
      r = hierarchy::synthesize_flat(region, method, sc.sensors, sc.k,
                                     hierarchy::Seconds(a.budget), a.seed);
    }
  } catch (const hierarchy::SynthesisTimeout& e) {
    code = kTimeout;
    failure = e.what();
  } catch (const hierarchy::SubareaInfeasible& e) {
    code = kInfeasible;
    failure = e.what();
  } catch (const hierarchy::StitchFailed& e) {
    code = kInfeasible;
    failure = e.what();
  }
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (code != kOk) {
    std::cerr << (code == kTimeout ? "timeout: " : "infeasible: ") << failure << "\n";
    return code;
  }

  const Demands demands = Demands::Uniform(region, sc.k);
  const eval::VerificationReport report = eval::verify(r.placement, region, sc.sensors, demands);
  json sensors = json::array();
  for (const PlacedSensor& ps : r.placement) {
    sensors.push_back({{"x_m", ps.position.x}, {"y_m", ps.position.y}, {"type_id", ps.type_id},
                       {"role", ps.role == Role::kRelay ? "relay" : "primary"}});
  }
  json out;
  out["method"] = method == hierarchy::Method::kSmc ? "smc" : "milp";
  if (!chosen.is_null()) out["selection"] = chosen;
  out["hierarchy"] = use_hierarchy;
  out["sensors"] = sensors;
  out["metrics"] = {{"n", r.placement.size()},
                    {"relays_added", r.relays_added},
                    {"alpha", eval::coverage_redundancy(r.placement, region, sc.sensors, sc.k)},
                    {"runtime_s", runtime},
                    {"minimality_proven", !r.timed_out}};
  out["verification"] = report_json(report);
  out["verified"] = report.ok();
  write_file(a.out, out.dump(2) + "\n");
  return report.ok() ? kOk : kVerifyFail;
}

int cmd_verify(const std::string& scenario_path, const std::string& placement_path) {
  const scenario::Scenario sc = scenario::from_json(read_file(scenario_path));
  json pj;
  try {
    pj = json::parse(read_file(placement_path));
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("malformed placement: ") + e.what());
  }
  Placement p;
  try {
    p = placement_from_json(pj);
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed placement: ") + e.what());
  }
  const auto report =
      eval::verify(p, sc.region, sc.sensors, Demands::Uniform(sc.region, sc.k));
  std::cout << report_json(report).dump(2) << "\n";
  return report.ok() ? kOk : kVerifyFail;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path, int parallel) {
  eval::SweepConfig c;
  if (!config_path.empty()) {
    json j;
    try {
      j = json::parse(read_file(config_path));
      c.width = j.value("width", c.width);
      c.height = j.value("height", c.height);
      c.cell_size = j.value("cell_size_m", c.cell_size);
      c.sensing_radius = j.value("r_s_m", c.sensing_radius);
      c.extents = j.value("extents", c.extents);
      c.gammas = j.value("gammas", c.gammas);
      c.betas = j.value("betas", c.betas);
      c.k = j.value("k", c.k);
      c.seeds = j.value("seeds", c.seeds);
      c.base_seed = j.value("base_seed", c.base_seed);
      c.budget = std::chrono::duration<double>(j.value("time_budget_s", c.budget.count()));
      c.chi = j.value("chi", c.chi);
      c.sub_area = j.value("sub_area", c.sub_area);
      c.repair = j.value("repair", c.repair);
    } catch (const json::exception& e) {
      throw UsageError(std::string("bad sweep config: ") + e.what());
    }
  }
  c.parallel = parallel;
  const eval::SweepResult result = eval::sweep(c, [](const eval::SweepRow& r) {
    std::cerr << "extent " << r.extent << " gamma " << r.gamma_target << " beta " << r.beta
              << " seed " << r.seed << " " << (r.method == hierarchy::Method::kSmc ? "smc" : "milp")
              << ": alpha " << r.alpha << (r.verified ? "" : " (unverified)") << "\n";
  });
  std::ostringstream csv;
  eval::write_csv(result, csv);
  write_file(out_path, csv.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensor placement synthesis"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic scenario");
  g->add_option("--width", gen.width)->check(CLI::PositiveNumber);
  g->add_option("--height", gen.height)->check(CLI::PositiveNumber);
  g->add_option("--cell-size", gen.cell_size)->check(CLI::PositiveNumber);
  g->add_option("--extent", gen.extent, "Occupied fraction in [0, 1)")
      ->check(CLI::Validator(
          [](std::string& v) {
            const double e = std::stod(v);
            return e >= 0.0 && e < 1.0 ? std::string() : "extent must lie in [0, 1)";
          },
          "[0,1)"));
  g->add_option("--gamma", gen.gamma)->check(CLI::Range(0.0, 8.0));
  g->add_option("--seed", gen.seed);
  g->add_option("--r-s", gen.r_s, "Sensing radius in meters")->check(CLI::PositiveNumber);
  g->add_option("--beta", gen.beta, "Communication over sensing radius")
      ->check(CLI::PositiveNumber);
  g->add_option("--k", gen.k)->check(CLI::NonNegativeNumber);
  g->add_option("--out", gen.out)->required();

  SynthArgs syn;
  auto* s = app.add_subcommand("synth", "Synthesize a placement");
  s->add_option("--scenario", syn.scenario)->required();
  s->add_option("--method", syn.method)->check(CLI::IsMember({"smc", "milp", "auto"}));
  s->add_option("--k", syn.k);
  s->add_option("--sub-area", syn.sub_area)->check(CLI::PositiveNumber);
  s->add_option("--time-budget", syn.budget)->check(CLI::PositiveNumber);
  s->add_option("--seed", syn.seed);
  s->add_option("--chi", syn.chi)->check(CLI::NonNegativeNumber);
  s->add_flag("--no-repair", syn.no_repair, "Single full-demand pass");
  s->add_option("--out", syn.out);

  std::string v_scenario, v_placement;
  auto* v = app.add_subcommand("verify", "Verify a placement against a scenario");
  v->add_option("--scenario", v_scenario)->required();
  v->add_option("--placement", v_placement)->required();

  std::string sw_config, sw_out;
  int sw_parallel = 1;
  auto* w = app.add_subcommand("sweep", "Run the comparison sweep");
  w->add_option("--config", sw_config);
  w->add_option("--out", sw_out);
  w->add_option("--parallel", sw_parallel)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  try {
    if (*g) return cmd_generate(gen);
    if (*s) return cmd_synth(syn);
    if (*v) return cmd_verify(v_scenario, v_placement);
    if (*w) return cmd_sweep(sw_config, sw_out, sw_parallel);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const scenario::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const scenario::GenerationFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInfeasible;
  }
  return kUsage;
}
