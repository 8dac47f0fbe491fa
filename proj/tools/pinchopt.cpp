#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pinchopt/pinchopt.hpp"

namespace {

using namespace pinchopt;

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write '" + path + "'");
  os.precision(17);
  return os;
}

// Placement files hold either a JSON array of x coordinates or {"placement": [...]}.
std::vector<double> load_placement(const std::string& path) {
  const json j = read_json_file(path);
  return (j.is_array() ? j : j.at("placement")).get<std::vector<double>>();
}

std::vector<double> placement_arg(const std::string& arg, const Scenario& s, int candidates, std::uint64_t seed) {
  if (arg != "random") return load_placement(arg);
  const std::vector<double> cand = candidate_positions(s.physics.area_x_m, candidates);
  Rng rng = Rng::substream(seed, "cli-placement");
  std::vector<double> x;
  for (int k = 0; k < s.num_waveguides(); ++k) x.push_back(cand[rng.below(cand.size())]);
  return x;
}

std::pair<int, int> parse_grid(const std::string& g) {
  const auto x = g.find('x');
  if (x == std::string::npos) throw InvalidArgument("grid must look like 300x200");
  return {std::stoi(g.substr(0, x)), std::stoi(g.substr(x + 1))};
}


}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pinching-antenna placement and beamforming under obstacle blockage"};
  app.require_subcommand(1);

  std::string config, scenario_path, out, placement = "random", mode = "bisection", spec_path, grid = "300x200";
  std::string out_model, out_trace;
  std::uint64_t seed = 0;
  double pa_x = 0.0;
  int waveguide = 0, candidates = 100, nprime = 20, tmax = 50, steps = 20000, jobs = 1;

  auto* gen = app.add_subcommand("gen", "Generate a scenario file from a generator config");
  gen->add_option("--config", config, "generator config (JSON)")->required();
  gen->add_option("--seed", seed);
  gen->add_option("--out", out)->required();

  auto* raster = app.add_subcommand("raster", "LoS raster for one PA over the service area");
  raster->add_option("--scenario", scenario_path)->required();
  raster->add_option("--pa-x", pa_x)->required();
  raster->add_option("--waveguide", waveguide)->required();
  raster->add_option("--grid", grid);
  raster->add_option("--out", out)->required();

  auto* dump = app.add_subcommand("dump-powers", "Power lookup matrix of one waveguide");
  dump->add_option("--scenario", scenario_path)->required();
  dump->add_option("--waveguide", waveguide);
  dump->add_option("--candidates", candidates);
  dump->add_option("--out", out)->required();

  auto* assign = app.add_subcommand("assign", "Hungarian user-waveguide assignment at a placement");
  assign->add_option("--scenario", scenario_path)->required();
  assign->add_option("--placement", placement, "placement file or 'random'");
  assign->add_option("--candidates", candidates);
  assign->add_option("--seed", seed);
  assign->add_option("--out", out)->required();

  auto* bcd = app.add_subcommand("bcd", "Surrogate-assisted BCD over candidate positions");
  bcd->add_option("--scenario", scenario_path)->required();
  bcd->add_option("--placement", placement, "placement fixing the assignment, or 'random'");
  bcd->add_option("--candidates", candidates);
  bcd->add_option("--nprime", nprime);
  bcd->add_option("--tmax", tmax);
  bcd->add_option("--seed", seed);
  bcd->add_option("--out", out)->required();

  auto* wm = app.add_subcommand("wmmse", "WMMSE beamforming at a fixed placement");
  wm->add_option("--scenario", scenario_path)->required();
  wm->add_option("--placement", placement)->required();
  wm->add_option("--mode", mode)->check(CLI::IsMember({"bisection", "gradient"}));
  wm->add_option("--out", out)->required();

  auto* train = app.add_subcommand("train", "Train the placement actor");
  train->add_option("--scenario-config", config)->required();
  auto* steps_opt = train->add_option("--steps", steps, "Overrides train.steps (default 20000)");
  auto* seed_opt = train->add_option("--seed", seed, "Overrides train.seed");
  train->add_option("--out-model", out_model)->required();
  train->add_option("--out-trace", out_trace)->required();

  auto* sweep = app.add_subcommand("sweep", "Run an experiment spec");
  sweep->add_option("--spec", spec_path)->required();
  sweep->add_option("--out", out);
  sweep->add_option("--jobs", jobs);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const Scenario s = generate_scenario(generator_config_from_json(read_json_file(config)), seed);
      for (const std::string& issue : validate_scenario(s)) std::cerr << "warning: " << issue << '\n';
      save_scenario(s, out);
    } else if (*raster) {
      const Scenario s = load_scenario(scenario_path);
      if (waveguide < 0 || waveguide >= s.num_waveguides()) throw InvalidArgument("waveguide out of range");
      const auto [nx, ny] = parse_grid(grid);
      const Point2 pa{pa_x, s.waveguides[static_cast<std::size_t>(waveguide)].y_m};
      std::ofstream os = open_out(out);
      write_raster_csv(blockage_raster(pa, s.obstacles, nx, ny, s.physics.area_x_m, s.physics.area_y_m), os);
    } else if (*dump) {
      const Scenario s = load_scenario(scenario_path);
      const std::vector<double> cand = candidate_positions(s.physics.area_x_m, candidates);
      std::ofstream os = open_out(out);
      write_power_csv(power_matrix(waveguide, s, cand), cand, os);
    } else if (*assign) {
      const Scenario s = load_scenario(scenario_path);
      const std::vector<double> x = placement_arg(placement, s, candidates, seed);
      const Assignment a = assign_waveguides(s, x);
      const LinkEvaluation ev = evaluate_special(s, x, a.waveguide_of_user);
      std::ofstream os = open_out(out);
      os << "user,waveguide,pa_x_m,rate_bps_hz\n";
      for (int m = 0; m < s.num_users(); ++m) {
        const int k = a.waveguide_of_user[static_cast<std::size_t>(m)];
        os << m << ',' << k << ',' << x[static_cast<std::size_t>(k)] << ',' << ev.rates(m) << '\n';
      }
      std::cout << "sum_rate " << ev.sum_rate << " feasible " << ev.feasible << '\n';
    } else if (*bcd) {
      const Scenario s = load_scenario(scenario_path);
      const std::vector<double> cand = candidate_positions(s.physics.area_x_m, candidates);
      const std::vector<double> x = placement_arg(placement, s, candidates, seed);
      const Assignment a = best_assignment(s, x);
      BcdConfig cfg;
      cfg.shortlist = nprime;
      cfg.max_sweeps = tmax;
      cfg.target_rate = s.physics.target_rate_bps_hz;
      const BcdResult r = bcd_solve(s, cand, a.waveguide_of_user, cfg);
      std::ofstream os = open_out(out);
      os << "sweep,waveguide,from,to,sum_rate,qos_gated\n";
      for (const BcdMove& mv : r.trajectory)
        os << mv.sweep << ',' << mv.waveguide << ',' << mv.from << ',' << mv.to << ',' << mv.sum_rate << ','
           << mv.qos_gated << '\n';
      std::cout << "sum_rate " << r.state.sum_rate << " qos_feasible " << r.qos_feasible << " sweeps " << r.sweeps
                << '\n';
    } else if (*wm) {
      const Scenario s = load_scenario(scenario_path);
      const std::vector<double> x = load_placement(placement);
      WmmseConfig cfg;
      cfg.mode = mode == "gradient" ? DualMode::gradient : DualMode::bisection;
      cfg.target_rate = s.physics.target_rate_bps_hz;
      const WmmseResult r =
          wmmse_solve(channel_matrix(s, x).entries, s.physics.noise_power_watts, s.physics.total_power_watts, cfg);
      std::ofstream os = open_out(out);
      os << "kind,index,value\n";
      for (std::size_t i = 0; i < r.trace.size(); ++i) os << "sum_rate," << i << ',' << r.trace[i] << '\n';
      for (Eigen::Index m = 0; m < r.rates.size(); ++m) os << "user_rate," << m << ',' << r.rates(m) << '\n';
      std::cout << "sum_rate " << r.sum_rate << " converged " << r.converged << " qos_feasible " << r.qos_feasible
                << '\n';
    } else if (*train) {
      const json j = read_json_file(config);
      const GeneratorConfig gcfg = generator_config_from_json(j.contains("generator") ? j.at("generator") : j);
      TrainConfig tcfg = train_config_from_json(j.value("train", json::object()));
      if (steps_opt->count()) tcfg.steps = steps;
      if (seed_opt->count()) tcfg.seed = seed;
      const int state_dim = 2 * gcfg.num_users + 3 * gcfg.obstacles.count;
      Trainer trainer(state_dim, gcfg.num_waveguides, gcfg.physics.area_x_m, tcfg);
      const TrainResult res = pinchopt::train(trainer, gcfg, tcfg);
      ActorPolicy{StateEncoder{gcfg.num_users, gcfg.obstacles.count, gcfg.physics.area_x_m, gcfg.physics.area_y_m},
                  trainer.actor()}
          .save(out_model);
      std::ofstream os = open_out(out_trace);
      os << "step,reward,moving_average,critic_loss,actor_grad_norm\n";
      for (std::size_t t = 0; t < res.rewards.size(); ++t)
        os << t << ',' << res.rewards[t] << ',' << res.moving_average[t] << ',' << res.critic_losses[t] << ','
           << res.actor_gradient_norms[t] << '\n';
      if (res.skipped_updates) std::cerr << "warning: " << res.skipped_updates << " non-finite updates skipped\n";
    } else if (*sweep) {
      ExperimentSpec spec = experiment_from_json(read_json_file(spec_path));
      if (!out.empty()) spec.output = out;
      if (spec.output.empty()) throw InvalidArgument("no output path: pass --out or set \"output\"");
      std::ofstream os = open_out(spec.output);
      os << kResultHeader << '\n';
      run_experiment(spec, jobs, [&](const ResultRow& r) {
        os << format_row(r) << '\n' << std::flush;
        if (!r.error.empty())
          std::cerr << "cell " << r.method << " value " << r.sweep_value << " seed " << r.seed << ": " << r.error
                    << '\n';
      });
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
