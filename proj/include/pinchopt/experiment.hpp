#pragma once

// Sweeps over scenario parameters, methods and seeds, with CSV export.
//
// Spec file (JSON, same conventions as scenario files):
//   {
//     "generator": { ...generator config... },
//     "sweep": { "variable": "obstacle_radius" | "obstacle_count" |
//                            "user_count" | "transmit_power",
//                "values": [ ... ] },            // transmit_power in dBm
//     "methods": [ "bcd_ao", "fix_antenna", "grid_wmmse", ... ],
//     "seeds": [ ... ]  or  { "first": 0, "count": 100 },
//     "output": "results.csv",                 // optional
//     "num_candidates": 100, "shortlist": 20, "grid_points": 25,
//     "model_path": "actor.txt",               // needed by ddpg_* methods
//     "record_timing": false                   // wall_ms is 0 unless set
//   }

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pinchopt/bandit_policy.hpp"
#include "pinchopt/baselines.hpp"
#include "pinchopt/error.hpp"
#include "pinchopt/evaluation.hpp"
#include "pinchopt/scenario.hpp"

namespace pinchopt {

enum class SweepVariable { obstacle_radius, obstacle_count, user_count, transmit_power };

inline const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::obstacle_radius: return "obstacle_radius";
    case SweepVariable::obstacle_count: return "obstacle_count";
    case SweepVariable::user_count: return "user_count";
    case SweepVariable::transmit_power: return "transmit_power";
  }
  return "?";
}

inline SweepVariable parse_sweep_variable(const std::string& s) {
  if (s == "obstacle_radius") return SweepVariable::obstacle_radius;
  if (s == "obstacle_count") return SweepVariable::obstacle_count;
  if (s == "user_count") return SweepVariable::user_count;
  if (s == "transmit_power") return SweepVariable::transmit_power;
  throw InvalidArgument("unknown sweep variable '" + s + "'");
}

struct ExperimentSpec {
  GeneratorConfig generator;
  SweepVariable variable = SweepVariable::obstacle_radius;
  std::vector<double> values;
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
  std::string output;
  int num_candidates = 100;
  int shortlist = 20;
  int grid_points = 25;
  std::string model_path;
  bool record_timing = false;
  WmmseConfig wmmse;

  void validate() const {
    if (values.empty()) throw InvalidArgument("experiment: no sweep values");
    if (methods.empty()) throw InvalidArgument("experiment: no methods");
    if (seeds.empty()) throw InvalidArgument("experiment: no seeds");
  }
};

inline ExperimentSpec experiment_from_json(const json& j) {
  ExperimentSpec e;
  if (j.contains("generator")) e.generator = generator_config_from_json(j.at("generator"));
  const json& sw = j.at("sweep");
  e.variable = parse_sweep_variable(sw.at("variable").get<std::string>());
  e.values = sw.at("values").get<std::vector<double>>();
  e.methods = j.at("methods").get<std::vector<std::string>>();
  const json& seeds = j.at("seeds");
  if (seeds.is_array()) {
    e.seeds = seeds.get<std::vector<std::uint64_t>>();
  } else {
    const auto first = seeds.value("first", std::uint64_t{0});
    const auto count = seeds.at("count").get<std::uint64_t>();
    for (std::uint64_t i = 0; i < count; ++i) e.seeds.push_back(first + i);
  }
  e.output = j.value("output", std::string{});
  e.num_candidates = j.value("num_candidates", e.num_candidates);
  e.shortlist = j.value("shortlist", e.shortlist);
  e.grid_points = j.value("grid_points", e.grid_points);
  e.model_path = j.value("model_path", std::string{});
  e.record_timing = j.value("record_timing", false);
  e.validate();
  return e;
}

inline GeneratorConfig apply_sweep(GeneratorConfig cfg, SweepVariable v, double value) {
  switch (v) {
    case SweepVariable::obstacle_radius:
      cfg.obstacles.radius_m = value;
      for (Obstacle& o : cfg.obstacles.obstacles) o.radius_m = value;
      break;
    case SweepVariable::obstacle_count:
      cfg.obstacles.count = static_cast<int>(std::lround(value));
      break;
    case SweepVariable::user_count:
      cfg.num_users = cfg.num_waveguides = static_cast<int>(std::lround(value));
      cfg.waveguide_y_m.clear();
      break;
    case SweepVariable::transmit_power:
      cfg.physics.total_power_watts = dbm_to_watts(value);
      break;
  }
  return cfg;
}

struct ResultRow {
  std::string method;
  std::string sweep_var;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;
  double min_rate = 0.0;
  bool feasible = false;
  double wall_ms = 0.0;
  std::string error;  // not exported; empty on success

  bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kResultHeader = "method,sweep_var,sweep_value,seed,sum_rate,min_rate,feasible,wall_ms";

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_row(const ResultRow& r) {
  return r.method + "," + r.sweep_var + "," + format_number(r.sweep_value) + "," + std::to_string(r.seed) + "," +
         format_number(r.sum_rate) + "," + format_number(r.min_rate) + "," + (r.feasible ? "1" : "0") + "," +
         format_number(r.wall_ms);
}

inline void export_results(const std::vector<ResultRow>& rows, const std::string& path) {
  std::string text = std::string(kResultHeader) + "\n";
  for (const ResultRow& r : rows) text += format_row(r) + "\n";
  write_text_file(path, text);
}

inline std::vector<ResultRow> read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kResultHeader) throw Error("read_results: unexpected header in '" + path + "'");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw Error("read_results: expected 8 columns, got " + std::to_string(f.size()));
    ResultRow r;
    r.method = f[0];
    r.sweep_var = f[1];
    r.sweep_value = std::stod(f[2]);
    r.seed = std::stoull(f[3]);
    r.sum_rate = std::stod(f[4]);
    r.min_rate = std::stod(f[5]);
    r.feasible = f[6] == "1";
    r.wall_ms = std::stod(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// Method ids: bcd_ao, bcd_ao_exhaustive and the four discrete baselines use
// the one-PA-per-user model; fix_<bf>, grid_<bf> and ddpg_<bf> (bf one of
// wmmse, mrc, zf, random) use the all-PAs-serve-all-users model.
inline LinkEvaluation run_method(const std::string& method, const Scenario& s, const ExperimentSpec& spec,
                                 std::uint64_t stream, const ActorPolicy* policy) {
  const std::vector<double> cand = candidate_positions(s.physics.area_x_m, spec.num_candidates);
  if (method == "bcd_ao" || method == "bcd_ao_exhaustive") {
    BcdAoConfig cfg;
    cfg.num_candidates = spec.num_candidates;
    cfg.bcd.shortlist = method == "bcd_ao" ? spec.shortlist : spec.num_candidates;
    const BcdAoResult r = bcd_ao(s, cfg, stream);
    LinkEvaluation ev = evaluate_special(s, r.placement, r.waveguide_of_user);
    ev.feasible = ev.feasible && r.qos_feasible;
    return ev;
  }
  if (method == "random_closest" || method == "hungarian_random" || method == "fix_antenna" ||
      method == "random_random") {
    const BaselinePlacement b = baseline_placement(parse_baseline(method), s, cand, stream);
    return evaluate_special(s, b.placement, *b.waveguide_of_user);
  }
  const auto us = method.find('_');
  if (us == std::string::npos) throw InvalidArgument("unknown method '" + method + "'");
  const std::string family = method.substr(0, us);
  const BeamformerKind bf = parse_beamformer(method.substr(us + 1));
  std::vector<double> x;
  if (family == "fix") {
    for (const Waveguide& w : s.waveguides) x.push_back(w.feed_x_m);
  } else if (family == "grid") {
    GridSearchConfig g;
    g.grid_points = spec.grid_points;
    g.wmmse = spec.wmmse;
    x = grid_search_placement(s, bf, g, stream).placement;
  } else if (family == "ddpg") {
    if (!policy) throw InvalidArgument("method '" + method + "' needs model_path");
    x = (*policy)(s);
  } else {
    throw InvalidArgument("unknown method '" + method + "'");
  }
  return evaluate_general(s, x, bf, spec.wmmse, stream);
}

struct Cell {
  double value = 0.0;
  std::string method;
  std::uint64_t seed = 0;
};

inline std::vector<Cell> experiment_cells(const ExperimentSpec& spec) {
  std::vector<Cell> cells;
  for (double v : spec.values)
    for (const std::string& m : spec.methods)
      for (std::uint64_t seed : spec.seeds) cells.push_back({v, m, seed});
  return cells;
}

inline ResultRow run_cell(const Cell& c, const ExperimentSpec& spec, const ActorPolicy* policy) {
  ResultRow row{c.method, to_string(spec.variable), c.value, c.seed, 0.0, 0.0, false, 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    // The scenario depends only on (seed, sweep value), so every method sees
    // the same instance; the method's own randomness also keys on its name.
    const Scenario s = generate_scenario(apply_sweep(spec.generator, spec.variable, c.value), c.seed);
    const std::uint64_t stream = Rng::substream(c.seed, c.method + "@" + format_number(c.value))();
    const LinkEvaluation ev = run_method(c.method, s, spec, stream, policy);
    row.sum_rate = ev.sum_rate;
    row.min_rate = ev.min_rate;
    row.feasible = ev.feasible;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  if (spec.record_timing)
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

/// Runs every cell (values x methods x seeds) on `jobs` threads. Rows come
/// back, and reach `on_row`, in cell order whatever the completion order.
inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, int jobs = 1,
                                             const std::function<void(const ResultRow&)>& on_row = {}) {
  spec.validate();
  std::optional<ActorPolicy> policy;
  if (!spec.model_path.empty()) policy = ActorPolicy::load(spec.model_path);
  const ActorPolicy* pol = policy ? &*policy : nullptr;

  const std::vector<Cell> cells = experiment_cells(spec);
  std::vector<std::optional<ResultRow>> done(cells.size());
  std::vector<ResultRow> rows;
  rows.reserve(cells.size());
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::size_t emitted = 0;

  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
      ResultRow r = run_cell(cells[i], spec, pol);
      std::lock_guard lock(mu);
      done[i] = std::move(r);
      while (emitted < cells.size() && done[emitted]) {
        rows.push_back(*done[emitted]);
        if (on_row) on_row(rows.back());
        ++emitted;
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  return rows;
}

// One-sided paired sign test of "a beats b"; ties are dropped.
struct PairedComparison {
  double mean_a = 0.0;
  double mean_b = 0.0;
  int wins = 0;
  int losses = 0;
  int ties = 0;
  double p_value = 1.0;
};

/// P(X >= k) for X ~ Binomial(n, 1/2).
inline double binomial_upper_tail(int k, int n) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  double p = 0.0;
  for (int i = k; i <= n; ++i)
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::numbers::ln2);
  return std::min(1.0, p);
}

inline PairedComparison compare_paired(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("compare_paired: samples differ in length");
  PairedComparison c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.mean_a += a[i];
    c.mean_b += b[i];
    if (a[i] > b[i]) {
      ++c.wins;
    } else if (a[i] < b[i]) {
      ++c.losses;
    } else {
      ++c.ties;
    }
  }
  if (!a.empty()) {
    c.mean_a /= static_cast<double>(a.size());
    c.mean_b /= static_cast<double>(a.size());
  }
  c.p_value = binomial_upper_tail(c.wins, c.wins + c.losses);
  return c;
}

/// Sum rates of one method at one sweep value, in seed order.
inline std::vector<double> select_sum_rates(const std::vector<ResultRow>& rows, const std::string& method,
                                            double value) {
  std::vector<double> out;
  for (const ResultRow& r : rows)
    if (r.method == method && r.sweep_value == value) out.push_back(r.sum_rate);
  return out;
}

}  // namespace pinchopt
