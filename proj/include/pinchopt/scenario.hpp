#pragma once

// Problem instances: generation, obstacle layouts, validation and the JSON
// scenario format.
//
// Scenario file schema (all lengths in meters, powers in watts):
//   {
//     "physics":   { "carrier_frequency_hz", "light_speed_m_s",
//                    "effective_refractive_index", "noise_power_watts",
//                    "total_power_watts", "target_rate_bps_hz",
//                    "area_x_m", "area_y_m", "height_m" },
//     "waveguides": [ { "index", "y_m", "feed_x_m" }, ... ],
//     "users":      [ { "index", "x_m", "y_m" }, ... ],
//     "obstacles":  [ { "x_m", "y_m", "radius_m" }, ... ],
//     "seed": <u64>
//   }

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinchopt/error.hpp"
#include "pinchopt/geometry.hpp"
#include "pinchopt/rng.hpp"
#include "pinchopt/types.hpp"

namespace pinchopt {

enum class LayoutKind { diamond, grid, explicit_list, random };

struct LayoutParams {
  LayoutKind kind = LayoutKind::grid;
  int count = 0;
  double radius_m = 2.0;
  // Diamond half-diagonals; non-positive means L_x/4 and L_y/4.
  double half_width_m = 0.0;
  double half_height_m = 0.0;
  std::vector<Obstacle> obstacles;  // explicit layouts
};

struct GeneratorConfig {
  PhysicsParams physics;
  int num_waveguides = 6;
  int num_users = 6;
  std::vector<double> waveguide_y_m;  // empty: (k - 0.5) L_y / K
  double feed_x_m = 0.0;
  LayoutParams obstacles;
};

inline constexpr int kMaxPlacementAttempts = 10000;

inline const char* to_string(LayoutKind k) {
  switch (k) {
    case LayoutKind::diamond: return "diamond";
    case LayoutKind::grid: return "grid";
    case LayoutKind::explicit_list: return "explicit";
    case LayoutKind::random: return "random";
  }
  return "?";
}

inline LayoutKind parse_layout_kind(const std::string& s) {
  if (s == "diamond") return LayoutKind::diamond;
  if (s == "grid") return LayoutKind::grid;
  if (s == "explicit") return LayoutKind::explicit_list;
  if (s == "random") return LayoutKind::random;
  throw InvalidArgument("unknown obstacle layout '" + s + "'");
}

// Columns of a row-major lattice holding `count` cells, picked so the cells
// are as square as the area allows.
inline int grid_columns(int count, double area_x, double area_y) {
  const double ideal = std::sqrt(count * area_x / area_y);
  int best = 1;
  double best_err = 1e300;
  for (int c = 1; c <= count; ++c) {
    if (count % c) continue;
    const double err = std::abs(std::log(c / ideal));
    if (err < best_err) {
      best_err = err;
      best = c;
    }
  }
  return best;
}

inline std::vector<Obstacle> obstacle_layout(const LayoutParams& p, const PhysicsParams& phys,
                                             Rng* rng = nullptr) {
  const double lx = phys.area_x_m, ly = phys.area_y_m;
  std::vector<Obstacle> out;
  if (p.kind == LayoutKind::explicit_list) {
    out = p.obstacles;
  } else {
    if (!(p.radius_m > 0.0)) throw InvalidArgument("obstacle_layout: radius must be positive");
    if (p.kind == LayoutKind::diamond) {
      const double a = p.half_width_m > 0.0 ? p.half_width_m : lx / 4.0;
      const double b = p.half_height_m > 0.0 ? p.half_height_m : ly / 4.0;
      const double cx = lx / 2.0, cy = ly / 2.0;
      out = {{{cx - a, cy}, p.radius_m},
             {{cx, cy - b}, p.radius_m},
             {{cx + a, cy}, p.radius_m},
             {{cx, cy + b}, p.radius_m}};
    } else if (p.kind == LayoutKind::grid) {
      if (p.count < 0) throw InvalidArgument("obstacle_layout: negative count");
      if (p.count > 0) {
        const int cols = grid_columns(p.count, lx, ly);
        const int rows = p.count / cols;
        for (int j = 0; j < rows; ++j)
          for (int i = 0; i < cols; ++i)
            out.push_back({{(i + 0.5) * lx / cols, (j + 0.5) * ly / rows}, p.radius_m});
      }
    } else {
      if (p.count < 0) throw InvalidArgument("obstacle_layout: negative count");
      if (!rng) throw InvalidArgument("obstacle_layout: random layout needs a random stream");
      if (2 * p.radius_m >= lx || 2 * p.radius_m >= ly)
        throw InvalidArgument("obstacle_layout: radius too large for the area");
      for (int b = 0; b < p.count; ++b) {
        const double x = rng->uniform(p.radius_m, lx - p.radius_m);
        const double y = rng->uniform(p.radius_m, ly - p.radius_m);
        out.push_back({{x, y}, p.radius_m});
      }
    }
  }
  for (const Obstacle& o : out) {
    const Point2 c = o.center_m;
    if (!(c.x >= 0.0 && c.x <= lx && c.y >= 0.0 && c.y <= ly))
      throw InvalidArgument("obstacle_layout: obstacle center outside the service area");
  }
  return out;
}

inline std::vector<Waveguide> default_waveguides(const GeneratorConfig& cfg) {
  const int k_count = cfg.num_waveguides;
  if (!cfg.waveguide_y_m.empty() && static_cast<int>(cfg.waveguide_y_m.size()) != k_count)
    throw InvalidArgument("waveguide_y_m must list one y per waveguide");
  std::vector<Waveguide> out;
  for (int k = 0; k < k_count; ++k) {
    const double y = cfg.waveguide_y_m.empty() ? (k + 0.5) * cfg.physics.area_y_m / k_count
                                               : cfg.waveguide_y_m[static_cast<std::size_t>(k)];
    out.push_back({k, y, cfg.feed_x_m});
  }
  return out;
}

inline Scenario generate_scenario(const GeneratorConfig& cfg, std::uint64_t seed) {
  const PhysicsParams& ph = cfg.physics;
  if (!(ph.area_x_m > 0.0 && ph.area_y_m > 0.0 && ph.height_m > 0.0))
    throw InvalidArgument("generate_scenario: dimensions must be positive");
  if (cfg.num_waveguides < 1 || cfg.num_users < 1)
    throw InvalidArgument("generate_scenario: need at least one waveguide and one user");

  Scenario s;
  s.physics = ph;
  s.seed = seed;
  s.waveguides = default_waveguides(cfg);
  Rng obstacle_rng = Rng::substream(seed, "obstacles");
  s.obstacles = obstacle_layout(cfg.obstacles, ph, &obstacle_rng);

  Rng user_rng = Rng::substream(seed, "users");
  for (int m = 0; m < cfg.num_users; ++m) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
      const Point2 p{user_rng.uniform(0.0, ph.area_x_m), user_rng.uniform(0.0, ph.area_y_m)};
      if (!inside_any_disc(p, s.obstacles)) {
        s.users.push_back({m, p});
        placed = true;
        break;
      }
    }
    if (!placed)
      throw InfeasibleScenario("generate_scenario: no obstacle-free position found for user " +
                               std::to_string(m));
  }
  return s;
}

// True if every x in [0, L_x] along the waveguide line lies inside some disc.
inline bool waveguide_fully_covered(const Waveguide& w, std::span<const Obstacle> obstacles,
                                    double area_x) {
  std::vector<std::pair<double, double>> spans;
  for (const Obstacle& o : obstacles) {
    const double dy = w.y_m - o.center_m.y;
    const double h2 = o.radius_m * o.radius_m - dy * dy;
    if (h2 < 0.0) continue;
    const double h = std::sqrt(h2);
    spans.emplace_back(o.center_m.x - h, o.center_m.x + h);
  }
  std::sort(spans.begin(), spans.end());
  double reach = 0.0;
  bool started = false;
  for (const auto& [a, b] : spans) {
    if (!started) {
      if (a > 0.0) return false;
      started = true;
      reach = b;
    } else {
      if (a > reach) return false;
      reach = std::max(reach, b);
    }
  }
  return started && reach >= area_x;
}

/// Human-readable list of broken invariants; empty when the scenario is valid.
inline std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> v;
  const PhysicsParams& p = s.physics;
  auto positive = [&](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) v.push_back(std::string("physics.") + name + " must be positive");
  };
  positive(p.carrier_frequency_hz, "carrier_frequency_hz");
  positive(p.light_speed_m_s, "light_speed_m_s");
  positive(p.noise_power_watts, "noise_power_watts");
  positive(p.total_power_watts, "total_power_watts");
  positive(p.area_x_m, "area_x_m");
  positive(p.area_y_m, "area_y_m");
  positive(p.height_m, "height_m");
  if (!(p.effective_refractive_index >= 1.0)) v.push_back("physics.effective_refractive_index must be >= 1");
  if (!(p.target_rate_bps_hz >= 0.0)) v.push_back("physics.target_rate_bps_hz must be >= 0");

  auto inside_area = [&](Point2 q) {
    return q.x >= 0.0 && q.x <= p.area_x_m && q.y >= 0.0 && q.y <= p.area_y_m;
  };
  for (std::size_t b = 0; b < s.obstacles.size(); ++b) {
    const Obstacle& o = s.obstacles[b];
    if (!(o.radius_m > 0.0)) v.push_back("obstacle " + std::to_string(b) + ": radius must be positive");
    if (!inside_area(o.center_m)) v.push_back("obstacle " + std::to_string(b) + ": center outside the service area");
  }
  for (const Waveguide& w : s.waveguides) {
    const std::string tag = "waveguide " + std::to_string(w.index);
    if (!(w.y_m >= 0.0 && w.y_m <= p.area_y_m)) v.push_back(tag + ": y outside [0, L_y]");
    if (!(w.feed_x_m >= 0.0 && w.feed_x_m <= p.area_x_m)) v.push_back(tag + ": feed outside [0, L_x]");
    if (waveguide_fully_covered(w, s.obstacles, p.area_x_m))
      v.push_back(tag + ": every PA position lies inside an obstacle");
  }
  for (const User& u : s.users) {
    const std::string tag = "user " + std::to_string(u.index);
    if (!inside_area(u.position_m)) v.push_back(tag + ": outside the service area");
    for (std::size_t b = 0; b < s.obstacles.size(); ++b) {
      if (inside_disc(u.position_m, s.obstacles[b]))
        v.push_back(tag + ": inside obstacle " + std::to_string(b));
    }
  }
  return v;
}

// ---- JSON -----------------------------------------------------------------

using nlohmann::json;

inline json to_json_value(const PhysicsParams& p) {
  return json{{"carrier_frequency_hz", p.carrier_frequency_hz},
              {"light_speed_m_s", p.light_speed_m_s},
              {"effective_refractive_index", p.effective_refractive_index},
              {"noise_power_watts", p.noise_power_watts},
              {"total_power_watts", p.total_power_watts},
              {"target_rate_bps_hz", p.target_rate_bps_hz},
              {"area_x_m", p.area_x_m},
              {"area_y_m", p.area_y_m},
              {"height_m", p.height_m}};
}

// Missing keys keep their defaults.
inline PhysicsParams physics_from_json(const json& j, PhysicsParams p = {}) {
  auto get = [&](const char* key, double& out) {
    if (j.contains(key)) out = j.at(key).get<double>();
  };
  get("carrier_frequency_hz", p.carrier_frequency_hz);
  get("light_speed_m_s", p.light_speed_m_s);
  get("effective_refractive_index", p.effective_refractive_index);
  get("noise_power_watts", p.noise_power_watts);
  get("total_power_watts", p.total_power_watts);
  if (j.contains("total_power_dbm")) p.total_power_watts = dbm_to_watts(j.at("total_power_dbm").get<double>());
  get("target_rate_bps_hz", p.target_rate_bps_hz);
  get("area_x_m", p.area_x_m);
  get("area_y_m", p.area_y_m);
  get("height_m", p.height_m);
  return p;
}

inline json to_json_value(const Obstacle& o) {
  return json{{"x_m", o.center_m.x}, {"y_m", o.center_m.y}, {"radius_m", o.radius_m}};
}

inline Obstacle obstacle_from_json(const json& j) {
  return {{j.at("x_m").get<double>(), j.at("y_m").get<double>()}, j.at("radius_m").get<double>()};
}

inline json to_json_value(const Scenario& s) {
  json j;
  j["physics"] = to_json_value(s.physics);
  j["waveguides"] = json::array();
  for (const Waveguide& w : s.waveguides)
    j["waveguides"].push_back({{"index", w.index}, {"y_m", w.y_m}, {"feed_x_m", w.feed_x_m}});
  j["users"] = json::array();
  for (const User& u : s.users)
    j["users"].push_back({{"index", u.index}, {"x_m", u.position_m.x}, {"y_m", u.position_m.y}});
  j["obstacles"] = json::array();
  for (const Obstacle& o : s.obstacles) j["obstacles"].push_back(to_json_value(o));
  j["seed"] = s.seed;
  return j;
}

inline Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.physics = physics_from_json(j.at("physics"));
  int k = 0;
  for (const json& w : j.at("waveguides")) {
    s.waveguides.push_back({w.value("index", k), w.at("y_m").get<double>(), w.value("feed_x_m", 0.0)});
    ++k;
  }
  int m = 0;
  for (const json& u : j.at("users")) {
    s.users.push_back({u.value("index", m), {u.at("x_m").get<double>(), u.at("y_m").get<double>()}});
    ++m;
  }
  if (j.contains("obstacles"))
    for (const json& o : j.at("obstacles")) s.obstacles.push_back(obstacle_from_json(o));
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

inline json to_json_value(const LayoutParams& p) {
  json j{{"kind", to_string(p.kind)}, {"count", p.count}, {"radius_m", p.radius_m}};
  if (p.half_width_m > 0.0) j["half_width_m"] = p.half_width_m;
  if (p.half_height_m > 0.0) j["half_height_m"] = p.half_height_m;
  if (p.kind == LayoutKind::explicit_list) {
    j["obstacles"] = json::array();
    for (const Obstacle& o : p.obstacles) j["obstacles"].push_back(to_json_value(o));
  }
  return j;
}

inline LayoutParams layout_from_json(const json& j) {
  LayoutParams p;
  p.kind = parse_layout_kind(j.value("kind", std::string("grid")));
  p.count = j.value("count", p.kind == LayoutKind::diamond ? 4 : 0);
  p.radius_m = j.value("radius_m", 2.0);
  p.half_width_m = j.value("half_width_m", 0.0);
  p.half_height_m = j.value("half_height_m", 0.0);
  if (j.contains("obstacles"))
    for (const json& o : j.at("obstacles")) p.obstacles.push_back(obstacle_from_json(o));
  return p;
}

inline json to_json_value(const GeneratorConfig& c) {
  json j{{"physics", to_json_value(c.physics)},
         {"num_waveguides", c.num_waveguides},
         {"num_users", c.num_users},
         {"feed_x_m", c.feed_x_m},
         {"obstacles", to_json_value(c.obstacles)}};
  if (!c.waveguide_y_m.empty()) j["waveguide_y_m"] = c.waveguide_y_m;
  return j;
}

inline GeneratorConfig generator_config_from_json(const json& j) {
  GeneratorConfig c;
  if (j.contains("physics")) c.physics = physics_from_json(j.at("physics"));
  c.num_waveguides = j.value("num_waveguides", c.num_waveguides);
  c.num_users = j.value("num_users", c.num_users);
  if (j.contains("waveguide_y_m")) c.waveguide_y_m = j.at("waveguide_y_m").get<std::vector<double>>();
  c.feed_x_m = j.value("feed_x_m", c.feed_x_m);
  if (j.contains("obstacles")) c.obstacles = layout_from_json(j.at("obstacles"));
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return json::parse(in);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

inline std::string dump_scenario(const Scenario& s) { return to_json_value(s).dump(2) + "\n"; }

inline Scenario load_scenario(const std::string& path) { return scenario_from_json(read_json_file(path)); }

inline void save_scenario(const Scenario& s, const std::string& path) { write_text_file(path, dump_scenario(s)); }

}  // namespace pinchopt
