#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinchopt/assignment.hpp"
#include "pinchopt/channel.hpp"
#include "pinchopt/discrete_placement.hpp"
#include "pinchopt/error.hpp"
#include "pinchopt/evaluation.hpp"
#include "pinchopt/rng.hpp"

namespace pinchopt {

enum class BaselineKind { random_closest, hungarian_random, fix_antenna, random_random };

inline const char* to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::random_closest: return "random_closest";
    case BaselineKind::hungarian_random: return "hungarian_random";
    case BaselineKind::fix_antenna: return "fix_antenna";
    case BaselineKind::random_random: return "random_random";
  }
  return "?";
}

inline BaselineKind parse_baseline(const std::string& s) {
  if (s == "random_closest") return BaselineKind::random_closest;
  if (s == "hungarian_random") return BaselineKind::hungarian_random;
  if (s == "fix_antenna") return BaselineKind::fix_antenna;
  if (s == "random_random") return BaselineKind::random_random;
  throw InvalidArgument("unknown baseline '" + s + "'");
}

struct BaselinePlacement {
  std::optional<std::vector<int>> waveguide_of_user;
  std::vector<double> placement;
};

inline std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  shuffle(p, rng);
  return p;
}

inline int closest_candidate(std::span<const double> candidates, double x) {
  int best = 0;
  for (int n = 1; n < static_cast<int>(candidates.size()); ++n)
    if (std::abs(candidates[static_cast<std::size_t>(n)] - x) <
        std::abs(candidates[static_cast<std::size_t>(best)] - x))
      best = n;
  return best;
}

/// Hungarian at a fixed placement; falls back to the identity pairing when no
/// link is open at all.
inline Assignment best_assignment(const Scenario& s, std::span<const double> placement) {
  const WeightMatrix w = weight_matrix(s, placement);
  if (!w.entries.array().isFinite().any()) {
    Assignment a;
    for (int m = 0; m < s.num_users(); ++m) a.waveguide_of_user.push_back(m);
    a.feasible = false;
    return a;
  }
  return solve_assignment(w);
}

inline BaselinePlacement baseline_placement(BaselineKind kind, const Scenario& s,
                                            std::span<const double> candidates, std::uint64_t seed) {
  if (s.num_waveguides() != s.num_users()) throw DimensionMismatch("baseline_placement: requires K == M");
  if (candidates.empty()) throw InvalidArgument("baseline_placement: empty candidate set");
  const int k_count = s.num_waveguides();
  Rng rng = Rng::substream(seed, to_string(kind));
  BaselinePlacement out;
  auto random_candidates = [&] {
    std::vector<double> x;
    for (int k = 0; k < k_count; ++k) x.push_back(candidates[rng.below(candidates.size())]);
    return x;
  };

  switch (kind) {
    case BaselineKind::random_closest: {
      std::vector<int> pi = random_permutation(k_count, rng);
      out.placement.assign(static_cast<std::size_t>(k_count), 0.0);
      for (int m = 0; m < k_count; ++m) {
        const double ux = s.users[static_cast<std::size_t>(m)].position_m.x;
        out.placement[static_cast<std::size_t>(pi[static_cast<std::size_t>(m)])] =
            candidates[static_cast<std::size_t>(closest_candidate(candidates, ux))];
      }
      out.waveguide_of_user = std::move(pi);
      break;
    }
    case BaselineKind::hungarian_random:
      out.placement = random_candidates();
      out.waveguide_of_user = best_assignment(s, out.placement).waveguide_of_user;
      break;
    case BaselineKind::fix_antenna:
      for (const Waveguide& w : s.waveguides) out.placement.push_back(w.feed_x_m);
      out.waveguide_of_user = best_assignment(s, out.placement).waveguide_of_user;
      break;
    case BaselineKind::random_random:
      out.waveguide_of_user = random_permutation(k_count, rng);
      out.placement = random_candidates();
      break;
  }
  return out;
}

struct BcdAoConfig {
  int num_candidates = 100;
  BcdConfig bcd;
  int max_rounds = 10;
};

struct BcdAoResult {
  std::vector<int> waveguide_of_user;
  std::vector<int> position;
  std::vector<double> placement;
  double sum_rate = 0.0;
  bool qos_feasible = false;
  int rounds = 0;
};

/// Alternates Hungarian assignment (placement fixed) with surrogate BCD
/// (assignment fixed) until the assignment stops changing or F stops rising.
inline BcdAoResult bcd_ao(const Scenario& s, const BcdAoConfig& cfg, std::uint64_t seed) {
  if (s.num_waveguides() != s.num_users()) throw DimensionMismatch("bcd_ao: requires K == M");
  const std::vector<double> cand = candidate_positions(s.physics.area_x_m, cfg.num_candidates);
  const std::vector<PowerMatrix> powers = power_matrices(s, cand);
  const double p = per_waveguide_power(s), sigma2 = s.physics.noise_power_watts;
  BcdConfig bcfg = cfg.bcd;
  bcfg.target_rate = s.physics.target_rate_bps_hz;
  bcfg.shortlist = std::min(bcfg.shortlist, cfg.num_candidates);

  auto to_x = [&](const std::vector<int>& pos) {
    std::vector<double> x;
    for (int n : pos) x.push_back(cand[static_cast<std::size_t>(n)]);
    return x;
  };
  auto better = [](const BcdResult& a, const BcdResult& b) {
    if (a.qos_feasible != b.qos_feasible) return a.qos_feasible;
    return a.state.sum_rate > b.state.sum_rate;
  };

  Rng rng = Rng::substream(seed, "bcd-ao-start");
  std::vector<int> start;
  for (int k = 0; k < s.num_waveguides(); ++k) start.push_back(static_cast<int>(rng.below(cand.size())));
  std::vector<int> pi = best_assignment(s, to_x(start)).waveguide_of_user;
  BcdResult best = bcd_solve(make_context(powers, pi, p, sigma2), bcfg);
  int rounds = 1;
  for (; rounds < cfg.max_rounds; ++rounds) {
    std::vector<int> next_pi = best_assignment(s, to_x(best.state.position)).waveguide_of_user;
    if (next_pi == pi) break;
    BcdResult trial = bcd_solve(make_context(powers, next_pi, p, sigma2), bcfg, best.state.position);
    if (!better(trial, best)) break;
    best = std::move(trial);
    pi = std::move(next_pi);
  }

  BcdAoResult out;
  out.waveguide_of_user = pi;
  out.position = best.state.position;
  out.placement = to_x(best.state.position);
  out.sum_rate = best.state.sum_rate;
  out.qos_feasible = best.qos_feasible;
  out.rounds = rounds;
  return out;
}

struct GridSearchConfig {
  int grid_points = 25;
  int max_passes = 50;
  WmmseConfig wmmse;
  std::optional<std::vector<double>> start;  // default: every PA at L_x / 2
};

struct GridSearchResult {
  std::vector<double> placement;
  std::vector<double> pass_sum_rates;  // entry 0 is the start
};

/// Coordinate-wise search: each PA in turn tries every grid point with the
/// others fixed and keeps a strict improvement. Passes repeat until none helps.
inline GridSearchResult grid_search_placement(const Scenario& s, BeamformerKind bf, const GridSearchConfig& cfg = {},
                                              std::uint64_t seed = 0) {
  if (cfg.grid_points < 1) throw InvalidArgument("grid_search_placement: grid_points must be >= 1");
  const int k_count = s.num_waveguides();
  const double lx = s.physics.area_x_m;
  std::vector<double> grid;
  for (int i = 0; i < cfg.grid_points; ++i) grid.push_back((i + 0.5) * lx / cfg.grid_points);

  GridSearchResult res;
  res.placement = cfg.start.value_or(std::vector<double>(static_cast<std::size_t>(k_count), 0.5 * lx));
  if (static_cast<int>(res.placement.size()) != k_count)
    throw DimensionMismatch("grid_search_placement: start has the wrong length");
  auto score = [&](const std::vector<double>& x) { return evaluate_general(s, x, bf, cfg.wmmse, seed).sum_rate; };

  if (cfg.grid_points == 1) {
    std::fill(res.placement.begin(), res.placement.end(), grid[0]);
    res.pass_sum_rates.push_back(score(res.placement));
    return res;
  }
  double current = score(res.placement);
  res.pass_sum_rates.push_back(current);
  for (int pass = 0; pass < cfg.max_passes; ++pass) {
    bool improved = false;
    for (int k = 0; k < k_count; ++k) {
      std::vector<double> trial = res.placement;
      for (double g : grid) {
        trial[static_cast<std::size_t>(k)] = g;
        const double f = score(trial);
        if (f > current) {
          current = f;
          res.placement[static_cast<std::size_t>(k)] = g;
          improved = true;
        }
      }
    }
    res.pass_sum_rates.push_back(current);
    if (!improved) break;
  }
  return res;
}

}  // namespace pinchopt
