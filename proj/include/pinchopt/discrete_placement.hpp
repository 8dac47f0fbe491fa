#pragma once

// Block-coordinate search over discrete PA positions for a fixed assignment.
//
// Per-user desired power S and interference I are cached and updated in O(M)
// per move from the power lookup matrices. Candidates for one waveguide are
// ranked by the linearized sum-rate gain (a single matrix-vector product) and
// only the best N' are evaluated exactly.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pinchopt/assignment.hpp"
#include "pinchopt/channel.hpp"
#include "pinchopt/error.hpp"
#include "pinchopt/rng.hpp"

namespace pinchopt {

struct PlacementContext {
  std::vector<PowerMatrix> powers;     // one M x N matrix per waveguide
  std::vector<int> waveguide_of_user;  // Pi
  std::vector<int> user_of_waveguide;  // Pi^-1
  double power = 0.0;                  // per-waveguide transmit power P
  double sigma2 = 0.0;

  int num_waveguides() const { return static_cast<int>(powers.size()); }
  int num_users() const { return static_cast<int>(waveguide_of_user.size()); }
  int num_candidates() const { return powers.empty() ? 0 : powers.front().cols(); }
  double gain(int k, int m, int n) const { return powers[static_cast<std::size_t>(k)].entries(m, n); }
};

inline PlacementContext make_context(std::vector<PowerMatrix> powers, std::vector<int> waveguide_of_user,
                                     double power, double sigma2) {
  const int k_count = static_cast<int>(powers.size());
  if (static_cast<int>(waveguide_of_user.size()) != k_count)
    throw DimensionMismatch("placement context: assignment must cover every waveguide once");
  std::vector<int> inv(static_cast<std::size_t>(k_count), -1);
  for (int m = 0; m < k_count; ++m) {
    const int k = waveguide_of_user[static_cast<std::size_t>(m)];
    if (k < 0 || k >= k_count || inv[static_cast<std::size_t>(k)] >= 0)
      throw InvalidArgument("placement context: assignment is not a bijection");
    inv[static_cast<std::size_t>(k)] = m;
  }
  for (const PowerMatrix& pm : powers)
    if (pm.rows() != k_count || pm.cols() != powers.front().cols())
      throw DimensionMismatch("placement context: power matrices must all be M x N");
  return {std::move(powers), std::move(waveguide_of_user), std::move(inv), power, sigma2};
}

struct LinkPowers {
  Eigen::VectorXd signal;
  Eigen::VectorXd interference;
};

struct PlacementState {
  std::vector<int> position;  // active candidate index per waveguide
  Eigen::VectorXd signal;
  Eigen::VectorXd interference;
  Eigen::VectorXd rate;
  double sum_rate = 0.0;
  Eigen::VectorXd interference_error;  // running bound on rounding error in `interference`
};

/// S and I from scratch for the given positions.
inline LinkPowers link_powers(const PlacementContext& ctx, std::span<const int> position) {
  const int m_count = ctx.num_users();
  if (static_cast<int>(position.size()) != ctx.num_waveguides())
    throw DimensionMismatch("link_powers: one position per waveguide");
  LinkPowers lp{Eigen::VectorXd::Zero(m_count), Eigen::VectorXd::Zero(m_count)};
  for (int m = 0; m < m_count; ++m) {
    const int own = ctx.waveguide_of_user[static_cast<std::size_t>(m)];
    lp.signal(m) = ctx.power * ctx.gain(own, m, position[static_cast<std::size_t>(own)]);
    double interference = 0.0;
    for (int i = 0; i < m_count; ++i) {
      if (i == m) continue;
      const int k = ctx.waveguide_of_user[static_cast<std::size_t>(i)];
      interference += ctx.gain(k, m, position[static_cast<std::size_t>(k)]);
    }
    lp.interference(m) = ctx.power * interference;
  }
  return lp;
}

inline double user_rate(double s, double i, double sigma2) { return std::log2(1.0 + s / (i + sigma2)); }

inline double sum_rate(const PlacementState& st, double sigma2) {
  double f = 0.0;
  for (Eigen::Index m = 0; m < st.signal.size(); ++m) f += user_rate(st.signal(m), st.interference(m), sigma2);
  return f;
}

inline void refresh_rates(PlacementState& st, double sigma2) {
  st.rate.resize(st.signal.size());
  for (Eigen::Index m = 0; m < st.signal.size(); ++m)
    st.rate(m) = user_rate(st.signal(m), st.interference(m), sigma2);
  st.sum_rate = st.rate.sum();
}

inline PlacementState make_state(const PlacementContext& ctx, std::vector<int> position) {
  for (int n : position)
    if (n < 0 || n >= ctx.num_candidates()) throw InvalidArgument("make_state: candidate index out of range");
  LinkPowers lp = link_powers(ctx, position);
  const double eps = std::numeric_limits<double>::epsilon();
  Eigen::VectorXd err = eps * ctx.num_waveguides() * lp.interference;
  PlacementState st{std::move(position), std::move(lp.signal), std::move(lp.interference), {}, 0.0, std::move(err)};
  refresh_rates(st, ctx.sigma2);
  return st;
}

/// Move the PA of waveguide k to candidate n_new, updating caches incrementally.
inline PlacementState apply_move(const PlacementContext& ctx, const PlacementState& st, int k, int n_new) {
  if (k < 0 || k >= ctx.num_waveguides()) throw InvalidArgument("apply_move: waveguide out of range");
  if (n_new < 0 || n_new >= ctx.num_candidates()) throw InvalidArgument("apply_move: candidate out of range");
  const int n_old = st.position[static_cast<std::size_t>(k)];
  if (n_new == n_old) return st;
  const double eps = std::numeric_limits<double>::epsilon();
  PlacementState next = st;
  const int served = ctx.user_of_waveguide[static_cast<std::size_t>(k)];
  const Eigen::MatrixXd& h = ctx.powers[static_cast<std::size_t>(k)].entries;
  next.position[static_cast<std::size_t>(k)] = n_new;
  for (int j = 0; j < ctx.num_users(); ++j) {
    if (j == served) {
      next.signal(j) = ctx.power * h(j, n_new);
    } else {
      const double out = ctx.power * h(j, n_old), in = ctx.power * h(j, n_new);
      next.interference(j) = st.interference(j) - out + in;
      next.interference_error(j) += 2 * eps * (st.interference(j) + out + in);
      // Heavy cancellation: rebuild this user's sum before drift reaches the rate.
      if (next.interference_error(j) > 1e-12 * (next.interference(j) + ctx.sigma2)) {
        double fresh = 0.0;
        for (int i = 0; i < ctx.num_users(); ++i)
          if (i != j) {
            const int w = ctx.waveguide_of_user[static_cast<std::size_t>(i)];
            fresh += ctx.gain(w, j, next.position[static_cast<std::size_t>(w)]);
          }
        next.interference(j) = ctx.power * fresh;
        next.interference_error(j) = eps * ctx.num_waveguides() * next.interference(j);
      }
    }
  }
  refresh_rates(next, ctx.sigma2);
  return next;
}

// zeta > 0 weighs the served user's signal, theta_j <= 0 the others' interference.
struct SurrogateWeights {
  int served_user = 0;
  double zeta = 0.0;
  Eigen::VectorXd theta;  // theta(served_user) is 0
};

inline SurrogateWeights surrogate_weights(const PlacementContext& ctx, const PlacementState& st, int k) {
  const double inv_ln2 = 1.0 / std::numbers::ln2;
  SurrogateWeights sw;
  sw.served_user = ctx.user_of_waveguide[static_cast<std::size_t>(k)];
  sw.theta = Eigen::VectorXd::Zero(ctx.num_users());
  for (int j = 0; j < ctx.num_users(); ++j) {
    const double u = st.interference(j) + ctx.sigma2;
    const double t = st.signal(j) + u;
    if (j == sw.served_user) {
      sw.zeta = inv_ln2 / t;
    } else {
      sw.theta(j) = inv_ln2 * (1.0 / t - 1.0 / u);
    }
  }
  return sw;
}

/// Q_k(n) for every candidate n: H_k^T (zeta e_m + theta).
inline Eigen::VectorXd surrogate_scores(const PlacementContext& ctx, const PlacementState& st, int k) {
  const SurrogateWeights sw = surrogate_weights(ctx, st, k);
  Eigen::VectorXd coeff = sw.theta;
  coeff(sw.served_user) = sw.zeta;
  return ctx.powers[static_cast<std::size_t>(k)].entries.transpose() * coeff;
}

/// Candidates keeping the served link unblocked, excluding the current one,
/// sorted by descending score then ascending index, truncated to `shortlist`.
inline std::vector<int> rank_candidates(const PlacementContext& ctx, const PlacementState& st, int k,
                                        int shortlist) {
  const Eigen::VectorXd q = surrogate_scores(ctx, st, k);
  const int served = ctx.user_of_waveguide[static_cast<std::size_t>(k)];
  const int current = st.position[static_cast<std::size_t>(k)];
  std::vector<int> idx;
  for (int n = 0; n < ctx.num_candidates(); ++n)
    if (n != current && ctx.gain(k, served, n) > 0.0) idx.push_back(n);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return q(a) > q(b); });
  if (static_cast<int>(idx.size()) > shortlist) idx.resize(static_cast<std::size_t>(shortlist));
  return idx;
}

struct BcdConfig {
  int max_sweeps = 50;
  int shortlist = 20;
  double target_rate = 0.5;
  // Start each PA at a uniformly random candidate instead of its best own-gain one.
  bool random_start = false;
  std::uint64_t seed = 0;
};

struct BcdMove {
  int sweep = 0;
  int waveguide = 0;
  int from = 0;
  int to = 0;
  double sum_rate = 0.0;
  bool qos_gated = true;  // false for moves taken by the repair sweep
};

struct BcdResult {
  PlacementState state;
  std::vector<BcdMove> trajectory;
  bool qos_feasible = false;
  int sweeps = 0;
};

inline bool meets_qos(const PlacementState& st, double target_rate) {
  return (st.rate.array() >= target_rate).all();
}

/// Best own-gain candidate for each waveguide's served user (lowest index on ties).
inline std::vector<int> best_own_gain_positions(const PlacementContext& ctx) {
  std::vector<int> pos(static_cast<std::size_t>(ctx.num_waveguides()), 0);
  for (int k = 0; k < ctx.num_waveguides(); ++k) {
    const int m = ctx.user_of_waveguide[static_cast<std::size_t>(k)];
    ctx.powers[static_cast<std::size_t>(k)].entries.row(m).maxCoeff(&pos[static_cast<std::size_t>(k)]);
  }
  return pos;
}

namespace detail {

// One cyclic pass over the waveguides with first-improvement acceptance.
inline bool bcd_sweep(const PlacementContext& ctx, PlacementState& st, int shortlist, double target_rate,
                      bool gated, int sweep, std::vector<BcdMove>& trajectory) {
  bool improved = false;
  for (int k = 0; k < ctx.num_waveguides(); ++k) {
    for (int n : rank_candidates(ctx, st, k, shortlist)) {
      PlacementState trial = apply_move(ctx, st, k, n);
      if ((!gated || meets_qos(trial, target_rate)) && trial.sum_rate > st.sum_rate) {
        trajectory.push_back({sweep, k, st.position[static_cast<std::size_t>(k)], n, trial.sum_rate, gated});
        st = std::move(trial);
        improved = true;
        break;
      }
    }
  }
  return improved;
}

}  // namespace detail

inline BcdResult bcd_solve(const PlacementContext& ctx, const BcdConfig& cfg,
                           std::optional<std::vector<int>> initial = std::nullopt) {
  if (cfg.max_sweeps < 1) throw InvalidArgument("bcd_solve: max_sweeps must be >= 1");
  if (cfg.shortlist < 1 || cfg.shortlist > ctx.num_candidates())
    throw InvalidArgument("bcd_solve: shortlist must lie in [1, N]");

  std::vector<int> start;
  if (initial) {
    start = std::move(*initial);
  } else if (cfg.random_start) {
    Rng rng = Rng::substream(cfg.seed, "bcd-start");
    for (int k = 0; k < ctx.num_waveguides(); ++k)
      start.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(ctx.num_candidates()))));
  } else {
    start = best_own_gain_positions(ctx);
  }

  BcdResult res{make_state(ctx, std::move(start)), {}, false, 0};
  if (!meets_qos(res.state, cfg.target_rate)) {
    detail::bcd_sweep(ctx, res.state, cfg.shortlist, cfg.target_rate, false, 0, res.trajectory);
    if (!meets_qos(res.state, cfg.target_rate)) return res;
  }
  res.qos_feasible = true;
  for (int t = 1; t <= cfg.max_sweeps; ++t) {
    res.sweeps = t;
    if (!detail::bcd_sweep(ctx, res.state, cfg.shortlist, cfg.target_rate, true, t, res.trajectory)) break;
  }
  return res;
}

inline BcdResult bcd_solve(const Scenario& s, std::span<const double> candidates,
                           const std::vector<int>& waveguide_of_user, const BcdConfig& cfg) {
  PlacementContext ctx = make_context(power_matrices(s, candidates), waveguide_of_user,
                                      per_waveguide_power(s), s.physics.noise_power_watts);
  return bcd_solve(ctx, cfg);
}

}  // namespace pinchopt
