#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pinchopt/assignment.hpp"
#include "pinchopt/beamforming.hpp"
#include "pinchopt/channel.hpp"
#include "pinchopt/wmmse.hpp"

namespace pinchopt {

struct LinkEvaluation {
  Eigen::VectorXd rates;
  double sum_rate = 0.0;
  double min_rate = 0.0;
  bool feasible = false;
};

inline LinkEvaluation summarize_rates(Eigen::VectorXd rates, double target_rate) {
  LinkEvaluation ev;
  ev.sum_rate = rates.sum();
  ev.min_rate = rates.size() ? rates.minCoeff() : 0.0;
  ev.feasible = (rates.array() >= target_rate).all();
  ev.rates = std::move(rates);
  return ev;
}

/// One PA per user with equal power P_t / K; all PAs interfere.
inline LinkEvaluation evaluate_special(const Scenario& s, std::span<const double> placement,
                                       const std::vector<int>& waveguide_of_user) {
  const Eigen::MatrixXd g = gain_matrix(s, placement);
  const double p = per_waveguide_power(s), sigma2 = s.physics.noise_power_watts;
  const int m_count = s.num_users();
  Eigen::VectorXd rates(m_count);
  for (int m = 0; m < m_count; ++m) {
    const double own = g(waveguide_of_user[static_cast<std::size_t>(m)], m);
    double interference = 0.0;
    for (int i = 0; i < m_count; ++i)
      if (i != m) interference += g(waveguide_of_user[static_cast<std::size_t>(i)], m);
    rates(m) = std::log2(1.0 + p * own / (p * interference + sigma2));
  }
  return summarize_rates(std::move(rates), s.physics.target_rate_bps_hz);
}

/// Every PA serves every user through the chosen precoder. For WMMSE the
/// feasibility flag is the solver's (QoS met and no infeasible user detected).
inline LinkEvaluation evaluate_general(const Scenario& s, std::span<const double> placement, BeamformerKind bf,
                                       WmmseConfig cfg, std::uint64_t seed = 0) {
  const ChannelMatrix h = channel_matrix(s, placement);
  const double sigma2 = s.physics.noise_power_watts, pt = s.physics.total_power_watts;
  if (bf == BeamformerKind::wmmse) {
    cfg.target_rate = s.physics.target_rate_bps_hz;
    WmmseResult r = wmmse_solve(h.entries, sigma2, pt, cfg);
    LinkEvaluation ev = summarize_rates(std::move(r.rates), cfg.target_rate);
    ev.feasible = r.qos_feasible;
    return ev;
  }
  Rng rng = Rng::substream(seed, "random-beamformer");
  const MatrixXcd p = baseline_beamformer(bf, h.entries, pt, &rng);
  return summarize_rates(user_rates(h.entries, p, sigma2), s.physics.target_rate_bps_hz);
}

}  // namespace pinchopt
