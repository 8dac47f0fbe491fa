#pragma once

// Free-space LoS channel from a PA on a dielectric waveguide to a user:
//   h = sqrt(eta) / r * exp(-j 2 pi (r / lambda + |x_pa - x_feed| / lambda_g))
// with r the 3-D PA-user distance and the gain zeroed when the LoS is blocked.

#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pinchopt/error.hpp"
#include "pinchopt/geometry.hpp"
#include "pinchopt/types.hpp"

namespace pinchopt {

inline double path_loss_coefficient(double carrier_frequency_hz, double light_speed_m_s) {
  if (!(carrier_frequency_hz > 0.0)) throw InvalidArgument("path_loss_coefficient: f_c must be positive");
  const double pi = std::numbers::pi;
  return light_speed_m_s * light_speed_m_s /
         (16.0 * pi * pi * carrier_frequency_hz * carrier_frequency_hz);
}

struct ChannelParams {
  double eta = 0.0;
  double wavelength_m = 0.0;
  double guide_wavelength_m = 0.0;
  double sigma2_watts = 0.0;
  double height_m = 0.0;

  static ChannelParams from(const PhysicsParams& p) {
    const double lambda = p.light_speed_m_s / p.carrier_frequency_hz;
    return {path_loss_coefficient(p.carrier_frequency_hz, p.light_speed_m_s), lambda,
            lambda / p.effective_refractive_index, p.noise_power_watts, p.height_m};
  }
};

inline std::complex<double> complex_gain(const Point3& pa, const Point3& user, const Point3& feed,
                                         int alpha, const ChannelParams& cp) {
  if (alpha == 0) return {0.0, 0.0};
  const double r = distance(pa, user);
  if (!(r > 0.0)) throw DegenerateSegment("complex_gain: PA and user coincide");
  const double feed_dist = distance(pa, feed);
  const double phase = -2.0 * std::numbers::pi * (r / cp.wavelength_m + feed_dist / cp.guide_wavelength_m);
  return std::polar(std::sqrt(cp.eta) / r, phase);
}

/// |h|^2 = alpha * eta / ((x_user - x_pa)^2 + D), D = (y_user - y_wg)^2 + d^2.
inline double squared_gain(double x_user, double x_pa, double d_km, int alpha, double eta) {
  if (alpha == 0) return 0.0;
  const double dx = x_user - x_pa;
  return eta / (dx * dx + d_km);
}

inline double geometry_constant(const Scenario& s, int k, int m) {
  const double dy = s.users[static_cast<std::size_t>(m)].position_m.y -
                    s.waveguides[static_cast<std::size_t>(k)].y_m;
  return dy * dy + s.physics.height_m * s.physics.height_m;
}

/// LoS flag for the PA of waveguide k at x. A PA position inside an obstacle
/// footprint cannot host a radiating point and is treated as blocked.
inline int pa_los(const Scenario& s, int k, double x_pa, int m) {
  const Point2 pa{x_pa, s.waveguides[static_cast<std::size_t>(k)].y_m};
  if (inside_any_disc(pa, s.obstacles)) return 0;
  const Point2 user = s.users[static_cast<std::size_t>(m)].position_m;
  if (pa == user) return 1;  // user under the PA: vertical link, nothing in between
  return los_indicator(pa, user, s.obstacles);
}

/// Candidate grid {n L_x / N : n = 1..N}; index n-1 holds candidate n.
inline std::vector<double> candidate_positions(double area_x, int n) {
  if (n < 1) throw InvalidArgument("candidate_positions: need at least one candidate");
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = (i + 1) * area_x / n;
  return xs;
}

// Squared gains from every candidate position on one waveguide to every user.
struct PowerMatrix {
  int waveguide = 0;
  Eigen::MatrixXd entries;  // M x N

  int rows() const { return static_cast<int>(entries.rows()); }
  int cols() const { return static_cast<int>(entries.cols()); }
  double operator()(int m, int n) const { return entries(m, n); }
};

inline PowerMatrix power_matrix(int k, const Scenario& s, std::span<const double> candidates) {
  if (candidates.empty()) throw InvalidArgument("power_matrix: no candidates");
  const double eta = path_loss_coefficient(s.physics.carrier_frequency_hz, s.physics.light_speed_m_s);
  const int m_count = s.num_users();
  const int n_count = static_cast<int>(candidates.size());
  PowerMatrix pm{k, Eigen::MatrixXd::Zero(m_count, n_count)};
  for (int n = 0; n < n_count; ++n) {
    const double x = candidates[static_cast<std::size_t>(n)];
    if (!(x >= 0.0 && x <= s.physics.area_x_m)) throw InvalidArgument("power_matrix: candidate outside [0, L_x]");
    for (int m = 0; m < m_count; ++m) {
      const int alpha = pa_los(s, k, x, m);
      pm.entries(m, n) = squared_gain(s.users[static_cast<std::size_t>(m)].position_m.x, x,
                                      geometry_constant(s, k, m), alpha, eta);
    }
  }
  return pm;
}

inline std::vector<PowerMatrix> power_matrices(const Scenario& s, std::span<const double> candidates) {
  std::vector<PowerMatrix> out;
  out.reserve(s.waveguides.size());
  for (int k = 0; k < s.num_waveguides(); ++k) out.push_back(power_matrix(k, s, candidates));
  return out;
}

// Complex gains h[k][m] at a given placement. Received amplitude of user m
// for precoder column p is h_m^H p with h_m the m-th column.
struct ChannelMatrix {
  Eigen::MatrixXcd entries;  // K x M
  std::vector<double> placement;
};

inline ChannelMatrix channel_matrix(const Scenario& s, std::span<const double> placement) {
  const int k_count = s.num_waveguides();
  const int m_count = s.num_users();
  if (static_cast<int>(placement.size()) != k_count)
    throw DimensionMismatch("channel_matrix: placement needs one x per waveguide");
  const ChannelParams cp = ChannelParams::from(s.physics);
  ChannelMatrix h{Eigen::MatrixXcd::Zero(k_count, m_count), {placement.begin(), placement.end()}};
  for (int k = 0; k < k_count; ++k) {
    const Waveguide& w = s.waveguides[static_cast<std::size_t>(k)];
    const double x = placement[static_cast<std::size_t>(k)];
    if (!(x >= 0.0 && x <= s.physics.area_x_m)) throw InvalidArgument("channel_matrix: PA outside [0, L_x]");
    const Point3 pa{x, w.y_m, s.physics.height_m};
    const Point3 feed{w.feed_x_m, w.y_m, s.physics.height_m};
    for (int m = 0; m < m_count; ++m) {
      const Point2 u = s.users[static_cast<std::size_t>(m)].position_m;
      h.entries(k, m) = complex_gain(pa, {u.x, u.y, 0.0}, feed, pa_los(s, k, x, m), cp);
    }
  }
  return h;
}

// Header "user,c0,c1,..." with candidate x values, then one row per user.
inline void write_power_csv(const PowerMatrix& pm, std::span<const double> candidates, std::ostream& os) {
  os.precision(17);
  os << "user";
  for (double x : candidates) os << ',' << x;
  os << '\n';
  for (int m = 0; m < pm.rows(); ++m) {
    os << m;
    for (int n = 0; n < pm.cols(); ++n) os << ',' << pm(m, n);
    os << '\n';
  }
}

}  // namespace pinchopt
