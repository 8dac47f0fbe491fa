#pragma once

// One-to-one waveguide/user assignment at fixed PA positions.
//
// With every PA radiating at P = P_t / K, the interference seen by a user does
// not depend on how the other users are assigned, so the sum rate is linear
// in the assignment and the problem reduces to a linear sum assignment, solved
// with the Hungarian (Munkres) method on a non-negative cost matrix.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pinchopt/channel.hpp"
#include "pinchopt/error.hpp"
#include "pinchopt/types.hpp"

namespace pinchopt {

inline constexpr double kInfeasibleWeight = -std::numeric_limits<double>::infinity();

struct WeightMatrix {
  Eigen::MatrixXd entries;  // [user][waveguide], -inf where the link is blocked
};

struct CostMatrix {
  Eigen::MatrixXd entries;
  double c_max = 0.0;
  double m_big = 0.0;
};

struct Assignment {
  std::vector<int> waveguide_of_user;  // the permutation Pi
  double total_cost = 0.0;
  double total_weight = 0.0;
  bool feasible = true;

  std::vector<int> user_of_waveguide() const {
    std::vector<int> inv(waveguide_of_user.size(), -1);
    for (std::size_t m = 0; m < waveguide_of_user.size(); ++m)
      inv[static_cast<std::size_t>(waveguide_of_user[m])] = static_cast<int>(m);
    return inv;
  }
};

/// K x M matrix of |h_{k,m}|^2 with LoS indicators applied, PAs at `placement`.
inline Eigen::MatrixXd gain_matrix(const Scenario& s, std::span<const double> placement) {
  const int k_count = s.num_waveguides(), m_count = s.num_users();
  if (static_cast<int>(placement.size()) != k_count)
    throw DimensionMismatch("gain_matrix: placement needs one x per waveguide");
  const double eta = path_loss_coefficient(s.physics.carrier_frequency_hz, s.physics.light_speed_m_s);
  Eigen::MatrixXd g(k_count, m_count);
  for (int k = 0; k < k_count; ++k) {
    const double x = placement[static_cast<std::size_t>(k)];
    for (int m = 0; m < m_count; ++m)
      g(k, m) = squared_gain(s.users[static_cast<std::size_t>(m)].position_m.x, x,
                             geometry_constant(s, k, m), pa_los(s, k, x, m), eta);
  }
  return g;
}

inline double per_waveguide_power(const Scenario& s) {
  return s.physics.total_power_watts / s.num_waveguides();
}

/// Rate of user m when served by waveguide k; every other PA interferes.
inline double pair_rate(const Eigen::MatrixXd& gains, int m, int k, double power, double sigma2) {
  const double own = gains(k, m);
  if (own == 0.0) return kInfeasibleWeight;
  const double interference = power * (gains.col(m).sum() - own);
  return std::log2(1.0 + power * own / (interference + sigma2));
}

inline double pair_rate(int m, int k, std::span<const double> placement, const Scenario& s) {
  return pair_rate(gain_matrix(s, placement), m, k, per_waveguide_power(s), s.physics.noise_power_watts);
}

inline WeightMatrix weight_matrix(const Scenario& s, std::span<const double> placement) {
  const Eigen::MatrixXd g = gain_matrix(s, placement);
  const double p = per_waveguide_power(s), sigma2 = s.physics.noise_power_watts;
  WeightMatrix w{Eigen::MatrixXd(s.num_users(), s.num_waveguides())};
  for (int m = 0; m < s.num_users(); ++m)
    for (int k = 0; k < s.num_waveguides(); ++k) w.entries(m, k) = pair_rate(g, m, k, p, sigma2);
  return w;
}

// M_big sits far above c_max so an infeasible cell never beats a feasible one.
inline double big_cost(double c_max) { return c_max + 1e6 * std::max(1.0, c_max); }

inline CostMatrix weight_to_cost(const WeightMatrix& w) {
  const Eigen::MatrixXd& we = w.entries;
  double c_max = kInfeasibleWeight;
  for (Eigen::Index i = 0; i < we.size(); ++i)
    if (std::isfinite(we.data()[i])) c_max = std::max(c_max, we.data()[i]);
  if (!std::isfinite(c_max)) throw InfeasibleAssignment("weight_to_cost: no feasible link", {}, {});
  CostMatrix c{Eigen::MatrixXd(we.rows(), we.cols()), c_max, big_cost(c_max)};
  for (Eigen::Index r = 0; r < we.rows(); ++r)
    for (Eigen::Index col = 0; col < we.cols(); ++col)
      c.entries(r, col) = std::isfinite(we(r, col)) ? c_max - we(r, col) : c.m_big;
  return c;
}

namespace detail {

// Munkres with starred/primed zeros and row/column covers. Scans rows first,
// then columns, in ascending order, which fixes the tie-breaking.
class Munkres {
 public:
  explicit Munkres(const Eigen::MatrixXd& cost)
      : n_(static_cast<int>(cost.rows())),
        c_(cost),
        star_in_row_(n_, -1),
        star_in_col_(n_, -1),
        prime_in_row_(n_, -1),
        row_cov_(n_, false),
        col_cov_(n_, false) {}

  std::vector<int> solve() {
    if (n_ == 0) return {};
    for (int r = 0; r < n_; ++r) c_.row(r).array() -= c_.row(r).minCoeff();
    for (int col = 0; col < n_; ++col) c_.col(col).array() -= c_.col(col).minCoeff();

    for (int r = 0; r < n_; ++r)
      for (int col = 0; col < n_; ++col)
        if (c_(r, col) == 0.0 && star_in_row_[r] < 0 && star_in_col_[col] < 0) {
          star_in_row_[r] = col;
          star_in_col_[col] = r;
        }
    cover_starred_columns();

    while (covered_columns() < n_) {
      int r = -1, col = -1;
      if (!find_uncovered_zero(r, col)) {
        adjust();
        continue;
      }
      prime_in_row_[r] = col;
      if (star_in_row_[r] >= 0) {
        row_cov_[r] = true;
        col_cov_[star_in_row_[r]] = false;
      } else {
        augment(r, col);
      }
    }
    return star_in_row_;
  }

 private:
  void cover_starred_columns() {
    std::fill(col_cov_.begin(), col_cov_.end(), false);
    for (int col = 0; col < n_; ++col) col_cov_[col] = star_in_col_[col] >= 0;
  }

  int covered_columns() const {
    return static_cast<int>(std::count(col_cov_.begin(), col_cov_.end(), true));
  }

  bool find_uncovered_zero(int& r_out, int& c_out) const {
    for (int r = 0; r < n_; ++r) {
      if (row_cov_[r]) continue;
      for (int col = 0; col < n_; ++col)
        if (!col_cov_[col] && c_(r, col) == 0.0) {
          r_out = r;
          c_out = col;
          return true;
        }
    }
    return false;
  }

  // Alternating prime/star path starting from the primed zero (r, col).
  void augment(int r, int col) {
    std::vector<std::pair<int, int>> path{{r, col}};
    while (true) {
      const int star_r = star_in_col_[path.back().second];
      if (star_r < 0) break;
      path.emplace_back(star_r, path.back().second);
      path.emplace_back(star_r, prime_in_row_[star_r]);
    }
    for (std::size_t i = 1; i < path.size(); i += 2) {
      const auto [sr, sc] = path[i];
      star_in_row_[sr] = -1;
      star_in_col_[sc] = -1;
    }
    for (std::size_t i = 0; i < path.size(); i += 2) {
      const auto [pr, pc] = path[i];
      star_in_row_[pr] = pc;
      star_in_col_[pc] = pr;
    }
    std::fill(prime_in_row_.begin(), prime_in_row_.end(), -1);
    std::fill(row_cov_.begin(), row_cov_.end(), false);
    cover_starred_columns();
  }

  // Smallest uncovered value leaves uncovered rows and is added to covered columns.
  void adjust() {
    double delta = std::numeric_limits<double>::infinity();
    for (int r = 0; r < n_; ++r) {
      if (row_cov_[r]) continue;
      for (int col = 0; col < n_; ++col)
        if (!col_cov_[col]) delta = std::min(delta, c_(r, col));
    }
    for (int r = 0; r < n_; ++r)
      if (!row_cov_[r]) c_.row(r).array() -= delta;
    for (int col = 0; col < n_; ++col)
      if (col_cov_[col]) c_.col(col).array() += delta;
  }

  int n_;
  Eigen::MatrixXd c_;
  std::vector<int> star_in_row_, star_in_col_, prime_in_row_;
  std::vector<bool> row_cov_, col_cov_;
};

}  // namespace detail

/// Minimum-cost perfect matching; waveguide_of_user[r] is the column of row r.
inline Assignment hungarian_solve(const CostMatrix& c) {
  const Eigen::MatrixXd& e = c.entries;
  if (e.rows() != e.cols()) throw DimensionMismatch("hungarian_solve: cost matrix must be square");
  if (!e.allFinite()) throw InvalidArgument("hungarian_solve: non-finite cost");
  Assignment a;
  a.waveguide_of_user = detail::Munkres(e).solve();
  for (Eigen::Index r = 0; r < e.rows(); ++r) a.total_cost += e(r, a.waveguide_of_user[static_cast<std::size_t>(r)]);
  return a;
}

inline Assignment hungarian_solve(const Eigen::MatrixXd& cost) { return hungarian_solve(CostMatrix{cost, 0.0, 0.0}); }

/// Hungarian on the transformed weights; marks the result infeasible instead
/// of throwing when a blocked cell had to be used.
inline Assignment solve_assignment(const WeightMatrix& w) {
  Assignment a = hungarian_solve(weight_to_cost(w));
  a.feasible = true;
  for (std::size_t m = 0; m < a.waveguide_of_user.size(); ++m) {
    const double v = w.entries(static_cast<Eigen::Index>(m), a.waveguide_of_user[m]);
    if (std::isfinite(v)) {
      a.total_weight += v;
    } else {
      a.feasible = false;
    }
  }
  return a;
}

inline Assignment assign_waveguides(const Scenario& s, std::span<const double> placement) {
  const int k_count = s.num_waveguides(), m_count = s.num_users();
  if (k_count > m_count)
    throw UnsupportedCase(
        "assign_waveguides: K > M needs idle-waveguide activity patterns, for which the "
        "Hungarian assignment is not guaranteed optimal");
  if (k_count != m_count) throw DimensionMismatch("assign_waveguides: requires K == M");

  const WeightMatrix w = weight_matrix(s, placement);
  std::vector<int> bad_users, bad_waveguides;
  for (int m = 0; m < m_count; ++m)
    if (!w.entries.row(m).array().isFinite().any()) bad_users.push_back(m);
  for (int k = 0; k < k_count; ++k)
    if (!w.entries.col(k).array().isFinite().any()) bad_waveguides.push_back(k);
  if (!bad_users.empty() || !bad_waveguides.empty()) {
    std::string msg = "assign_waveguides: infeasible; blocked users [";
    for (std::size_t i = 0; i < bad_users.size(); ++i) msg += (i ? "," : "") + std::to_string(bad_users[i]);
    msg += "] waveguides [";
    for (std::size_t i = 0; i < bad_waveguides.size(); ++i)
      msg += (i ? "," : "") + std::to_string(bad_waveguides[i]);
    msg += "]";
    throw InfeasibleAssignment(msg, bad_users, bad_waveguides);
  }
  return solve_assignment(w);
}

}  // namespace pinchopt
