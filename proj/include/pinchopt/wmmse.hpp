#pragma once

// QoS-constrained sum-rate beamforming at fixed PA positions by weighted MMSE.
//
// Conventions: H is K x M with column h_m the channel of user m, P is K x M
// with column p_m the precoder of user m, and user m observes h_m^H p_i for
// stream i. QoS R_m >= R_t is enforced through e_m <= 2^-R_t with duals nu_m;
// the power budget through lambda.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "pinchopt/error.hpp"

namespace pinchopt {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline VectorXd sinr(const MatrixXcd& h, const MatrixXcd& p, double sigma2) {
  const MatrixXcd g = h.adjoint() * p;  // g(m, i) = h_m^H p_i
  VectorXd out(g.rows());
  for (Eigen::Index m = 0; m < g.rows(); ++m) {
    const double own = std::norm(g(m, m));
    const double other = g.row(m).squaredNorm() - own;
    out(m) = own / (std::max(other, 0.0) + sigma2);
  }
  return out;
}

inline VectorXd user_rates(const MatrixXcd& h, const MatrixXcd& p, double sigma2) {
  VectorXd s = sinr(h, p, sigma2);
  for (Eigen::Index m = 0; m < s.size(); ++m) s(m) = std::log2(1.0 + s(m));
  return s;
}

struct ReceiverUpdate {
  VectorXcd u;  // MMSE equalizers
  VectorXd e;   // MSEs
  VectorXd w;   // weights 1/e
};

inline ReceiverUpdate update_receivers(const MatrixXcd& h, const MatrixXcd& p, double sigma2) {
  if (h.rows() != p.rows() || h.cols() != p.cols()) throw DimensionMismatch("update_receivers: H and P differ in shape");
  const MatrixXcd g = h.adjoint() * p;
  const Eigen::Index m_count = g.rows();
  ReceiverUpdate r{VectorXcd(m_count), VectorXd(m_count), VectorXd(m_count)};
  for (Eigen::Index m = 0; m < m_count; ++m) {
    const double own = std::norm(g(m, m));
    double rest = sigma2;
    for (Eigen::Index i = 0; i < m_count; ++i)
      if (i != m) rest += std::norm(g(m, i));
    const double total = own + rest;
    if (!(total > 0.0)) throw InvalidArgument("update_receivers: no received power and no noise");
    r.u(m) = g(m, m) / total;
    // 1 - 2 Re{u* h^H p} + |u|^2 total, simplified for the MMSE u without cancellation.
    r.e(m) = rest / total;
    r.w(m) = 1.0 / r.e(m);
  }
  return r;
}

/// MSE of each stream for fixed equalizers u and precoder P.
inline VectorXd stream_mse(const MatrixXcd& h, const MatrixXcd& p, const VectorXcd& u, double sigma2) {
  const MatrixXcd g = h.adjoint() * p;
  VectorXd e(g.rows());
  for (Eigen::Index m = 0; m < g.rows(); ++m)
    e(m) = 1.0 - 2.0 * std::real(std::conj(u(m)) * g(m, m)) + std::norm(u(m)) * (g.row(m).squaredNorm() + sigma2);
  return e;
}

// (A + lambda I) P = B with A = H U (W+N) U^H H^H and B = H U (W+N), held in
// the eigenbasis of A so P(lambda) and ||P(lambda)||_F^2 are cheap for any lambda.
class PrimalSystem {
 public:
  PrimalSystem(const MatrixXcd& h, const VectorXcd& u, const VectorXd& w, const VectorXd& nu) {
    const VectorXd wn = w + nu;
    VectorXd a_diag(u.size());
    VectorXcd b_diag(u.size());
    for (Eigen::Index m = 0; m < u.size(); ++m) {
      a_diag(m) = wn(m) * std::norm(u(m));
      b_diag(m) = u(m) * wn(m);
    }
    a_ = h * a_diag.asDiagonal() * h.adjoint();
    b_ = h * b_diag.asDiagonal();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(a_);
    mu_ = es.eigenvalues().cwiseMax(0.0);
    v_ = es.eigenvectors();
    c_ = v_.adjoint() * b_;
    row_energy_ = c_.rowwise().squaredNorm();
  }

  const MatrixXcd& a() const { return a_; }
  const MatrixXcd& b() const { return b_; }
  double trace() const { return mu_.sum(); }
  double min_eigenvalue() const { return mu_.size() ? mu_.minCoeff() : 0.0; }

  // Components with a zero denominator and zero numerator are dropped.
  double power(double lambda) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < mu_.size(); ++i) {
      if (row_energy_(i) == 0.0) continue;
      const double d = mu_(i) + lambda;
      if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
      total += row_energy_(i) / (d * d);
    }
    return total;
  }

  MatrixXcd precoder(double lambda) const {
    VectorXd inv(mu_.size());
    for (Eigen::Index i = 0; i < mu_.size(); ++i) {
      const double d = mu_(i) + lambda;
      inv(i) = (d > 0.0 && row_energy_(i) > 0.0) ? 1.0 / d : 0.0;
    }
    return v_ * inv.asDiagonal() * c_;
  }

  // Smallest lambda >= 0 with ||P(lambda)||^2 <= budget; bisection ends on the feasible side.
  double power_lambda(double budget) const {
    const double total_energy = row_energy_.sum();
    if (total_energy == 0.0) return 0.0;
    if (power(0.0) <= budget) return 0.0;
    double lo = 0.0, hi = std::sqrt(total_energy / budget);
    while (power(hi) > budget) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (power(mid) > budget) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return hi;
  }

 private:
  MatrixXcd a_, b_, v_, c_;
  VectorXd mu_, row_energy_;
};

/// Stationary point of the P-Lagrangian for fixed u, w, nu, lambda. A singular
/// system at lambda = 0 gets a 1e-12 trace(A)/K ridge.
inline MatrixXcd primal_update(const MatrixXcd& h, const VectorXcd& u, const VectorXd& w, const VectorXd& nu,
                               double lambda) {
  const PrimalSystem sys(h, u, w, nu);
  double reg = lambda;
  const double scale = sys.trace() / std::max<Eigen::Index>(h.rows(), 1);
  if (sys.min_eigenvalue() + reg <= 1e-14 * scale) reg += 1e-12 * scale;
  return sys.precoder(reg);
}

enum class DualMode { gradient, bisection };

inline const char* to_string(DualMode m) { return m == DualMode::gradient ? "gradient" : "bisection"; }

struct WmmseConfig {
  int max_iterations = 500;
  double tolerance = 1e-6;  // on |change of sum rate| per outer iteration
  double tau_lambda = 0.0;  // 0 selects 0.1 / P_t
  double rho_nu = 0.5;
  DualMode mode = DualMode::bisection;
  bool qos_duals = true;
  double target_rate = 0.5;
  double nu_divergence = 1e6;
};

struct WmmseState {
  MatrixXcd p;
  VectorXcd u;
  VectorXd e;
  VectorXd w;
  double lambda = 0.0;
  VectorXd nu;
  VectorXd delta;  // 2^-R_t per user
};

struct DualUpdate {
  double lambda = 0.0;
  VectorXd nu;
};

/// Projected dual ascent. `mse` are the stream MSEs at the current (u, P).
inline DualUpdate dual_update(const WmmseState& st, const VectorXd& mse, double total_power, double tau,
                              double rho) {
  DualUpdate d;
  d.lambda = std::max(0.0, st.lambda + tau * (st.p.squaredNorm() - total_power));
  d.nu = (st.nu.array() + rho * (mse - st.delta).array()).cwiseMax(0.0);
  return d;
}

/// Bisection variant: lambda meets the power budget with equality when it binds.
inline double bisection_lambda(const MatrixXcd& h, const WmmseState& st, double total_power) {
  return PrimalSystem(h, st.u, st.w, st.nu).power_lambda(total_power);
}

inline MatrixXcd matched_filter_init(const MatrixXcd& h, double total_power) {
  MatrixXcd p = MatrixXcd::Zero(h.rows(), h.cols());
  const double per_user = std::sqrt(total_power / std::max<Eigen::Index>(h.cols(), 1));
  for (Eigen::Index m = 0; m < h.cols(); ++m) {
    const double n = h.col(m).norm();
    if (n > 0.0) p.col(m) = h.col(m) * (per_user / n);
  }
  return p;
}

struct WmmseResult {
  MatrixXcd p;
  VectorXd rates;
  double sum_rate = 0.0;
  double lambda = 0.0;
  VectorXd nu;
  std::vector<double> trace;  // sum rate after initialization and after each iteration
  int iterations = 0;
  bool converged = false;
  bool qos_feasible = false;
  std::vector<int> qos_infeasible_users;  // zero channel or diverging dual
};

inline WmmseResult wmmse_solve(const MatrixXcd& h, double sigma2, double total_power, const WmmseConfig& cfg) {
  if (!(sigma2 > 0.0)) throw InvalidArgument("wmmse_solve: noise power must be positive");
  if (!(total_power > 0.0)) throw InvalidArgument("wmmse_solve: power budget must be positive");
  const Eigen::Index m_count = h.cols();
  const double tau = cfg.tau_lambda > 0.0 ? cfg.tau_lambda : 0.1 / total_power;

  WmmseState st;
  st.p = matched_filter_init(h, total_power);
  st.nu = VectorXd::Zero(m_count);
  st.delta = VectorXd::Constant(m_count, std::exp2(-cfg.target_rate));

  std::vector<bool> frozen(static_cast<std::size_t>(m_count), false);
  std::vector<bool> flagged(static_cast<std::size_t>(m_count), false);
  for (Eigen::Index m = 0; m < m_count; ++m)
    if (h.col(m).squaredNorm() == 0.0) {
      frozen[static_cast<std::size_t>(m)] = true;
      flagged[static_cast<std::size_t>(m)] = cfg.target_rate > 0.0;
    }

  WmmseResult res;
  double prev = user_rates(h, st.p, sigma2).sum();
  res.trace.push_back(prev);
  for (int t = 1; t <= cfg.max_iterations; ++t) {
    const ReceiverUpdate rec = update_receivers(h, st.p, sigma2);
    st.u = rec.u;
    st.e = rec.e;
    st.w = rec.w;
    if (cfg.mode == DualMode::bisection) {
      st.lambda = bisection_lambda(h, st, total_power);
      st.p = PrimalSystem(h, st.u, st.w, st.nu).precoder(st.lambda);
    } else {
      st.p = primal_update(h, st.u, st.w, st.nu, st.lambda);
    }
    const VectorXd mse = stream_mse(h, st.p, st.u, sigma2);
    const DualUpdate d = dual_update(st, mse, total_power, tau, cfg.rho_nu);
    if (cfg.mode == DualMode::gradient) st.lambda = d.lambda;
    if (cfg.qos_duals) {
      for (Eigen::Index m = 0; m < m_count; ++m) {
        if (frozen[static_cast<std::size_t>(m)]) continue;
        st.nu(m) = d.nu(m);
        if (st.nu(m) > cfg.nu_divergence && mse(m) > st.delta(m)) flagged[static_cast<std::size_t>(m)] = true;
      }
    }
    const double now = user_rates(h, st.p, sigma2).sum();
    res.trace.push_back(now);
    res.iterations = t;
    if (std::abs(now - prev) < cfg.tolerance) {
      res.converged = true;
      break;
    }
    prev = now;
  }

  const double used = st.p.squaredNorm();
  if (used > total_power) st.p *= std::sqrt(total_power / used);

  res.p = st.p;
  res.rates = user_rates(h, st.p, sigma2);
  res.sum_rate = res.rates.sum();
  res.lambda = st.lambda;
  res.nu = st.nu;
  for (Eigen::Index m = 0; m < m_count; ++m)
    if (flagged[static_cast<std::size_t>(m)]) res.qos_infeasible_users.push_back(static_cast<int>(m));
  res.qos_feasible = res.qos_infeasible_users.empty() && (res.rates.array() >= cfg.target_rate).all();
  return res;
}

}  // namespace pinchopt
