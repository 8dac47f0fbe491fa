#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "pinchopt/rng.hpp"
#include "pinchopt/wmmse.hpp"

using namespace pinchopt;
using cd = std::complex<double>;

namespace {

MatrixXcd random_channel(Rng& rng, int k, int m, double scale = 1e-4) {
  MatrixXcd h(k, m);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = scale * cd(rng.normal(), rng.normal());
  return h;
}

}  // namespace

TEST(Wmmse, ReceiverAtUnitSinr) {
  MatrixXcd h(1, 1), p(1, 1);
  h << cd(1.0, 0.0);
  p << cd(0.0, 1.0);
  const ReceiverUpdate r = update_receivers(h, p, 1.0);
  EXPECT_NEAR(r.e(0), 0.5, 1e-15);
  EXPECT_NEAR(r.w(0), 2.0, 1e-15);
}

TEST(Wmmse, ReceiverWithoutSignal) {
  Rng rng(1);
  const MatrixXcd h = random_channel(rng, 3, 3);
  const ReceiverUpdate r = update_receivers(h, MatrixXcd::Zero(3, 3), 1e-15);
  EXPECT_EQ(r.u.norm(), 0.0);
  for (int m = 0; m < 3; ++m) {
    EXPECT_EQ(r.e(m), 1.0);
    EXPECT_EQ(r.w(m), 1.0);
  }
}

TEST(Wmmse, MseMatchesSinrIdentity) {
  Rng rng(2);
  for (int rep = 0; rep < 10000; ++rep) {
    const int k = 1 + static_cast<int>(rng.below(5)), m = 1 + static_cast<int>(rng.below(5));
    const MatrixXcd h = random_channel(rng, k, m, 1.0), p = random_channel(rng, k, m, 1.0);
    const double sigma2 = rng.uniform(0.01, 2.0);
    const ReceiverUpdate r = update_receivers(h, p, sigma2);
    const VectorXd s = sinr(h, p, sigma2);
    const VectorXd literal = stream_mse(h, p, r.u, sigma2);
    for (int i = 0; i < m; ++i) {
      ASSERT_NEAR(r.e(i), 1.0 / (1.0 + s(i)), 1e-12);
      ASSERT_NEAR(literal(i), 1.0 / (1.0 + s(i)), 1e-12);
    }
  }
}

TEST(Wmmse, ScalarPrimalClosedForm) {
  MatrixXcd h(1, 1);
  h << cd(3e-4, -1e-4);
  VectorXcd u(1);
  u << cd(0.2, 0.7);
  VectorXd w(1), nu = VectorXd::Zero(1);
  w << 4.0;
  const double lambda = 1e-7;
  const MatrixXcd p = primal_update(h, u, w, nu, lambda);
  const cd expect = u(0) * w(0) * h(0, 0) / (std::norm(u(0)) * w(0) * std::norm(h(0, 0)) + lambda);
  EXPECT_NEAR(std::abs(p(0, 0) - expect), 0.0, 1e-12 * std::abs(expect));

  WmmseState st;
  st.u = u;
  st.w = w;
  st.nu = nu;
  const double lam = bisection_lambda(h, st, 2.0);
  EXPECT_NEAR(PrimalSystem(h, u, w, nu).precoder(lam).squaredNorm(), 2.0, 1e-8 * 2.0);
}

TEST(Wmmse, ZeroChannelZeroPrecoder) {
  VectorXcd u = VectorXcd::Ones(3);
  const MatrixXcd p = primal_update(MatrixXcd::Zero(3, 3), u, VectorXd::Ones(3), VectorXd::Zero(3), 0.0);
  EXPECT_EQ(p.norm(), 0.0);
}

TEST(Wmmse, StationarityResidual) {
  Rng rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 2 + static_cast<int>(rng.below(4));
    const MatrixXcd h = random_channel(rng, k, k);
    VectorXcd u(k);
    VectorXd w(k), nu(k);
    for (int i = 0; i < k; ++i) {
      u(i) = cd(rng.normal(), rng.normal()) * 1e3;
      w(i) = rng.uniform(1.0, 10.0);
      nu(i) = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 2.0);
    }
    const double lambda = rng.uniform(0.0, 1.0);
    const PrimalSystem sys(h, u, w, nu);
    const MatrixXcd p = primal_update(h, u, w, nu, lambda);
    const MatrixXcd lhs = (sys.a() + lambda * MatrixXcd::Identity(k, k)) * p;
    EXPECT_LE((lhs - sys.b()).norm(), 1e-8 * sys.b().norm());
  }
}

TEST(Wmmse, DualUpdate) {
  WmmseState st;
  st.p = MatrixXcd::Identity(2, 2);  // ||P||^2 = 2
  st.lambda = 0.3;
  st.nu = VectorXd::Constant(2, 0.7);
  st.delta = VectorXd::Constant(2, std::exp2(-0.5));
  const DualUpdate same = dual_update(st, st.delta, 2.0, 0.05, 0.5);
  EXPECT_EQ(same.lambda, 0.3);
  EXPECT_EQ(same.nu, st.nu);

  st.lambda = 0.0;
  EXPECT_EQ(dual_update(st, st.delta, 5.0, 0.05, 0.5).lambda, 0.0);
  const DualUpdate up = dual_update(st, st.delta + VectorXd::Constant(2, 0.1), 5.0, 0.05, 0.5);
  EXPECT_NEAR(up.nu(0), 0.75, 1e-15);
  const DualUpdate down = dual_update(st, VectorXd::Zero(2), 5.0, 0.05, 10.0);
  EXPECT_EQ(down.nu(0), 0.0);
}

TEST(Wmmse, BisectionHitsBudget) {
  Rng rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 2 + static_cast<int>(rng.below(4));
    const MatrixXcd h = random_channel(rng, k, k);
    const ReceiverUpdate r = update_receivers(h, matched_filter_init(h, 1.0), 1e-15);
    const PrimalSystem sys(h, r.u, r.w, VectorXd::Zero(k));
    const double budget = rng.uniform(0.1, 10.0);
    const double lam = sys.power_lambda(budget);
    if (lam > 0.0) {
      EXPECT_NEAR(sys.power(lam), budget, 1e-8 * budget);
      // Monotone scan: power is non-increasing in lambda.
      double prev = sys.power(0.5 * lam);
      for (double f : {0.75, 1.0, 1.5, 2.0, 4.0}) {
        const double now = sys.power(f * lam);
        EXPECT_LE(now, prev * (1 + 1e-12));
        prev = now;
      }
    } else {
      EXPECT_LE(sys.power(0.0), budget);
    }
  }
}

TEST(Wmmse, SingleUserCapacity) {
  MatrixXcd h(1, 1);
  h << cd(2e-4, 1e-4);
  const double pt = 1.0, sigma2 = 1e-15;
  const WmmseResult r = wmmse_solve(h, sigma2, pt, WmmseConfig{});
  EXPECT_NEAR(r.p.squaredNorm(), pt, 1e-9);
  EXPECT_NEAR(r.sum_rate, std::log2(1 + pt * std::norm(h(0, 0)) / sigma2), 1e-9);
}

TEST(Wmmse, OrthogonalChannelsDecouple) {
  MatrixXcd h = MatrixXcd::Zero(2, 2);
  h(0, 0) = cd(3e-4, 0);
  h(1, 1) = cd(0, 3e-4);
  const double pt = 1.0, sigma2 = 1e-12;
  const WmmseResult r = wmmse_solve(h, sigma2, pt, WmmseConfig{});
  const double single = std::log2(1 + 0.5 * pt * 9e-8 / sigma2);
  EXPECT_NEAR(r.rates(0), single, 1e-6);
  EXPECT_NEAR(r.rates(1), single, 1e-6);
}

TEST(Wmmse, MonotoneWithoutQosDuals) {
  Rng rng(5);
  WmmseConfig cfg;
  cfg.qos_duals = false;
  for (int rep = 0; rep < 50; ++rep) {
    const MatrixXcd h = random_channel(rng, 4, 4);
    const WmmseResult r = wmmse_solve(h, 1e-15, 1.0, cfg);
    for (std::size_t t = 1; t < r.trace.size(); ++t) EXPECT_GE(r.trace[t], r.trace[t - 1] - 1e-9);
    EXPECT_LE(r.p.squaredNorm(), 1.0 * (1 + 1e-6));
  }
}

TEST(Wmmse, PhaseCovariance) {
  Rng rng(6);
  const MatrixXcd h = random_channel(rng, 3, 3);
  MatrixXcd rotated = h;
  for (int m = 0; m < 3; ++m) rotated.col(m) *= std::polar(1.0, rng.uniform(0, 6.28));
  const WmmseResult a = wmmse_solve(h, 1e-15, 1.0, WmmseConfig{});
  const WmmseResult b = wmmse_solve(rotated, 1e-15, 1.0, WmmseConfig{});
  for (int m = 0; m < 3; ++m) EXPECT_NEAR(a.rates(m), b.rates(m), 1e-6 * std::max(1.0, a.rates(m)));
}

TEST(Wmmse, BlockedUserFlagged) {
  Rng rng(7);
  MatrixXcd h = random_channel(rng, 3, 3);
  h.col(1).setZero();
  const WmmseResult r = wmmse_solve(h, 1e-15, 1.0, WmmseConfig{});
  EXPECT_EQ(r.rates(1), 0.0);
  EXPECT_LE(r.p.col(1).squaredNorm(), 1e-20);
  EXPECT_FALSE(r.qos_feasible);
  EXPECT_EQ(r.qos_infeasible_users, std::vector<int>{1});
  EXPECT_EQ(r.nu(1), 0.0);
}

TEST(Wmmse, GradientModeRespectsBudget) {
  Rng rng(8);
  WmmseConfig cfg;
  cfg.mode = DualMode::gradient;
  for (int rep = 0; rep < 20; ++rep) {
    const WmmseResult r = wmmse_solve(random_channel(rng, 4, 4), 1e-15, 1.0, cfg);
    EXPECT_LE(r.p.squaredNorm(), 1.0 * (1 + 1e-6));
    EXPECT_TRUE((r.nu.array() >= 0.0).all());
    EXPECT_GE(r.lambda, 0.0);
    if (r.qos_feasible) {
      EXPECT_GE(r.rates.minCoeff(), 0.5);
    }
  }
}

TEST(Wmmse, RejectsBadInputs) {
  const MatrixXcd h = MatrixXcd::Identity(2, 2);
  EXPECT_THROW(wmmse_solve(h, 0.0, 1.0, WmmseConfig{}), InvalidArgument);
  EXPECT_THROW(wmmse_solve(h, 1.0, 0.0, WmmseConfig{}), InvalidArgument);
  EXPECT_THROW(update_receivers(h, MatrixXcd::Zero(3, 2), 1.0), DimensionMismatch);
}
