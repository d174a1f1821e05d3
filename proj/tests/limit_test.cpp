#include <gtest/gtest.h>

#include <cmath>

#include "balnet/limit.hpp"
#include "support.hpp"

using namespace balnet;
using balnet::test::preset_model;

TEST(CovarianceFlow, ClosedFormSolvesTheLinearOde) {
  const double k0 = 2.0, tau = 0.7, sigma = 1.3;
  EXPECT_DOUBLE_EQ(covariance_at(k0, tau, sigma, 0.0), k0);
  EXPECT_NEAR(covariance_at(k0, tau, sigma, 50.0), tau * sigma * sigma / 2, 1e-15);
  const double h = 1e-6;
  for (double t : {0.0, 0.2, 1.5}) {
    const double k = covariance_at(k0, tau, sigma, t);
    const double fd = (covariance_at(k0, tau, sigma, t + h) - covariance_at(k0, tau, sigma, t - h)) / (2 * h);
    EXPECT_NEAR(fd, -2 * k / tau + sigma * sigma, 1e-8);
  }
  // Steady start stays put.
  EXPECT_DOUBLE_EQ(covariance_at(0.5, 1.0, 1.0, 3.0), 0.5);
}

TEST(LimitTrajectory, LinearGainsStayAtTheRoot) {
  const BalanceSystem sys(preset_model("test1"));
  LimitOptions opts;
  opts.dt = 1e-2;
  opts.horizon = 5.0;
  const auto traj = integrate_limit(sys, Eigen::Vector2d(0.5, 1.0), 0.5, 0.5, opts);
  ASSERT_FALSE(traj.terminated);
  ASSERT_EQ(traj.size(), 501u);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    EXPECT_NEAR(traj.states[k].v(0), 0.5, 1e-12);
    EXPECT_NEAR(traj.states[k].v(1), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(traj.states[k].k_e, 0.5);
    EXPECT_NEAR(traj.stability_margins[k], -0.25, 1e-10);
  }
  EXPECT_NEAR(traj.times.back(), 5.0, 1e-12);
}

TEST(LimitTrajectory, TracksPerTimeRootsOnTheManifold) {
  const BalanceSystem sys(preset_model("test2"));
  const auto root = sys.solve(1.0, 2.0, Eigen::Vector2d::Zero());
  LimitOptions opts;
  opts.dt = 1e-2;
  opts.horizon = 2.0;
  const auto traj = integrate_limit(sys, root.v, 1.0, 2.0, opts);
  ASSERT_FALSE(traj.terminated);
  for (std::size_t k = 0; k < traj.size(); k += 10) {
    const auto& s = traj.states[k];
    EXPECT_LT(traj.residual_norms[k], 1e-9);
    const auto independent = sys.solve(s.k_e, s.k_i, Eigen::Vector2d::Zero());
    EXPECT_LT((independent.v - s.v).cwiseAbs().maxCoeff(), 1e-7) << "t = " << s.t;
  }
  // Variances relax towards τσ²/2 = 0.5 and the means move with them.
  EXPECT_LT(traj.states.back().k_i, 2.0);
  EXPECT_GT(std::abs(traj.states.back().v(1) - root.v(1)), 1e-3);
}

TEST(LimitTrajectory, PredictorAloneIsAccurateToFourthOrder) {
  const BalanceSystem sys(preset_model("test2"));
  const auto root = sys.solve(1.0, 2.0, Eigen::Vector2d::Zero());
  auto error_for = [&](double dt) {
    const MomentState s{root.v, 1.0, 2.0, 0.0};
    const Eigen::VectorXd predicted = rk4_predict(sys, s, 1.0, 2.0, dt);
    const auto [ke, ki] = covariances_at(sys, 1.0, 2.0, dt);
    BalanceOptions tight;
    tight.tolerance = 1e-14;
    const auto exact = sys.solve(ke, ki, predicted, tight);
    return (predicted - exact.v).cwiseAbs().maxCoeff();
  };
  const double e1 = error_for(0.1), e2 = error_for(0.05);
  EXPECT_GT(e1 / e2, 16.0);  // local error O(dt⁵)
}

TEST(LimitTrajectory, StepSizeDoesNotChangeTheManifoldPath) {
  const BalanceSystem sys(preset_model("test2"));
  const auto root = sys.solve(1.0, 2.0, Eigen::Vector2d::Zero());
  LimitOptions coarse, fine;
  coarse.dt = 2e-2;
  fine.dt = 1e-2;
  coarse.horizon = fine.horizon = 1.0;
  const auto a = integrate_limit(sys, root.v, 1.0, 2.0, coarse);
  const auto b = integrate_limit(sys, root.v, 1.0, 2.0, fine);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_LT((a.states[k].v - b.states[2 * k].v).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(LimitTrajectory, RejectsUnbalancedOrUnstableStart) {
  const BalanceSystem sys(preset_model("test2"));
  EXPECT_THROW(integrate_limit(sys, Eigen::Vector2d(0.3, 0.3), 1.0, 2.0), InvalidInitialState);
  const BalanceSystem ring(preset_model("test3"));
  EXPECT_THROW(integrate_limit(ring, Eigen::VectorXd::Zero(6), 0.0625, 0.0625), InvalidInitialState);
}

TEST(LimitTrajectory, LostStabilityEndsTheTrajectory) {
  // Self-excitation that the inhibitory loop only outweighs while the
  // excitatory variance is large; as it relaxes the E slope steepens and the
  // trivial root loses stability.
  Model m = preset_model("test2");
  m.gains[index_of(Pair::EE)] = GainSpec::tanh(1.0);
  m.dynamics.noise_e = NoiseSpec::additive(0.1);
  m.dynamics.noise_i = NoiseSpec::additive(0.3);
  const BalanceSystem sys(m);
  const double ke0 = 4.0, ki0 = 0.045;
  const auto root = sys.solve(ke0, ki0, Eigen::Vector2d::Zero());
  ASSERT_LT(root.report.stability_margin, 0.0);
  LimitOptions opts;
  opts.dt = 1e-2;
  opts.horizon = 5.0;
  const auto traj = integrate_limit(sys, root.v, ke0, ki0, opts);
  ASSERT_TRUE(traj.terminated.has_value());
  EXPECT_EQ(traj.terminated->reason, TerminationReason::Unstable);
  EXPECT_LT(traj.terminated->time, 5.0);
  EXPECT_LT(traj.stability_margins.back(), 0.0);
}
