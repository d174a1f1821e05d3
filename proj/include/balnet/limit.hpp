#pragma once

// Deterministic kinetic limit: exact covariance relaxation plus the
// constrained mean dynamics, integrated as RK4 predictor + Newton corrector.

#include <optional>
#include <string>
#include <vector>

#include "balnet/balance.hpp"

namespace balnet {

/// K* + (K0 − K*) e^{−2t/τ}, K* = τΣ²/2.
double covariance_at(double k0, double tau, double sigma, double t);

enum class TerminationReason { DetJZero, Unstable };

const char* to_string(TerminationReason r);

struct Termination {
  double time = 0.0;
  TerminationReason reason = TerminationReason::Unstable;
  std::string detail;
};

struct LimitTrajectory {
  std::vector<double> times;
  std::vector<MomentState> states;
  std::vector<double> residual_norms;
  std::vector<double> stability_margins;
  std::optional<Termination> terminated;

  std::size_t size() const { return times.size(); }
};

struct LimitOptions {
  double dt = 1e-3;
  double horizon = 5.0;
  BalanceOptions balance;
};

/// Covariances at time t from the initial pair (K_e0, K_i0).
std::pair<double, double> covariances_at(const BalanceSystem& system, double k_e0, double k_i0, double t);

/// One classical RK4 step of v' = −J⁻¹H along the exact covariance flow,
/// without re-projection.
Eigen::VectorXd rk4_predict(const BalanceSystem& system, const MomentState& state, double k_e0, double k_i0,
                            double dt, const BalanceOptions& options = {});

/// Requires |G(v0, K0)|∞ < 1e-8 and a strictly stable Jacobian at t = 0
/// (InvalidInitialState otherwise). Loss of invertibility or stability ends
/// the trajectory early and is recorded in `terminated`.
LimitTrajectory integrate_limit(const BalanceSystem& system, const Eigen::Ref<const Eigen::VectorXd>& v0, double k_e0,
                                double k_i0, const LimitOptions& options = {});

}  // namespace balnet
