#include "balnet/limit.hpp"

#include <cmath>

#include <Eigen/LU>

namespace balnet {

double covariance_at(double k0, double tau, double sigma, double t) {
  const double k_star = tau * sigma * sigma / 2.0;
  return k_star + (k0 - k_star) * std::exp(-2.0 * t / tau);
}

const char* to_string(TerminationReason r) {
  return r == TerminationReason::DetJZero ? "DetJZero" : "Unstable";
}

std::pair<double, double> covariances_at(const BalanceSystem& system, double k_e0, double k_i0, double t) {
  const auto& dyn = system.model().dynamics;
  return {covariance_at(k_e0, dyn.drift_e.tau(), dyn.noise_e.sigma(), t),
          covariance_at(k_i0, dyn.drift_i.tau(), dyn.noise_i.sigma(), t)};
}

Eigen::VectorXd rk4_predict(const BalanceSystem& system, const MomentState& state, double k_e0, double k_i0,
                            double dt, const BalanceOptions& options) {
  auto rhs = [&](double t, const Eigen::VectorXd& v) {
    const auto [ke, ki] = covariances_at(system, k_e0, k_i0, t);
    return system.mean_rhs_unchecked(MomentState{v, ke, ki, t}, options);
  };
  const double t = state.t;
  const Eigen::VectorXd k1 = rhs(t, state.v);
  const Eigen::VectorXd k2 = rhs(t + dt / 2, state.v + dt / 2 * k1);
  const Eigen::VectorXd k3 = rhs(t + dt / 2, state.v + dt / 2 * k2);
  const Eigen::VectorXd k4 = rhs(t + dt, state.v + dt * k3);
  return state.v + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

LimitTrajectory integrate_limit(const BalanceSystem& system, const Eigen::Ref<const Eigen::VectorXd>& v0, double k_e0,
                                double k_i0, const LimitOptions& options) {
  if (!(options.dt > 0.0) || !(options.horizon >= options.dt)) {
    throw ValidationError("limit integration needs dt > 0 and T >= dt");
  }
  if (v0.size() != system.dimension()) throw DimensionMismatch("initial mean vector has the wrong length");

  MomentState state{v0, k_e0, k_i0, 0.0};
  BalanceReport rep = system.report(state);
  if (!(rep.residual_norm() < 1e-8)) {
    throw InvalidInitialState("initial means are not balanced (|G| = " + std::to_string(rep.residual_norm()) + ")");
  }
  if (!(rep.stability_margin < -options.balance.stability_tolerance)) {
    throw InvalidInitialState("initial balanced state is not stable (margin " +
                              std::to_string(rep.stability_margin) + ")");
  }

  LimitTrajectory traj;
  auto record = [&](const MomentState& s, const BalanceReport& r) {
    traj.times.push_back(s.t);
    traj.states.push_back(s);
    traj.residual_norms.push_back(r.residual_norm());
    traj.stability_margins.push_back(r.stability_margin);
  };
  record(state, rep);

  const auto steps = static_cast<long>(std::ceil(options.horizon / options.dt - 1e-9));
  for (long k = 1; k <= steps; ++k) {
    const double t_next = static_cast<double>(k) * options.dt;
    const auto [ke, ki] = covariances_at(system, k_e0, k_i0, t_next);
    try {
      MomentState probe = state;
      const Eigen::VectorXd predicted = rk4_predict(system, probe, k_e0, k_i0, t_next - state.t, options.balance);
      BalanceSolution sol = system.solve(ke, ki, predicted, options.balance);
      if (std::abs(sol.report.jacobian.determinant()) < options.balance.det_threshold) {
        traj.terminated = Termination{t_next, TerminationReason::DetJZero, "balance Jacobian became singular"};
        break;
      }
      state = MomentState{sol.v, ke, ki, t_next};
      record(state, sol.report);
    } catch (const SingularJacobian& e) {
      traj.terminated = Termination{state.t, TerminationReason::DetJZero, e.what()};
      break;
    } catch (const UnstableRoot& e) {
      traj.terminated = Termination{t_next, TerminationReason::Unstable, e.what()};
      break;
    } catch (const NoConvergence& e) {
      traj.terminated = Termination{t_next, TerminationReason::DetJZero, e.what()};
      break;
    }
  }
  return traj;
}

}  // namespace balnet
