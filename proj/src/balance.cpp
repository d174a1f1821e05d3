#include "balnet/balance.hpp"

#include <cmath>
#include <iostream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

namespace balnet {

double stability_margin(const Eigen::Ref<const Eigen::MatrixXd>& jacobian) {
  if (jacobian.rows() != jacobian.cols()) throw DimensionMismatch("stability margin needs a square matrix");
  if (!jacobian.allFinite()) throw EigenFailure("matrix has non-finite entries");
  if (jacobian.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(jacobian, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw EigenFailure("eigenvalue iteration did not converge");
  return solver.eigenvalues().real().maxCoeff();
}

BalanceSystem::BalanceSystem(Model model, const GaussHermiteRule<double>& rule, int spatial_points)
    : model_(std::move(model)), rule_(&rule) {
  model_.validate();
  for (auto p : {Population::E, Population::I}) {
    if (!model_.dynamics.drift(p).is_linear_decay()) {
      throw UnsupportedDynamics("limit solver requires linear-decay intrinsic dynamics");
    }
    if (!model_.dynamics.noise(p).is_additive()) {
      throw UnsupportedDynamics("limit solver requires additive noise");
    }
  }
  spatial_ = model_.basis.quadrature(spatial_points);
  const int nodes = static_cast<int>(spatial_.nodes.size());
  spatial_basis_.resize(nodes, model_.rank());
  for (int k = 0; k < nodes; ++k) spatial_basis_.row(k) = model_.basis.eval(spatial_.nodes(k)).transpose();
  gram_ = model_.basis.gram();
}

double BalanceSystem::covariance_rate(Population p, double k) const {
  const double tau = model_.dynamics.drift(p).tau();
  const double sigma = model_.dynamics.noise(p).sigma();
  return -2.0 * k / tau + sigma * sigma;
}

void BalanceSystem::check_state(const MomentState& state) const {
  if (state.v.size() != dimension()) {
    throw DimensionMismatch("mean vector has length " + std::to_string(state.v.size()) + ", expected " +
                            std::to_string(dimension()));
  }
  if (!(state.k_e > kMinVariance) || !(state.k_i > kMinVariance)) {
    throw NonPositiveVariance("fluctuation variances must be positive");
  }
}

BalanceSystem::PairMoments BalanceSystem::pair_moments(Pair p, const MomentState& state, int need) const {
  const int m = model_.rank();
  const int nodes = static_cast<int>(spatial_.nodes.size());
  const Population src = source_of(p);
  const GainSpec& gain = model_.gain(p);
  const double var = state.variance(src);

  PairMoments out;
  out.value = Eigen::VectorXd::Zero(nodes);
  out.slope = Eigen::VectorXd::Zero(nodes);
  out.var_score = Eigen::VectorXd::Zero(nodes);
  if (gain.is_zero()) return out;
  if (gain.kind() == GainSpec::Kind::Constant) {
    out.value.setConstant(gain.amplitude());
    return out;
  }

  const Eigen::VectorXd means = spatial_basis_ * state.v.segment(index_of(src) * m, m);
  const auto& u = rule_->nodes();
  const auto& w = rule_->weights();
  const double s = std::sqrt(2.0 * var);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  for (int k = 0; k < nodes; ++k) {
    double e0 = 0.0, e1 = 0.0, e2 = 0.0;
    for (int q = 0; q < rule_->order(); ++q) {
      const double y = means(k) + s * u(q);
      if (need & (kValue | kVarScore)) {
        const double g = gain.value(y);
        e0 += w(q) * g;
        e2 += w(q) * (2.0 * u(q) * u(q) - 1.0) * g;
      }
      if (need & kSlope) e1 += w(q) * gain.d1(y);
    }
    out.value(k) = e0 * inv_sqrt_pi;
    out.slope(k) = e1 * inv_sqrt_pi;
    out.var_score(k) = e2 * inv_sqrt_pi / (2.0 * var);
  }
  return out;
}

Eigen::VectorXd BalanceSystem::residual(const MomentState& state) const {
  check_state(state);
  const int m = model_.rank();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * m);
  for (Pair p : kAllPairs) {
    const auto mom = pair_moments(p, state, kValue);
    const Eigen::VectorXd projected = spatial_basis_.transpose() * spatial_.weights.cwiseProduct(mom.value);
    r.segment(index_of(target_of(p)) * m, m) +=
        source_sign(p) * gram_ * model_.kernel.coeffs(p) * projected;
  }
  return r;
}

Eigen::MatrixXd BalanceSystem::jacobian(const MomentState& state) const {
  check_state(state);
  const int m = model_.rank();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (Pair p : kAllPairs) {
    const auto mom = pair_moments(p, state, kSlope);
    const Eigen::MatrixXd projected =
        spatial_basis_.transpose() * spatial_.weights.cwiseProduct(mom.slope).asDiagonal() * spatial_basis_;
    jac.block(index_of(target_of(p)) * m, index_of(source_of(p)) * m, m, m) =
        source_sign(p) * gram_ * model_.kernel.coeffs(p) * projected;
  }
  return jac;
}

Eigen::VectorXd BalanceSystem::variance_drive(const MomentState& state) const {
  check_state(state);
  const int m = model_.rank();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(2 * m);
  for (Pair p : kAllPairs) {
    const double rate = covariance_rate(source_of(p), state.variance(source_of(p)));
    if (rate == 0.0) continue;
    const auto mom = pair_moments(p, state, kVarScore);
    const Eigen::VectorXd projected = spatial_basis_.transpose() * spatial_.weights.cwiseProduct(mom.var_score);
    h.segment(index_of(target_of(p)) * m, m) += source_sign(p) * rate * gram_ * model_.kernel.coeffs(p) * projected;
  }
  return h;
}

Eigen::VectorXd BalanceSystem::mean_rhs_unchecked(const MomentState& state, const BalanceOptions& options) const {
  const Eigen::MatrixXd jac = jacobian(state);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
  const double det = lu.determinant();
  if (!(std::abs(det) >= options.det_threshold)) {
    throw SingularJacobian("balance Jacobian is singular (|det J| = " + std::to_string(std::abs(det)) + ")");
  }
  return -lu.solve(variance_drive(state));
}

Eigen::VectorXd BalanceSystem::mean_rhs(const MomentState& state, const BalanceOptions& options) const {
  const double res = residual(state).lpNorm<Eigen::Infinity>();
  if (res > 1e-6) {
    std::clog << "balnet: warning: mean velocity evaluated off the balanced manifold (|G| = " << res << ")\n";
  }
  return mean_rhs_unchecked(state, options);
}

BalanceReport BalanceSystem::report(const MomentState& state) const {
  BalanceReport rep;
  rep.residual = residual(state);
  rep.jacobian = jacobian(state);
  rep.stability_margin = stability_margin(rep.jacobian);
  return rep;
}

BalanceSolution BalanceSystem::solve(double k_e, double k_i, const Eigen::Ref<const Eigen::VectorXd>& guess,
                                     const BalanceOptions& options) const {
  MomentState state{guess, k_e, k_i, 0.0};
  check_state(state);

  auto fail = [&](const std::string& why, int iterations) {
    BalanceReport rep;
    rep.residual = residual(state);
    rep.jacobian = jacobian(state);
    try {
      rep.stability_margin = stability_margin(rep.jacobian);
    } catch (const EigenFailure&) {
      rep.stability_margin = std::numeric_limits<double>::quiet_NaN();
    }
    rep.iterations = iterations;
    throw NoConvergence("balance solve: " + why, std::move(rep));
  };

  Eigen::VectorXd r = residual(state);
  int iterations = 0;
  while (!(r.lpNorm<Eigen::Infinity>() < options.tolerance)) {
    if (!r.allFinite()) fail("residual is not finite", iterations);
    if (iterations >= options.max_iterations) fail("iteration limit reached", iterations);
    ++iterations;

    const Eigen::MatrixXd jac = jacobian(state);
    const Eigen::VectorXd step = -jac.colPivHouseholderQr().solve(r);
    if (!step.allFinite()) fail("Newton step is not finite", iterations);

    // Armijo on ½|r|²; the Newton direction has slope −|r|².
    const double phi = 0.5 * r.squaredNorm();
    double lambda = 1.0;
    for (;;) {
      MomentState trial = state;
      trial.v += lambda * step;
      const Eigen::VectorXd r_trial = residual(trial);
      if (r_trial.allFinite() && 0.5 * r_trial.squaredNorm() <= (1.0 - 2e-4 * lambda) * phi) {
        state = std::move(trial);
        r = r_trial;
        break;
      }
      lambda *= 0.5;
      if (lambda < 1e-10) fail("line search step underflow", iterations);
    }
  }

  // Polish once so a converged root re-solves without iterating.
  {
    const Eigen::MatrixXd jac = jacobian(state);
    MomentState trial = state;
    trial.v -= jac.colPivHouseholderQr().solve(r);
    const Eigen::VectorXd r_trial = residual(trial);
    if (r_trial.allFinite() && r_trial.lpNorm<Eigen::Infinity>() < r.lpNorm<Eigen::Infinity>()) {
      state = std::move(trial);
    }
  }

  BalanceReport rep = report(state);
  rep.converged = true;
  rep.iterations = iterations;
  if (!(rep.stability_margin < -options.stability_tolerance)) {
    throw UnstableRoot("root is not strictly stable", state.v, std::move(rep));
  }
  return BalanceSolution{state.v, std::move(rep)};
}

Eigen::VectorXd residual(const BalanceSystem& system, const MomentState& state) { return system.residual(state); }

Eigen::MatrixXd jacobian(const BalanceSystem& system, const MomentState& state) { return system.jacobian(state); }

Eigen::VectorXd mean_rhs(const BalanceSystem& system, const MomentState& state) { return system.mean_rhs(state); }

BalanceSolution solve_balance(const BalanceSystem& system, double k_e, double k_i,
                              const Eigen::Ref<const Eigen::VectorXd>& guess, const BalanceOptions& options) {
  return system.solve(k_e, k_i, guess, options);
}

}  // namespace balnet
