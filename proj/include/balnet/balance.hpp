#pragma once

// Balanced-manifold machinery under the Gaussian closure: residual G,
// Jacobian J, stability margin, Newton root solve, and the implicit mean
// velocity −J⁻¹H.

#include <optional>

#include <Eigen/Core>

#include "balnet/model.hpp"
#include "balnet/quadrature.hpp"

namespace balnet {

/// Means v (e-coefficients then i-coefficients, length 2M) and the
/// spatially constant fluctuation variances.
struct MomentState {
  Eigen::VectorXd v;
  double k_e = 1.0;
  double k_i = 1.0;
  double t = 0.0;

  double variance(Population p) const { return p == Population::E ? k_e : k_i; }
};

struct BalanceReport {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  double stability_margin = 0.0;
  bool converged = false;
  int iterations = 0;

  double residual_norm() const { return residual.size() ? residual.lpNorm<Eigen::Infinity>() : 0.0; }
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, BalanceReport report) : Error(what), report_(std::move(report)) {}
  const BalanceReport& report() const { return report_; }

 private:
  BalanceReport report_;
};

/// A root was found but its Jacobian is not strictly stable.
class UnstableRoot : public Error {
 public:
  UnstableRoot(const std::string& what, Eigen::VectorXd root, BalanceReport report)
      : Error(what), root_(std::move(root)), report_(std::move(report)) {}
  const Eigen::VectorXd& root() const { return root_; }
  const BalanceReport& report() const { return report_; }

 private:
  Eigen::VectorXd root_;
  BalanceReport report_;
};

struct BalanceOptions {
  double tolerance = 1e-10;  // on |residual|∞
  int max_iterations = 100;
  /// A root counts as stable only when its margin is below −stability_tolerance.
  double stability_tolerance = 1e-10;
  /// |det J| below this is treated as singular.
  double det_threshold = 1e-12;
};

struct BalanceSolution {
  Eigen::VectorXd v;
  BalanceReport report;
};

/// Max real part over the eigenvalues of J. Throws EigenFailure.
double stability_margin(const Eigen::Ref<const Eigen::MatrixXd>& jacobian);

/// Binds a model to a Gauss–Hermite rule and the spatial quadrature of its
/// domain. Requires LinearDecay drift and additive noise on both populations.
class BalanceSystem {
 public:
  explicit BalanceSystem(Model model, const GaussHermiteRule<double>& rule = default_rule(),
                         int spatial_points = 256);

  const Model& model() const { return model_; }
  int dimension() const { return 2 * model_.rank(); }

  Eigen::VectorXd residual(const MomentState& state) const;
  Eigen::MatrixXd jacobian(const MomentState& state) const;

  /// H: rate of change of the residual induced by the covariance flow at
  /// fixed means.
  Eigen::VectorXd variance_drive(const MomentState& state) const;

  /// −J⁻¹H. Warns on std::clog when |residual|∞ > 1e-6. Throws
  /// SingularJacobian when |det J| < options.det_threshold.
  Eigen::VectorXd mean_rhs(const MomentState& state, const BalanceOptions& options = {}) const;

  /// Same as mean_rhs without the on-manifold check (used for predictor stages).
  Eigen::VectorXd mean_rhs_unchecked(const MomentState& state, const BalanceOptions& options = {}) const;

  /// Damped Newton on the residual from `guess`. Throws NoConvergence or
  /// UnstableRoot.
  BalanceSolution solve(double k_e, double k_i, const Eigen::Ref<const Eigen::VectorXd>& guess,
                        const BalanceOptions& options = {}) const;

  BalanceReport report(const MomentState& state) const;

  /// dK/dt under linear decay and additive noise.
  double covariance_rate(Population p, double k) const;

 private:
  struct PairMoments {
    Eigen::VectorXd value;      // E[G]     per spatial node
    Eigen::VectorXd slope;      // E[Ġ]
    Eigen::VectorXd var_score;  // ∂_V E[G]
  };

  enum Need { kValue = 1, kSlope = 2, kVarScore = 4 };

  PairMoments pair_moments(Pair p, const MomentState& state, int need) const;
  void check_state(const MomentState& state) const;

  Model model_;
  const GaussHermiteRule<double>* rule_;
  SpatialQuadrature spatial_;
  Eigen::MatrixXd spatial_basis_;  // nodes × M
  Eigen::MatrixXd gram_;
};

// Free-function forms.
Eigen::VectorXd residual(const BalanceSystem& system, const MomentState& state);
Eigen::MatrixXd jacobian(const BalanceSystem& system, const MomentState& state);
Eigen::VectorXd mean_rhs(const BalanceSystem& system, const MomentState& state);
BalanceSolution solve_balance(const BalanceSystem& system, double k_e, double k_i,
                              const Eigen::Ref<const Eigen::VectorXd>& guess, const BalanceOptions& options = {});

}  // namespace balnet
