#pragma once

// Gauss–Hermite expectations under one-dimensional Gaussian laws.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "balnet/errors.hpp"

namespace balnet {

/// Default rule order. tanh gains have poles at distance π/(2γ) from the real
/// axis, which caps the convergence rate once √V is O(1); 256 nodes keep the
/// error at machine precision for V ≤ 2.
inline constexpr int kDefaultQuadratureOrder = 256;

/// Variances below this are rejected rather than treated as point masses.
inline constexpr double kMinVariance = 1e-12;

/// p-point rule for ∫ g(u) e^{-u²} du.
template <typename Scalar = double>
class GaussHermiteRule {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit GaussHermiteRule(int order = kDefaultQuadratureOrder) {
    if (order < 1) throw Error("Gauss-Hermite order must be positive");
    // Golub–Welsch: eigenvalues of the Jacobi matrix, subdiagonal √(k/2).
    Vector diag = Vector::Zero(order);
    Vector sub(std::max(order - 1, 0));
    for (int k = 1; k < order; ++k) sub(k - 1) = std::sqrt(Scalar(k) / Scalar(2));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw EigenFailure("Golub-Welsch eigenvalue iteration failed");

    nodes_ = solver.eigenvalues();
    weights_.resize(order);
    for (int i = 0; i < order; ++i) {
      Scalar x = nodes_(i);
      for (int it = 0; it < 3; ++it) {
        const auto [psi_p, psi_pm1, unused] = hermite_functions(order, x);
        (void)unused;
        const Scalar step = psi_p / (std::sqrt(Scalar(2 * order)) * psi_pm1);
        if (!std::isfinite(static_cast<double>(step))) break;
        x -= step;
      }
      nodes_(i) = x;
      const auto sum_sq = std::get<2>(hermite_functions(order, x));
      // Christoffel number with the e^{-x²} factor folded into the ψ's.
      weights_(i) = std::exp(-x * x) / sum_sq;
    }
    // Enforce exact symmetry; the polished nodes agree to rounding.
    for (int i = 0; i < order / 2; ++i) {
      const int j = order - 1 - i;
      const Scalar x = (nodes_(j) - nodes_(i)) / Scalar(2);
      const Scalar w = (weights_(i) + weights_(j)) / Scalar(2);
      nodes_(i) = -x;
      nodes_(j) = x;
      weights_(i) = weights_(j) = w;
    }
    if (order % 2 == 1) nodes_(order / 2) = Scalar(0);
  }

  int order() const { return static_cast<int>(nodes_.size()); }
  const Vector& nodes() const { return nodes_; }
  const Vector& weights() const { return weights_; }

 private:
  // Normalized Hermite functions ψ_k(x) = p_k(x) e^{-x²/2}; returns
  // (ψ_p, ψ_{p-1}, Σ_{k<p} ψ_k²).
  static std::tuple<Scalar, Scalar, Scalar> hermite_functions(int p, Scalar x) {
    Scalar prev = 0;
    Scalar cur = std::pow(std::numbers::pi_v<Scalar>, Scalar(-0.25)) * std::exp(-x * x / Scalar(2));
    Scalar sum_sq = 0;
    for (int k = 0; k < p; ++k) {
      sum_sq += cur * cur;
      const Scalar next =
          std::sqrt(Scalar(2) / Scalar(k + 1)) * x * cur - std::sqrt(Scalar(k) / Scalar(k + 1)) * prev;
      prev = cur;
      cur = next;
    }
    return {cur, prev, sum_sq};
  }

  Vector nodes_;
  Vector weights_;
};

/// Shared default rule, built once.
const GaussHermiteRule<double>& default_rule();

template <typename Scalar = double>
struct GaussianLaw {
  Scalar mean = 0;
  Scalar variance = 1;
};

template <typename Scalar>
void require_positive_variance(const GaussianLaw<Scalar>& law) {
  if (!(law.variance > Scalar(kMinVariance))) {
    throw NonPositiveVariance("variance must be positive, got " + std::to_string(static_cast<double>(law.variance)));
  }
}

template <typename Scalar>
Scalar density(const GaussianLaw<Scalar>& law, Scalar y) {
  require_positive_variance(law);
  const Scalar d = y - law.mean;
  return std::exp(-d * d / (Scalar(2) * law.variance)) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar> * law.variance);
}

/// E_{y~N(m,V)}[g(y)] ≈ Σ_k w_k g(m + √(2V) u_k) / √π.
template <typename Scalar, typename F>
Scalar expect(const GaussHermiteRule<Scalar>& rule, const GaussianLaw<Scalar>& law, F&& g) {
  require_positive_variance(law);
  const Scalar s = std::sqrt(Scalar(2) * law.variance);
  Scalar acc = 0;
  for (int k = 0; k < rule.order(); ++k) acc += rule.weights()(k) * g(law.mean + s * rule.nodes()(k));
  return acc / std::sqrt(std::numbers::pi_v<Scalar>);
}

enum class MomentWeight {
  ShiftOverV,     // (y − m)/V, gives ∂_m E[g]
  VarianceScore,  // −1/(2V) + (y − m)²/(2V²), gives ∂_V E[g]
};

template <typename Scalar, typename F>
Scalar expect_moment_weighted(const GaussHermiteRule<Scalar>& rule, const GaussianLaw<Scalar>& law, F&& g,
                              MomentWeight weight) {
  require_positive_variance(law);
  const Scalar s = std::sqrt(Scalar(2) * law.variance);
  Scalar acc = 0;
  for (int k = 0; k < rule.order(); ++k) {
    const Scalar u = rule.nodes()(k);
    // In node coordinates y − m = √(2V)·u.
    const Scalar w = weight == MomentWeight::ShiftOverV ? std::sqrt(Scalar(2) / law.variance) * u
                                                        : (Scalar(2) * u * u - Scalar(1)) / (Scalar(2) * law.variance);
    acc += rule.weights()(k) * w * g(law.mean + s * u);
  }
  return acc / std::sqrt(std::numbers::pi_v<Scalar>);
}

}  // namespace balnet
