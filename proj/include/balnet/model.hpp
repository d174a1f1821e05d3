#pragma once

// Network description shared by the particle simulator and the limit solver:
// spatial basis, finite-rank connectivity, interaction gains, intrinsic
// dynamics, and the Q-projection that splits states into basis coefficients
// plus orthogonal fluctuations.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "balnet/errors.hpp"

namespace balnet {

enum class Population { E = 0, I = 1 };

/// Ordered (target, source) population pair.
enum class Pair { EE = 0, EI = 1, IE = 2, II = 3 };

inline constexpr std::array<Pair, 4> kAllPairs{Pair::EE, Pair::EI, Pair::IE, Pair::II};

constexpr Population target_of(Pair p) { return (p == Pair::EE || p == Pair::EI) ? Population::E : Population::I; }
constexpr Population source_of(Pair p) { return (p == Pair::EE || p == Pair::IE) ? Population::E : Population::I; }
constexpr Pair make_pair(Population target, Population source) {
  return static_cast<Pair>(2 * static_cast<int>(target) + static_cast<int>(source));
}
constexpr int index_of(Pair p) { return static_cast<int>(p); }
constexpr int index_of(Population p) { return static_cast<int>(p); }
/// Excitatory sources add drive, inhibitory sources subtract it.
constexpr double source_sign(Pair p) { return source_of(p) == Population::E ? 1.0 : -1.0; }

const char* to_string(Population p);
const char* to_string(Pair p);

// ---------------------------------------------------------------------------
// Spatial basis

enum class Domain { Point, Ring };
enum class BasisFunction { Constant, Cosine, Sine };

template <typename Scalar>
Scalar eval_basis_function(BasisFunction f, Scalar x) {
  using std::cos;
  using std::sin;
  switch (f) {
    case BasisFunction::Constant: return Scalar(1);
    case BasisFunction::Cosine: return cos(x);
    case BasisFunction::Sine: return sin(x);
  }
  return Scalar(0);
}

/// Nodes and weights of the uniform measure κ on the domain.
struct SpatialQuadrature {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;  // sum to 1
};

class SpatialBasis {
 public:
  /// Single site, M = 1, h ≡ 1.
  static SpatialBasis point();
  /// Circle (-π, π]; the list must start with Constant and hold no duplicates.
  static SpatialBasis ring(std::vector<BasisFunction> functions);

  Domain domain() const { return domain_; }
  int size() const { return static_cast<int>(functions_.size()); }
  const std::vector<BasisFunction>& functions() const { return functions_; }

  /// Position of neuron j ∈ [0, n): 2π(j+1)/n on the ring, 0 on a point.
  double position(int j, int n) const;

  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eval(Scalar x) const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> h(size());
    for (int a = 0; a < size(); ++a) h(a) = eval_basis_function(functions_[a], x);
    return h;
  }

  /// Exact Gram matrix ∫ h_a h_b dκ (diagonal).
  Eigen::MatrixXd gram() const;

  /// Uniform-measure rule: the single site, or the periodic trapezoid rule
  /// with `points` nodes on the ring.
  SpatialQuadrature quadrature(int points = 256) const;

 private:
  SpatialBasis(Domain d, std::vector<BasisFunction> f) : domain_(d), functions_(std::move(f)) {}

  Domain domain_;
  std::vector<BasisFunction> functions_;
};

Eigen::VectorXd eval_basis(const SpatialBasis& basis, double x);

// ---------------------------------------------------------------------------
// Connectivity

/// K_{αβ}(x, x') = Σ_{a,b} c_{αβ,ab} h_a(x) h_b(x'), one M×M block per pair.
class ConnectivityKernel {
 public:
  ConnectivityKernel() = default;
  explicit ConnectivityKernel(std::array<Eigen::MatrixXd, 4> coeffs);

  /// Same diagonal coefficients c_{αβ,aa} on every pair given.
  static ConnectivityKernel diagonal(const std::array<Eigen::VectorXd, 4>& diag);
  /// All-ones M = 1 kernel of the mean-field model.
  static ConnectivityKernel mean_field();

  const Eigen::MatrixXd& coeffs(Pair p) const { return coeffs_[index_of(p)]; }
  int rank() const { return static_cast<int>(coeffs_[0].rows()); }

  double eval(const SpatialBasis& basis, Pair p, double x, double x_prime) const;

 private:
  std::array<Eigen::MatrixXd, 4> coeffs_;
};

// ---------------------------------------------------------------------------
// Gains

class GainSpec {
 public:
  enum class Kind { Constant, Linear, Tanh };

  static GainSpec constant(double amplitude) { return GainSpec(Kind::Constant, amplitude, 1.0, 0.0); }
  static GainSpec linear(double slope) { return GainSpec(Kind::Linear, slope, 1.0, 0.0); }
  /// C·tanh(γ(z − ξ))
  static GainSpec tanh(double c, double gamma = 1.0, double shift = 0.0) { return GainSpec(Kind::Tanh, c, gamma, shift); }

  Kind kind() const { return kind_; }
  double amplitude() const { return c_; }
  double gamma() const { return gamma_; }
  double shift() const { return shift_; }

  double value(double z) const {
    switch (kind_) {
      case Kind::Constant: return c_;
      case Kind::Linear: return c_ * z;
      case Kind::Tanh: return c_ * std::tanh(gamma_ * (z - shift_));
    }
    return 0.0;
  }

  double d1(double z) const {
    switch (kind_) {
      case Kind::Constant: return 0.0;
      case Kind::Linear: return c_;
      case Kind::Tanh: {
        const double t = std::tanh(gamma_ * (z - shift_));
        return c_ * gamma_ * (1.0 - t * t);
      }
    }
    return 0.0;
  }

  double d2(double z) const {
    switch (kind_) {
      case Kind::Constant:
      case Kind::Linear: return 0.0;
      case Kind::Tanh: {
        const double t = std::tanh(gamma_ * (z - shift_));
        return -2.0 * c_ * gamma_ * gamma_ * t * (1.0 - t * t);
      }
    }
    return 0.0;
  }

  bool is_zero() const { return c_ == 0.0; }

  std::string describe() const;

 private:
  GainSpec(Kind k, double c, double g, double s) : kind_(k), c_(c), gamma_(g), shift_(s) {}

  Kind kind_;
  double c_;
  double gamma_;
  double shift_;
};

// ---------------------------------------------------------------------------
// Intrinsic dynamics

/// f_α. The limit solver only accepts LinearDecay; the particle side also
/// takes an arbitrary C² function.
class DriftSpec {
 public:
  static DriftSpec linear_decay(double tau);
  static DriftSpec custom(std::function<double(double)> f);

  bool is_linear_decay() const { return !custom_; }
  double tau() const { return tau_; }

  double operator()(double z) const { return custom_ ? custom_(z) : -z / tau_; }

 private:
  double tau_ = 1.0;
  std::function<double(double)> custom_;
};

/// σ_α(x, z). Additive means constant Σ; custom noise must stay below `bound`.
class NoiseSpec {
 public:
  static NoiseSpec additive(double sigma);
  static NoiseSpec custom(std::function<double(double, double)> sigma, double bound);

  bool is_additive() const { return !custom_; }
  double sigma() const { return sigma_; }
  double bound() const { return bound_; }

  double operator()(double x, double z) const { return custom_ ? custom_(x, z) : sigma_; }

 private:
  double sigma_ = 0.0;
  double bound_ = 0.0;
  std::function<double(double, double)> custom_;
};

struct IntrinsicDynamics {
  DriftSpec drift_e = DriftSpec::linear_decay(1.0);
  DriftSpec drift_i = DriftSpec::linear_decay(1.0);
  NoiseSpec noise_e = NoiseSpec::additive(1.0);
  NoiseSpec noise_i = NoiseSpec::additive(1.0);

  const DriftSpec& drift(Population p) const { return p == Population::E ? drift_e : drift_i; }
  const NoiseSpec& noise(Population p) const { return p == Population::E ? noise_e : noise_i; }
};

struct Model {
  SpatialBasis basis = SpatialBasis::point();
  ConnectivityKernel kernel = ConnectivityKernel::mean_field();
  std::array<GainSpec, 4> gains{GainSpec::constant(0), GainSpec::constant(0), GainSpec::constant(0),
                                GainSpec::constant(0)};
  IntrinsicDynamics dynamics;

  const GainSpec& gain(Pair p) const { return gains[index_of(p)]; }
  int rank() const { return basis.size(); }

  /// Throws DimensionMismatch / ValidationError on inconsistent pieces.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Projection and fluctuation decomposition

struct ProjectionWorkspace {
  int n = 0;
  Eigen::VectorXd positions;     // n
  Eigen::MatrixXd basis_values;  // n×M, h_b(x^j)
  Eigen::MatrixXd q;             // M×M
  Eigen::MatrixXd q_inv;         // M×M
};

/// Q_{pq} = n⁻¹ Σ_j h_p(x^j) h_q(x^j). Throws SingularProjection when the
/// Gram-normalized determinant is ≤ 1/2.
ProjectionWorkspace build_projection(const SpatialBasis& basis, int n);

struct Decomposition {
  Eigen::VectorXd v;  // M basis coefficients
  Eigen::VectorXd y;  // n fluctuations, orthogonal to every h_a on the layout
};

Decomposition decompose(const ProjectionWorkspace& ws, const Eigen::Ref<const Eigen::VectorXd>& z);

}  // namespace balnet
