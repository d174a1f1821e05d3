#include "balnet/model.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/LU>

namespace balnet {

const char* to_string(Population p) { return p == Population::E ? "e" : "i"; }

const char* to_string(Pair p) {
  switch (p) {
    case Pair::EE: return "ee";
    case Pair::EI: return "ei";
    case Pair::IE: return "ie";
    case Pair::II: return "ii";
  }
  return "?";
}

// ---------------------------------------------------------------------------

SpatialBasis SpatialBasis::point() { return SpatialBasis(Domain::Point, {BasisFunction::Constant}); }

SpatialBasis SpatialBasis::ring(std::vector<BasisFunction> functions) {
  if (functions.empty() || functions.front() != BasisFunction::Constant) {
    throw ValidationError("ring basis must start with the constant function");
  }
  for (std::size_t a = 0; a < functions.size(); ++a) {
    for (std::size_t b = a + 1; b < functions.size(); ++b) {
      if (functions[a] == functions[b]) throw ValidationError("ring basis lists a function twice");
    }
  }
  return SpatialBasis(Domain::Ring, std::move(functions));
}

double SpatialBasis::position(int j, int n) const {
  if (domain_ == Domain::Point) return 0.0;
  return 2.0 * std::numbers::pi * static_cast<double>(j + 1) / static_cast<double>(n);
}

Eigen::MatrixXd SpatialBasis::gram() const {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(size(), size());
  for (int a = 0; a < size(); ++a) g(a, a) = functions_[a] == BasisFunction::Constant ? 1.0 : 0.5;
  return g;
}

SpatialQuadrature SpatialBasis::quadrature(int points) const {
  SpatialQuadrature rule;
  if (domain_ == Domain::Point) {
    rule.nodes = Eigen::VectorXd::Zero(1);
    rule.weights = Eigen::VectorXd::Ones(1);
    return rule;
  }
  rule.nodes.resize(points);
  rule.weights = Eigen::VectorXd::Constant(points, 1.0 / points);
  for (int k = 0; k < points; ++k) rule.nodes(k) = -std::numbers::pi + 2.0 * std::numbers::pi * (k + 1) / points;
  return rule;
}

Eigen::VectorXd eval_basis(const SpatialBasis& basis, double x) { return basis.eval(x); }

// ---------------------------------------------------------------------------

ConnectivityKernel::ConnectivityKernel(std::array<Eigen::MatrixXd, 4> coeffs) : coeffs_(std::move(coeffs)) {
  const auto m = coeffs_[0].rows();
  for (const auto& c : coeffs_) {
    if (c.rows() != m || c.cols() != m) throw DimensionMismatch("kernel blocks must all be M×M");
    if (!c.allFinite()) throw ValidationError("kernel coefficients must be finite");
  }
}

ConnectivityKernel ConnectivityKernel::diagonal(const std::array<Eigen::VectorXd, 4>& diag) {
  std::array<Eigen::MatrixXd, 4> c;
  for (int p = 0; p < 4; ++p) c[p] = diag[p].asDiagonal();
  return ConnectivityKernel(std::move(c));
}

ConnectivityKernel ConnectivityKernel::mean_field() {
  std::array<Eigen::MatrixXd, 4> c;
  c.fill(Eigen::MatrixXd::Ones(1, 1));
  return ConnectivityKernel(std::move(c));
}

double ConnectivityKernel::eval(const SpatialBasis& basis, Pair p, double x, double x_prime) const {
  return basis.eval(x).dot(coeffs(p) * basis.eval(x_prime));
}

// ---------------------------------------------------------------------------

std::string GainSpec::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Constant: os << "constant " << c_; break;
    case Kind::Linear: os << "linear " << c_; break;
    case Kind::Tanh: os << "tanh " << c_ << ' ' << gamma_ << ' ' << shift_; break;
  }
  return os.str();
}

DriftSpec DriftSpec::linear_decay(double tau) {
  if (!(tau > 0.0)) throw ValidationError("time constant must be positive");
  DriftSpec d;
  d.tau_ = tau;
  return d;
}

DriftSpec DriftSpec::custom(std::function<double(double)> f) {
  DriftSpec d;
  d.custom_ = std::move(f);
  return d;
}

NoiseSpec NoiseSpec::additive(double sigma) {
  if (!std::isfinite(sigma)) throw ValidationError("noise amplitude must be finite");
  NoiseSpec s;
  s.sigma_ = sigma;
  s.bound_ = std::abs(sigma);
  return s;
}

NoiseSpec NoiseSpec::custom(std::function<double(double, double)> sigma, double bound) {
  if (!(bound > 0.0)) throw ValidationError("noise bound must be positive");
  NoiseSpec s;
  s.custom_ = std::move(sigma);
  s.bound_ = bound;
  return s;
}

void Model::validate() const {
  if (kernel.rank() != basis.size()) {
    throw DimensionMismatch("kernel rank " + std::to_string(kernel.rank()) + " does not match basis size " +
                            std::to_string(basis.size()));
  }
  for (const auto& g : gains) {
    if (!std::isfinite(g.amplitude()) || !std::isfinite(g.gamma()) || !std::isfinite(g.shift())) {
      throw ValidationError("gain parameters must be finite");
    }
  }
}

// ---------------------------------------------------------------------------

ProjectionWorkspace build_projection(const SpatialBasis& basis, int n) {
  if (n < 1) throw DimensionMismatch("need at least one neuron");
  const int m = basis.size();
  ProjectionWorkspace ws;
  ws.n = n;
  ws.positions.resize(n);
  ws.basis_values.resize(n, m);
  for (int j = 0; j < n; ++j) {
    ws.positions(j) = basis.position(j, n);
    ws.basis_values.row(j) = basis.eval(ws.positions(j)).transpose();
  }
  ws.q = ws.basis_values.transpose() * ws.basis_values / static_cast<double>(n);

  // Q → Gram as n → ∞; the threshold applies to Q in the orthonormalized basis.
  const Eigen::VectorXd scale = basis.gram().diagonal().cwiseSqrt().cwiseInverse();
  const double normalized_det = (scale.asDiagonal() * ws.q * scale.asDiagonal()).determinant();
  if (!(normalized_det > 0.5)) {
    throw SingularProjection("projection matrix degenerate for n = " + std::to_string(n) +
                             " (normalized det " + std::to_string(normalized_det) + " <= 1/2)");
  }
  ws.q_inv = ws.q.inverse();
  return ws;
}

Decomposition decompose(const ProjectionWorkspace& ws, const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (z.size() != ws.n) {
    throw DimensionMismatch("state count " + std::to_string(z.size()) + " != n = " + std::to_string(ws.n));
  }
  Decomposition d;
  d.v = ws.q_inv * (ws.basis_values.transpose() * z) / static_cast<double>(ws.n);
  d.y = z - ws.basis_values * d.v;
  return d;
}

}  // namespace balnet
