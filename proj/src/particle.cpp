#include "balnet/particle.hpp"

#include <cmath>
#include <sstream>

#include <omp.h>

#include "balnet/philox.hpp"

namespace balnet {

void SimConfig::validate() const {
  model.validate();
  if (n < 1) throw ValidationError("n must be at least 1");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(horizon >= dt)) throw ValidationError("T must be at least dt");
  if (observable_stride < 1) throw ValidationError("observable stride must be at least 1");
  if (snapshot_stride < 0) throw ValidationError("snapshot stride must be non-negative");
  if (initial.means.size() != 2 * model.rank()) {
    throw DimensionMismatch("initial means need 2M = " + std::to_string(2 * model.rank()) + " coefficients");
  }
}

ParticleSimulator::ParticleSimulator(SimConfig config) : config_(std::move(config)) {
  config_.validate();
  workspace_ = build_projection(config_.model.basis, config_.n);
}

int ParticleSimulator::workers() const { return config_.workers > 0 ? config_.workers : omp_get_max_threads(); }

ParticleEnsemble ParticleSimulator::sample_initial() const {
  const auto& init = config_.initial;
  if (init.k_e < 0.0 || init.k_i < 0.0) throw NegativeVariance("initial variances must be non-negative");
  const int n = config_.n;
  const int m = config_.model.rank();
  ParticleEnsemble ens;
  ens.positions = workspace_.positions;
  ens.z_e = workspace_.basis_values * init.means.head(m);
  ens.z_i = workspace_.basis_values * init.means.tail(m);
  const double sd_e = std::sqrt(init.k_e);
  const double sd_i = std::sqrt(init.k_i);
  if (sd_e > 0.0 || sd_i > 0.0) {
    for (int j = 0; j < n; ++j) {
      const auto zeta = normal_pair(config_.seed, static_cast<std::uint32_t>(j), 0, StreamTag::InitialCondition);
      ens.z_e(j) += sd_e * zeta.first;
      ens.z_i(j) += sd_i * zeta.second;
    }
  }
  return ens;
}

ParticleSimulator::BlockSums ParticleSimulator::block_sums(const ParticleEnsemble& ens, int block) const {
  const int m = config_.model.rank();
  const int begin = block * kBlockSize;
  const int end = std::min(config_.n, begin + kBlockSize);
  BlockSums sums = BlockSums::Zero(4, m);
  for (Pair p : kAllPairs) {
    const GainSpec& gain = config_.model.gain(p);
    if (gain.is_zero()) continue;
    const Eigen::VectorXd& z = ens.states(source_of(p));
    for (int a = 0; a < m; ++a) {
      double acc = 0.0;
      if (gain.kind() == GainSpec::Kind::Constant) {
        for (int k = begin; k < end; ++k) acc += workspace_.basis_values(k, a);
        acc *= gain.amplitude();
      } else {
        for (int k = begin; k < end; ++k) acc += workspace_.basis_values(k, a) * gain.value(z(k));
      }
      sums(index_of(p), a) = acc;
    }
  }
  return sums;
}

ParticleSimulator::BlockSums ParticleSimulator::tree_sum(const std::vector<BlockSums>& parts, int lo, int hi) const {
  if (hi - lo == 1) return parts[lo];
  const int mid = lo + (hi - lo) / 2;
  return tree_sum(parts, lo, mid) + tree_sum(parts, mid, hi);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> ParticleSimulator::drift_coefficients(const ParticleEnsemble& ens) const {
  const int blocks = num_blocks();
  std::vector<BlockSums> parts(blocks);
#pragma omp parallel for schedule(static) num_threads(workers())
  for (int b = 0; b < blocks; ++b) parts[b] = block_sums(ens, b);
  const BlockSums total = tree_sum(parts, 0, blocks);

  const int m = config_.model.rank();
  const double scale = 1.0 / std::sqrt(static_cast<double>(config_.n));
  Eigen::VectorXd w_e = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd w_i = Eigen::VectorXd::Zero(m);
  for (Pair p : kAllPairs) {
    Eigen::VectorXd& w = target_of(p) == Population::E ? w_e : w_i;
    w += source_sign(p) * scale * (config_.model.kernel.coeffs(p) * total.row(index_of(p)).transpose());
  }
  return {w_e, w_i};
}

InteractionDrift ParticleSimulator::interaction_drift(const ParticleEnsemble& ens) const {
  const auto [w_e, w_i] = drift_coefficients(ens);
  return {workspace_.basis_values * w_e, workspace_.basis_values * w_i};
}

void ParticleSimulator::step(ParticleEnsemble& ens) const {
  const auto [w_e, w_i] = drift_coefficients(ens);
  const auto& dyn = config_.model.dynamics;
  const double dt = config_.dt;
  const double sqrt_dt = std::sqrt(dt);
  const int blocks = num_blocks();
  const int m = config_.model.rank();
  const std::uint64_t step_index = static_cast<std::uint64_t>(ens.step);
  const bool linear = dyn.drift_e.is_linear_decay() && dyn.drift_i.is_linear_decay();
  const bool additive = dyn.noise_e.is_additive() && dyn.noise_i.is_additive();
  std::vector<int> bad(blocks, -1);

#pragma omp parallel for schedule(static) num_threads(workers())
  for (int b = 0; b < blocks; ++b) {
    const int begin = b * kBlockSize;
    const int end = std::min(config_.n, begin + kBlockSize);
    for (int j = begin; j < end; ++j) {
      double drive_e = 0.0, drive_i = 0.0;
      for (int a = 0; a < m; ++a) {
        const double h = workspace_.basis_values(j, a);
        drive_e += h * w_e(a);
        drive_i += h * w_i(a);
      }
      const double ze = ens.z_e(j);
      const double zi = ens.z_i(j);
      const double fe = linear ? -ze / dyn.drift_e.tau() : dyn.drift_e(ze);
      const double fi = linear ? -zi / dyn.drift_i.tau() : dyn.drift_i(zi);
      const double se = additive ? dyn.noise_e.sigma() : dyn.noise_e(ens.positions(j), ze);
      const double si = additive ? dyn.noise_i.sigma() : dyn.noise_i(ens.positions(j), zi);
      const auto xi = normal_pair(config_.seed, static_cast<std::uint32_t>(j), step_index, StreamTag::Increment);
      const double ze_new = ze + (fe + drive_e) * dt + se * sqrt_dt * xi.first;
      const double zi_new = zi + (fi + drive_i) * dt + si * sqrt_dt * xi.second;
      ens.z_e(j) = ze_new;
      ens.z_i(j) = zi_new;
      if (bad[b] < 0 && !(std::abs(ze_new) <= kBlowUpThreshold && std::abs(zi_new) <= kBlowUpThreshold)) bad[b] = j;
    }
  }
  ens.step += 1;
  ens.t = static_cast<double>(ens.step) * dt;

  for (int b = 0; b < blocks; ++b) {
    if (bad[b] < 0) continue;
    const int j = bad[b];
    const Population pop = std::abs(ens.z_e(j)) <= kBlowUpThreshold ? Population::I : Population::E;
    std::ostringstream os;
    os << "blow-up at t = " << ens.t << ": |z_" << to_string(pop) << "[" << j << "]| exceeds " << kBlowUpThreshold;
    throw BlowUp(os.str(), ens.t, j, pop);
  }
}

void ParticleSimulator::record(const ParticleEnsemble& ens, ObservableSeries& series, bool snapshot) const {
  const auto de = decompose(workspace_, ens.z_e);
  const auto di = decompose(workspace_, ens.z_i);
  const int m = config_.model.rank();
  const double n = static_cast<double>(config_.n);

  Eigen::VectorXd v(2 * m);
  v << de.v, di.v;
  series.times.push_back(ens.t);
  series.means.push_back(std::move(v));
  series.var_e.push_back(de.y.squaredNorm() / n);
  series.var_i.push_back(di.y.squaredNorm() / n);

  const double zmax = std::max({ens.z_e.cwiseAbs().maxCoeff(), ens.z_i.cwiseAbs().maxCoeff(), 1e-300});
  const double defect = std::max((workspace_.basis_values.transpose() * de.y).cwiseAbs().maxCoeff(),
                                 (workspace_.basis_values.transpose() * di.y).cwiseAbs().maxCoeff());
  series.projection_defect.push_back(defect / (n * zmax));

  if (snapshot) series.snapshots.push_back({ens.t, de.y, di.y});
}

ObservableSeries ParticleSimulator::simulate() const {
  ObservableSeries series;
  series.n = config_.n;
  series.rank = config_.model.rank();
  series.seed = config_.seed;

  ParticleEnsemble ens = sample_initial();
  const auto steps = static_cast<std::int64_t>(std::ceil(config_.horizon / config_.dt - 1e-9));
  const int snap = config_.snapshot_stride;
  record(ens, series, snap > 0);
  try {
    for (std::int64_t k = 1; k <= steps; ++k) {
      step(ens);
      const bool on_stride = k % config_.observable_stride == 0;
      const bool on_snapshot = snap > 0 && (k % snap == 0 || k == steps);
      if (on_stride || on_snapshot || k == steps) record(ens, series, on_snapshot);
    }
  } catch (BlowUp& e) {
    e.attach(std::move(series));
    throw;
  }
  return series;
}

// ---------------------------------------------------------------------------

ParticleEnsemble sample_initial(const SimConfig& config) { return ParticleSimulator(config).sample_initial(); }

InteractionDrift interaction_drift(const ParticleEnsemble& ensemble, const Model& model) {
  SimConfig config;
  config.model = model;
  config.n = ensemble.n();
  config.initial.means = Eigen::VectorXd::Zero(2 * model.rank());
  return ParticleSimulator(std::move(config)).interaction_drift(ensemble);
}

void em_step(ParticleEnsemble& ensemble, const SimConfig& config) { ParticleSimulator(config).step(ensemble); }

ObservableSeries simulate(const SimConfig& config) { return ParticleSimulator(config).simulate(); }

}  // namespace balnet
