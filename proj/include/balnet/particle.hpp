#pragma once

// Euler–Maruyama integration of the 2n-neuron network with n^{-1/2}-scaled
// finite-rank interaction.
//
// The interaction sum is reduced to O(nM) work: per step the sums
// S_{αβ,b} = Σ_k h_b(x^k) G_{αβ}(z^k_β) are accumulated over fixed blocks of
// neurons and combined by a fixed pairwise tree, so floating-point results do
// not depend on how many OpenMP workers execute the blocks. Noise comes from
// Philox streams addressed by (neuron, step).

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "balnet/model.hpp"

namespace balnet {

struct ParticleEnsemble {
  Eigen::VectorXd positions;
  Eigen::VectorXd z_e;
  Eigen::VectorXd z_i;
  double t = 0.0;
  std::int64_t step = 0;

  int n() const { return static_cast<int>(z_e.size()); }
  const Eigen::VectorXd& states(Population p) const { return p == Population::E ? z_e : z_i; }
};

/// Initial means as basis coefficients (e then i, length 2M) and variances.
struct InitialLaw {
  Eigen::VectorXd means;
  double k_e = 0.0;
  double k_i = 0.0;
};

struct SimConfig {
  Model model;
  int n = 1000;
  double dt = 1e-3;
  double horizon = 5.0;
  std::uint64_t seed = 1;
  int observable_stride = 10;
  /// Steps between fluctuation snapshots; 0 disables them.
  int snapshot_stride = 0;
  InitialLaw initial;
  /// OpenMP worker count; 0 uses the runtime default. Never affects results.
  int workers = 0;

  void validate() const;
};

/// Fluctuations y of both populations at one recorded time.
struct FluctuationSnapshot {
  double t = 0.0;
  Eigen::VectorXd y_e;
  Eigen::VectorXd y_i;
};

struct ObservableSeries {
  int n = 0;
  int rank = 0;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> means;  // v̂ (2M) per record
  std::vector<double> var_e;           // K̂_e = n⁻¹ Σ y_e²
  std::vector<double> var_i;
  /// max_a |Σ_j h_a(x^j) y^j| / (n max|z|) over both populations.
  std::vector<double> projection_defect;
  std::vector<FluctuationSnapshot> snapshots;

  std::size_t size() const { return times.size(); }
};

/// Some |z| exceeded the blow-up threshold or became non-finite.
class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, double time, int index, Population population)
      : Error(what), time_(time), index_(index), population_(population) {}

  double time() const { return time_; }
  int index() const { return index_; }
  Population population() const { return population_; }

  /// Observables recorded before the blow-up, when raised from simulate().
  const ObservableSeries* partial() const { return partial_.get(); }
  void attach(ObservableSeries series) { partial_ = std::make_shared<ObservableSeries>(std::move(series)); }

 private:
  double time_;
  int index_;
  Population population_;
  std::shared_ptr<ObservableSeries> partial_;
};

inline constexpr double kBlowUpThreshold = 1e6;

struct InteractionDrift {
  Eigen::VectorXd e;
  Eigen::VectorXd i;
};

class ParticleSimulator {
 public:
  explicit ParticleSimulator(SimConfig config);

  const SimConfig& config() const { return config_; }
  const ProjectionWorkspace& workspace() const { return workspace_; }

  ParticleEnsemble sample_initial() const;
  InteractionDrift interaction_drift(const ParticleEnsemble& ensemble) const;
  /// Advances one Euler–Maruyama step in place. Throws BlowUp.
  void step(ParticleEnsemble& ensemble) const;
  ObservableSeries simulate() const;

  static constexpr int kBlockSize = 1024;

 private:
  using BlockSums = Eigen::Matrix<double, 4, Eigen::Dynamic>;  // pair × basis

  BlockSums block_sums(const ParticleEnsemble& ensemble, int block) const;
  BlockSums tree_sum(const std::vector<BlockSums>& parts, int lo, int hi) const;
  /// Per-population coefficient vectors w_α with drift_α(j) = h(x^j)·w_α.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> drift_coefficients(const ParticleEnsemble& ensemble) const;
  void record(const ParticleEnsemble& ensemble, ObservableSeries& series, bool snapshot) const;
  int num_blocks() const { return (config_.n + kBlockSize - 1) / kBlockSize; }
  int workers() const;

  SimConfig config_;
  ProjectionWorkspace workspace_;
};

ParticleEnsemble sample_initial(const SimConfig& config);
InteractionDrift interaction_drift(const ParticleEnsemble& ensemble, const Model& model);
void em_step(ParticleEnsemble& ensemble, const SimConfig& config);
ObservableSeries simulate(const SimConfig& config);

}  // namespace balnet
