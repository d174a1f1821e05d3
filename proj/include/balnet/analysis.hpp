#pragma once

// Particle-versus-limit statistics: sup mean/variance errors, marginal
// Wasserstein brackets, and the dominant oscillation frequency of a recorded
// coefficient.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "balnet/limit.hpp"
#include "balnet/particle.hpp"
#include "balnet/quadrature.hpp"

namespace balnet {

/// Exact W1 between two empirical measures (∫ |F_a − F_b|). Throws EmptySample.
double wasserstein1d(std::span<const double> a, std::span<const double> b);

struct DistanceBracket {
  double lower = 0.0;
  double upper = 0.0;
};

/// Per-population Gaussian law of the limit fluctuations (the same at every
/// position while covariances are spatially constant).
struct LimitLaw {
  GaussianLaw<double> e;
  GaussianLaw<double> i;
};

/// Reference sample size used against an n-neuron ensemble.
inline std::size_t reference_sample_size(std::size_t n) { return std::max<std::size_t>(n, 10000); }

/// Bracket on d_W(empirical (y_e, y_i), limit law) under the cost
/// |y_e − z_e| + |y_i − z_i|. Both ends are the sum of the marginal W1
/// distances to seeded Gaussian reference samples: a lower bound for any
/// coupling, attained by the product quantile coupling when the limit law is
/// a product, which it is here.
DistanceBracket distance_to_limit(std::span<const double> y_e, std::span<const double> y_i, const LimitLaw& law,
                                  std::uint64_t reference_seed);

struct CompareTolerances {
  double mean_e = 0.05;
  double mean_i = 0.05;
  double variance = 0.1;
  double wasserstein = std::numeric_limits<double>::infinity();
};

struct ComparisonReport {
  double sup_mean_error_e = 0.0;
  double sup_mean_error_i = 0.0;
  double sup_var_error = 0.0;
  std::vector<double> wasserstein_times;
  std::vector<DistanceBracket> wasserstein_series;
  double sup_wasserstein = 0.0;  // max upper end over snapshots
  bool passed = false;
};

/// Throws GridMismatch if a recorded time is not on the trajectory grid.
ComparisonReport compare(const ObservableSeries& series, const LimitTrajectory& traj,
                         const CompareTolerances& tolerances = {});

/// Seed offset for reference samples drawn by compare().
inline constexpr std::uint64_t kReferenceSeedMix = 0x9E3779B97F4A7C15ull;

/// Frequency (cycles per unit time) of the largest non-DC peak of |DFT| of
/// the demeaned signal, or 0 when no bin exceeds 3× the spectral median.
/// Throws TooFewSamples below 64 samples.
double dominant_frequency(std::span<const double> signal, double sample_interval);

/// Same for coefficient `coefficient` of population `population` in a series
/// recorded on a uniform grid.
double dominant_frequency(const ObservableSeries& series, Population population, int coefficient);

}  // namespace balnet
