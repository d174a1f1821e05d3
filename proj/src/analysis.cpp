#include "balnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <unsupported/Eigen/FFT>

#include "balnet/philox.hpp"

namespace balnet {

double wasserstein1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw EmptySample("wasserstein1d needs non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  // Integrate |F_a − F_b| over the merged breakpoints.
  const double wa = 1.0 / static_cast<double>(sa.size());
  const double wb = 1.0 / static_cast<double>(sb.size());
  std::size_t ia = 0, ib = 0;
  double fa = 0.0, fb = 0.0;
  double x = std::min(sa.front(), sb.front());
  double total = 0.0;
  while (ia < sa.size() || ib < sb.size()) {
    const double next = ib >= sb.size() || (ia < sa.size() && sa[ia] <= sb[ib]) ? sa[ia] : sb[ib];
    total += std::abs(fa - fb) * (next - x);
    x = next;
    while (ia < sa.size() && sa[ia] == x) {
      ++ia;
      fa = static_cast<double>(ia) * wa;
    }
    while (ib < sb.size() && sb[ib] == x) {
      ++ib;
      fb = static_cast<double>(ib) * wb;
    }
  }
  return total;
}

namespace {

std::vector<double> gaussian_reference(const GaussianLaw<double>& law, std::size_t size, std::uint64_t seed,
                                       bool second_lane) {
  require_positive_variance(law);
  const double sd = std::sqrt(law.variance);
  std::vector<double> out(size);
  for (std::size_t j = 0; j < size; ++j) {
    const auto z = normal_pair(seed, static_cast<std::uint32_t>(j), 0, StreamTag::Reference);
    out[j] = law.mean + sd * (second_lane ? z.second : z.first);
  }
  return out;
}

}  // namespace

DistanceBracket distance_to_limit(std::span<const double> y_e, std::span<const double> y_i, const LimitLaw& law,
                                  std::uint64_t reference_seed) {
  const auto ref_e = gaussian_reference(law.e, reference_sample_size(y_e.size()), reference_seed, false);
  const auto ref_i = gaussian_reference(law.i, reference_sample_size(y_i.size()), reference_seed, true);
  const double d = wasserstein1d(y_e, ref_e) + wasserstein1d(y_i, ref_i);
  return {d, d};
}

namespace {

std::size_t find_time(const LimitTrajectory& traj, double t) {
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t - tol);
  if (it == traj.times.end() || std::abs(*it - t) > tol) {
    throw GridMismatch("recorded time " + std::to_string(t) + " is not on the limit trajectory grid");
  }
  return static_cast<std::size_t>(it - traj.times.begin());
}

}  // namespace

ComparisonReport compare(const ObservableSeries& series, const LimitTrajectory& traj,
                         const CompareTolerances& tolerances) {
  ComparisonReport rep;
  const int m = series.rank;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& limit = traj.states[find_time(traj, series.times[s])];
    if (limit.v.size() != 2 * m) throw DimensionMismatch("series and trajectory have different basis sizes");
    const Eigen::VectorXd err = (series.means[s] - limit.v).cwiseAbs();
    rep.sup_mean_error_e = std::max(rep.sup_mean_error_e, err.head(m).maxCoeff());
    rep.sup_mean_error_i = std::max(rep.sup_mean_error_i, err.tail(m).maxCoeff());
    rep.sup_var_error = std::max({rep.sup_var_error, std::abs(series.var_e[s] - limit.k_e),
                                  std::abs(series.var_i[s] - limit.k_i)});
  }
  for (const auto& snap : series.snapshots) {
    const auto& limit = traj.states[find_time(traj, snap.t)];
    const LimitLaw law{{0.0, limit.k_e}, {0.0, limit.k_i}};
    const auto bracket = distance_to_limit(std::span(snap.y_e.data(), snap.y_e.size()),
                                           std::span(snap.y_i.data(), snap.y_i.size()), law,
                                           series.seed ^ kReferenceSeedMix);
    rep.wasserstein_times.push_back(snap.t);
    rep.wasserstein_series.push_back(bracket);
    rep.sup_wasserstein = std::max(rep.sup_wasserstein, bracket.upper);
  }
  rep.passed = rep.sup_mean_error_e < tolerances.mean_e && rep.sup_mean_error_i < tolerances.mean_i &&
               rep.sup_var_error < tolerances.variance &&
               (rep.wasserstein_series.empty() || rep.sup_wasserstein < tolerances.wasserstein);
  return rep;
}

double dominant_frequency(std::span<const double> signal, double sample_interval) {
  if (signal.size() < 64) throw TooFewSamples("dominant_frequency needs at least 64 samples");
  if (!(sample_interval > 0.0)) throw ValidationError("sample interval must be positive");
  const std::size_t n = signal.size();
  double mean = 0.0;
  for (double s : signal) mean += s;
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  double scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    centered[k] = signal[k] - mean;
    scale = std::max(scale, std::abs(signal[k]));
  }

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, centered);

  const std::size_t bins = n / 2;
  std::vector<double> mag(bins);
  for (std::size_t k = 1; k <= bins; ++k) mag[k - 1] = std::abs(spectrum[k]);
  const auto peak = std::max_element(mag.begin(), mag.end());
  std::vector<double> sorted = mag;
  std::nth_element(sorted.begin(), sorted.begin() + bins / 2, sorted.end());
  const double median = sorted[bins / 2];

  // Rounding-level spectra of constant signals carry no peak.
  if (*peak <= 1e-12 * scale * static_cast<double>(n) || !(*peak > 3.0 * median)) return 0.0;
  const auto bin = static_cast<double>(peak - mag.begin() + 1);
  return bin / (static_cast<double>(n) * sample_interval);
}

double dominant_frequency(const ObservableSeries& series, Population population, int coefficient) {
  if (coefficient < 0 || coefficient >= series.rank) throw DimensionMismatch("coefficient index out of range");
  if (series.size() < 64) throw TooFewSamples("dominant_frequency needs at least 64 samples");
  const double dt = series.times[1] - series.times[0];
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (std::abs(series.times[k] - series.times[k - 1] - dt) > 1e-9 * std::max(1.0, dt)) {
      throw GridMismatch("dominant_frequency needs a uniform time grid");
    }
  }
  std::vector<double> signal(series.size());
  const int offset = population == Population::E ? 0 : series.rank;
  for (std::size_t k = 0; k < series.size(); ++k) signal[k] = series.means[k](offset + coefficient);
  return dominant_frequency(signal, dt);
}

}  // namespace balnet
