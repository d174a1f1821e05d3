// Acceptance runner: one PASS/FAIL line per criterion A1–A6, exit status 0
// only when all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "balnet/analysis.hpp"
#include "balnet/config.hpp"
#include "balnet/scenario.hpp"
#include "oracles.hpp"

using namespace balnet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ScenarioConfig preset(const std::string& name) { return parse_config(preset_text(name)); }

std::filesystem::path out_root() {
  static const auto dir = [] {
    auto d = std::filesystem::temp_directory_path() / "balnet_acceptance";
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Largest projection defect over every ensemble simulated here (A6).
double g_max_defect = 0.0;
int g_series_checked = 0;

void track(const ObservableSeries& s) {
  for (double d : s.projection_defect) g_max_defect = std::max(g_max_defect, d);
  ++g_series_checked;
}

struct Line {
  bool pass;
  std::string text;
};

int g_failures = 0;

void report(const char* id, const Line& line) {
  std::printf("%s %s: %s\n", line.pass ? "PASS" : "FAIL", id, line.text.c_str());
  std::fflush(stdout);
  if (!line.pass) ++g_failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double sup_abs_dev(const ObservableSeries& s, int coeff, double target) {
  double m = 0.0;
  for (const auto& v : s.means) m = std::max(m, std::abs(v(coeff) - target));
  return m;
}

// ---------------------------------------------------------------------------

Line a1() {
  const auto t0 = Clock::now();
  auto cfg = preset("test1");
  cfg.n = 4000;
  cfg.mode = RunMode::Particle;
  cfg.output_dir = (out_root() / "a1").string();
  std::ostringstream log;
  const auto out = run_scenario(cfg, log);
  if (!out.particle) return {false, "particle run failed: " + log.str()};
  const auto& s = *out.particle;
  track(s);
  const double e = sup_abs_dev(s, 0, 0.5), i = sup_abs_dev(s, 1, 1.0);
  double k = 0.0;
  for (std::size_t r = 0; r < s.size(); ++r) k = std::max({k, std::abs(s.var_e[r] - 0.5), std::abs(s.var_i[r] - 0.5)});
  const double secs = seconds_since(t0);
  const bool pass = e < 0.05 && i < 0.05 && k < 0.05 && s.times.back() > 5.0 - 1e-9 && secs < 30.0;
  return {pass, fmt("test1 n=4000 seed=%llu T=5: sup|v_e-0.5|=%.4f sup|v_i-1|=%.4f sup|K-0.5|=%.4f (tol 0.05) "
                    "in %.1f s (budget 30 s)",
                    static_cast<unsigned long long>(cfg.seed), e, i, k, secs)};
}

Line a2() {
  const auto t0 = Clock::now();
  const std::vector<int> sizes{1000, 4000, 16000};
  std::vector<double> avg;
  for (int n : sizes) {
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      SimConfig sim;
      sim.model = preset("test1").model;
      sim.n = n;
      sim.seed = seed;
      sim.initial.means = Eigen::Vector2d(0.5, 1.0);
      sim.initial.k_e = sim.initial.k_i = 0.5;
      const auto s = simulate(sim);
      track(s);
      total += sup_abs_dev(s, 0, 0.5);
    }
    avg.push_back(total / 5);
  }
  const double ratio = avg[2] / avg[0];
  const double secs = seconds_since(t0);
  const bool monotone = avg[0] > avg[1] && avg[1] > avg[2];
  return {monotone && ratio < 0.5 && secs < 300.0,
          fmt("seed-averaged sup|v_e-0.5|: n=1000 %.4f, n=4000 %.4f, n=16000 %.4f; monotone=%s, "
              "ratio %.3f (< 0.5) in %.1f s (budget 300 s)",
              avg[0], avg[1], avg[2], monotone ? "yes" : "no", ratio, secs)};
}

Line a3() {
  const auto t0 = Clock::now();
  auto cfg = preset("test2");
  cfg.output_dir = (out_root() / "a3").string();
  std::ostringstream log;
  const auto out = run_scenario(cfg, log);
  if (!out.limit || !out.particle || !out.report) return {false, "scenario failed: " + log.str()};
  track(*out.particle);

  const auto& traj = *out.limit;
  const BalanceSystem sys(cfg.model);
  double max_res = 0.0, max_gap = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    max_res = std::max(max_res, traj.residual_norms[k]);
    const auto& st = traj.states[k];
    const auto root = sys.solve(st.k_e, st.k_i, Eigen::Vector2d::Zero());
    max_gap = std::max(max_gap, (root.v - st.v).cwiseAbs().maxCoeff());
  }
  const double err = std::max(out.report->sup_mean_error_e, out.report->sup_mean_error_i);
  const double secs = seconds_since(t0);
  const bool complete = !traj.terminated && traj.times.back() > cfg.horizon - 1e-9;
  const bool pass = complete && max_res < 1e-9 && max_gap < 1e-7 && err < 0.08 && secs < 120.0;
  return {pass, fmt("test2: %zu limit steps, max|G|=%.2e (< 1e-9), max gap to per-time roots %.2e (< 1e-7); "
                    "n=10000 sup mean error %.4f (< 0.08) in %.1f s (budget 120 s)",
                    traj.size(), max_res, max_gap, err, secs)};
}

Line a4() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> normal;

  // (a) finite-rank drift against the O(n²) double sum
  double drift_err = 0.0;
  for (const char* name : {"test1", "test2", "test3"}) {
    const Model model = preset(name).model;
    for (int n : {3, 64, 256}) {
      ParticleEnsemble ens;
      ens.positions.resize(n);
      ens.z_e.resize(n);
      ens.z_i.resize(n);
      for (int j = 0; j < n; ++j) {
        ens.positions(j) = model.basis.position(j, n);
        ens.z_e(j) = 1.5 * normal(rng);
        ens.z_i(j) = 1.5 * normal(rng);
      }
      const auto fast = interaction_drift(ens, model);
      const auto slow = oracle::naive_drift(ens, model);
      const double scale = std::max({1e-300, slow.e.cwiseAbs().maxCoeff(), slow.i.cwiseAbs().maxCoeff()});
      drift_err = std::max(drift_err, std::max((fast.e - slow.e).cwiseAbs().maxCoeff(),
                                               (fast.i - slow.i).cwiseAbs().maxCoeff()) / scale);
    }
  }

  // (b) Jacobian against central differences
  double jac_err = 0.0;
  for (const char* name : {"test1", "test2", "test3"}) {
    const BalanceSystem sys(preset(name).model);
    const int d = sys.dimension();
    Eigen::VectorXd v(d);
    for (int k = 0; k < d; ++k) v(k) = 0.3 * normal(rng);
    const MomentState s{v, 0.7, 1.2, 0.0};
    const Eigen::MatrixXd jac = sys.jacobian(s);
    Eigen::MatrixXd fd(d, d);
    const double h = 1e-6;
    for (int c = 0; c < d; ++c) {
      MomentState p = s, m = s;
      p.v(c) += h;
      m.v(c) -= h;
      fd.col(c) = (sys.residual(p) - sys.residual(m)) / (2 * h);
    }
    jac_err = std::max(jac_err, (jac - fd).cwiseAbs().maxCoeff() / std::max(1.0, jac.cwiseAbs().maxCoeff()));
  }

  // (c) Gauss–Hermite against the trapezoid oracle on tanh integrands
  double gh_err = 0.0;
  for (double m : {-0.8, 0.15, 1.0}) {
    for (double var : {0.0625, 0.5, 2.0}) {
      const auto g = [](double y) { return std::tanh(y); };
      const double ref = oracle::trapezoid_expectation(m, var, g);
      const double q = expect(default_rule(), GaussianLaw<double>{m, var}, g);
      gh_err = std::max(gh_err, std::abs(q - ref) / std::abs(ref));
    }
  }

  // (d) W1 against the assignment oracle
  double w_err = 0.0;
  for (int n : {1, 8, 31, 64}) {
    std::vector<double> a(n), b(n);
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = 2.0 * normal(rng) + 0.5;
    w_err = std::max(w_err, std::abs(wasserstein1d(a, b) - oracle::assignment_cost(a, b)));
  }

  // (e) stability margin of a known matrix
  Eigen::Matrix2d j;
  j << 0, -1, 1, -0.5;
  const double margin = stability_margin(j);

  const double secs = seconds_since(t0);
  const bool pass = drift_err < 1e-10 && jac_err < 1e-6 && gh_err < 1e-10 && w_err < 1e-12 &&
                    std::abs(margin + 0.25) < 1e-10 && secs < 60.0;
  return {pass, fmt("(a) drift rel err %.1e (< 1e-10) (b) Jacobian rel err %.1e (< 1e-6) (c) GH rel err %.1e "
                    "(< 1e-10) (d) W1 err %.1e (< 1e-12) (e) margin %.12f (-0.25 +- 1e-10) in %.1f s (budget 60 s)",
                    drift_err, jac_err, gh_err, w_err, margin, secs)};
}

Line a5() {
  const auto t0 = Clock::now();
  auto cfg = preset("test3");
  cfg.mode = RunMode::Limit;
  cfg.output_dir = (out_root() / "a5_limit").string();
  std::ostringstream log;
  const int limit_exit = run_scenario(cfg, log).exit_code;
  const bool no_root = limit_exit == kExitNoBalance && log.str().find("no stable balanced root") != std::string::npos;

  std::vector<double> freq;
  bool completed = true;
  for (int n : {100, 500}) {
    auto run = preset("test3");
    run.mode = RunMode::Particle;
    run.n = n;
    run.output_dir = (out_root() / ("a5_n" + std::to_string(n))).string();
    const auto out = run_scenario(run, log);
    if (!out.particle || out.exit_code != kExitOk) {
      completed = false;
      freq.push_back(0.0);
      continue;
    }
    track(*out.particle);
    freq.push_back(dominant_frequency(*out.particle, Population::E, 0));
  }
  const double secs = seconds_since(t0);
  const bool pass = no_root && completed && freq[1] > freq[0] && freq[0] > 0.0 && secs < 120.0;
  return {pass, fmt("test3 limit mode exit %d (%s); particle runs %s; dominant frequency of v_e1: "
                    "n=100 %.3f, n=500 %.3f in %.1f s (budget 120 s)",
                    limit_exit, no_root ? "no stable balanced root" : "unexpected",
                    completed ? "complete" : "blew up", freq[0], freq[1], secs)};
}

Line a6() {
  std::vector<std::string> contents;
  for (int workers : {1, 2, 8}) {
    auto cfg = preset("test1");
    cfg.n = 4000;
    cfg.output_dir = (out_root() / ("a6_w" + std::to_string(workers))).string();
    std::ostringstream log;
    const auto out = run_scenario(cfg, log, workers);
    if (out.particle) track(*out.particle);
    contents.push_back(read_file(std::filesystem::path(cfg.output_dir) / "particle.csv") + "\n--\n" +
                       read_file(std::filesystem::path(cfg.output_dir) / "limit.csv") + "\n--\n" +
                       read_file(std::filesystem::path(cfg.output_dir) / "verdict.txt"));
  }
  const bool identical = contents[0] == contents[1] && contents[0] == contents[2] && contents[0].size() > 100;
  const bool projection = g_max_defect < 1e-12;
  return {identical && projection,
          fmt("CSVs byte-identical across 1/2/8 workers: %s; projection identity over %d runs: "
              "max |sum_j h_a y_j| / (n max|z|) = %.1e (< 1e-12)",
              identical ? "yes" : "no", g_series_checked, g_max_defect)};
}

Line guarded(Line (*fn)()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  report("A1", guarded(a1));
  report("A2", guarded(a2));
  report("A3", guarded(a3));
  report("A4", guarded(a4));
  report("A5", guarded(a5));
  report("A6", guarded(a6));
  std::printf("%d of 6 acceptance criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
