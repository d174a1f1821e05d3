#include "balnet/scenario.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace balnet {

std::string format_number(double value, int precision) {
  char buf[64];
  // Shortest round-trip representation when full precision is requested.
  const auto res = precision >= 17 ? std::to_chars(buf, buf + sizeof buf, value)
                                   : std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, precision);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> moment_columns(int m) {
  std::vector<std::string> cols{"t"};
  for (int a = 1; a <= m; ++a) cols.push_back("v_e" + std::to_string(a));
  for (int a = 1; a <= m; ++a) cols.push_back("v_i" + std::to_string(a));
  cols.push_back("K_e");
  cols.push_back("K_i");
  return cols;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

void write_row(std::ostream& out, const std::vector<double>& values, int precision) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out << ',';
    out << format_number(values[k], precision);
  }
  out << '\n';
}

void write_header(std::ostream& out, const std::string& kind, const ScenarioConfig& cfg,
                  const std::vector<std::string>& cols) {
  out << "# balnet " << kind << " scenario=" << cfg.name << " seed=" << cfg.seed << " n=" << cfg.n << '\n';
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
}

bool on_record_grid(std::size_t step, std::size_t last, int stride) {
  return step % static_cast<std::size_t>(stride) == 0 || step == last;
}

}  // namespace

void write_limit_csv(const std::string& path, const ScenarioConfig& cfg, const LimitTrajectory& traj) {
  auto out = open_output(path);
  auto cols = moment_columns(cfg.model.rank());
  cols.push_back("residual_norm");
  cols.push_back("stability_margin");
  write_header(out, "limit", cfg, cols);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (!on_record_grid(k, traj.size() - 1, cfg.stride)) continue;
    const auto& s = traj.states[k];
    std::vector<double> row{traj.times[k]};
    row.insert(row.end(), s.v.data(), s.v.data() + s.v.size());
    row.insert(row.end(), {s.k_e, s.k_i, traj.residual_norms[k], traj.stability_margins[k]});
    write_row(out, row, cfg.precision);
  }
}

void write_particle_csv(const std::string& path, const ScenarioConfig& cfg, const ObservableSeries& series) {
  auto out = open_output(path);
  write_header(out, "particle", cfg, moment_columns(cfg.model.rank()));
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::vector<double> row{series.times[k]};
    row.insert(row.end(), series.means[k].data(), series.means[k].data() + series.means[k].size());
    row.insert(row.end(), {series.var_e[k], series.var_i[k]});
    write_row(out, row, cfg.precision);
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  throw Error("no column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      table.comments.push_back(line);
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) throw ParseError(line_no, "row width differs from header");
    std::vector<double> row(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const auto* end = fields[k].data() + fields[k].size();
      auto [ptr, ec] = std::from_chars(fields[k].data(), end, row[k]);
      if (ec != std::errc() || ptr != end) throw ParseError(line_no, "bad number '" + fields[k] + "'");
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ParseError(line_no, "missing header row");
  return table;
}

// ---------------------------------------------------------------------------

namespace {

void write_verdict(const std::string& path, const ScenarioConfig& cfg, const ComparisonReport& rep,
                   const ObservableSeries& series) {
  auto out = open_output(path);
  double defect = 0.0;
  for (double d : series.projection_defect) defect = std::max(defect, d);
  const int p = cfg.precision;
  out << "scenario = " << cfg.name << '\n'
      << "seed = " << cfg.seed << '\n'
      << "n = " << cfg.n << '\n'
      << "sup_mean_error_e = " << format_number(rep.sup_mean_error_e, p) << '\n'
      << "sup_mean_error_i = " << format_number(rep.sup_mean_error_i, p) << '\n'
      << "sup_var_error = " << format_number(rep.sup_var_error, p) << '\n'
      << "tol_mean_e = " << format_number(cfg.tolerances.mean_e, p) << '\n'
      << "tol_mean_i = " << format_number(cfg.tolerances.mean_i, p) << '\n'
      << "tol_var = " << format_number(cfg.tolerances.variance, p) << '\n';
  if (!rep.wasserstein_series.empty()) {
    out << "sup_wasserstein = " << format_number(rep.sup_wasserstein, p) << '\n';
  }
  out << "max_projection_defect = " << format_number(defect, p) << '\n'
      << "passed = " << (rep.passed ? "true" : "false") << '\n';
}

void write_wasserstein(const std::string& path, const ScenarioConfig& cfg, const ComparisonReport& rep) {
  auto out = open_output(path);
  write_header(out, "wasserstein", cfg, {"t", "lower", "upper"});
  for (std::size_t k = 0; k < rep.wasserstein_series.size(); ++k) {
    const auto& b = rep.wasserstein_series[k];
    write_row(out, {rep.wasserstein_times[k], b.lower, b.upper}, cfg.precision);
  }
}

}  // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& cfg, std::ostream& log, int workers) {
  cfg.validate();
  ScenarioOutcome outcome;
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);

  const bool want_limit = cfg.mode != RunMode::Particle;
  const bool want_particle = cfg.mode != RunMode::Limit;
  const int dim = 2 * cfg.model.rank();

  // The rule must outlive the system that points at it.
  const GaussHermiteRule<double> rule(cfg.quadrature_order);
  std::optional<BalanceSystem> system;
  std::optional<BalanceSolution> root;
  if (want_limit || !cfg.v0) {
    system.emplace(cfg.model, rule);
    const Eigen::VectorXd guess = cfg.v_guess.value_or(Eigen::VectorXd::Zero(dim));
    try {
      root = system->solve(cfg.k_e0, cfg.k_i0, guess, cfg.balance);
    } catch (const UnstableRoot& e) {
      log << "no stable balanced root: " << e.what() << " (stability margin " << e.report().stability_margin
          << ")\n";
      return {kExitNoBalance, {}, {}, {}};
    } catch (const NoConvergence& e) {
      log << "no stable balanced root: " << e.what() << " (residual " << e.report().residual_norm() << ")\n";
      return {kExitNoBalance, {}, {}, {}};
    }
  }

  if (want_limit) {
    LimitOptions opts;
    opts.dt = cfg.dt;
    opts.horizon = cfg.horizon;
    opts.balance = cfg.balance;
    outcome.limit = integrate_limit(*system, root->v, cfg.k_e0, cfg.k_i0, opts);
    write_limit_csv((dir / "limit.csv").string(), cfg, *outcome.limit);
    if (outcome.limit->terminated) {
      const auto& term = *outcome.limit->terminated;
      log << "limit trajectory ended at t = " << term.time << " (" << to_string(term.reason) << "): " << term.detail
          << '\n';
    }
  }

  if (want_particle) {
    SimConfig sim;
    sim.model = cfg.model;
    sim.n = cfg.n;
    sim.dt = cfg.dt;
    sim.horizon = cfg.horizon;
    sim.seed = cfg.seed;
    sim.observable_stride = cfg.stride;
    sim.snapshot_stride = cfg.mode == RunMode::Compare ? cfg.snapshot_stride : 0;
    sim.initial.means = cfg.v0 ? *cfg.v0 : root->v;
    sim.initial.k_e = cfg.k_e0;
    sim.initial.k_i = cfg.k_i0;
    sim.workers = workers;
    try {
      outcome.particle = simulate(sim);
    } catch (const BlowUp& e) {
      log << e.what() << '\n';
      if (e.partial()) write_particle_csv((dir / "particle.csv").string(), cfg, *e.partial());
      outcome.exit_code = kExitBlowUp;
      return outcome;
    }
    write_particle_csv((dir / "particle.csv").string(), cfg, *outcome.particle);
  }

  if (cfg.mode == RunMode::Compare) {
    if (outcome.limit->terminated) {
      log << "cannot compare over [0, T]: the limit trajectory ended early\n";
      outcome.exit_code = kExitCompareFailed;
      return outcome;
    }
    outcome.report = compare(*outcome.particle, *outcome.limit, cfg.tolerances);
    write_verdict((dir / "verdict.txt").string(), cfg, *outcome.report, *outcome.particle);
    if (!outcome.report->wasserstein_series.empty()) {
      write_wasserstein((dir / "wasserstein.csv").string(), cfg, *outcome.report);
    }
    const auto& rep = *outcome.report;
    log << cfg.name << ": sup mean error e " << rep.sup_mean_error_e << ", i " << rep.sup_mean_error_i
        << ", variance " << rep.sup_var_error << (rep.passed ? " -> passed" : " -> FAILED") << '\n';
    outcome.exit_code = rep.passed ? kExitOk : kExitCompareFailed;
  }
  return outcome;
}

}  // namespace balnet
