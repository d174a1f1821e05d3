#pragma once

// Runs a parsed scenario and writes its CSV/verdict outputs:
//
//   limit.csv      t, v_e1..v_eM, v_i1..v_iM, K_e, K_i, residual_norm, stability_margin
//   particle.csv   t, v_e1..v_eM, v_i1..v_iM, K_e, K_i
//   wasserstein.csv  t, lower, upper          (compare mode with snapshots)
//   verdict.txt    key = value lines          (compare mode)
//
// Each CSV starts with one '#' comment naming the scenario and seed, then a
// header row. Numbers use the shortest round-trip form at the configured
// precision; lines end in LF.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "balnet/analysis.hpp"
#include "balnet/config.hpp"
#include "balnet/limit.hpp"
#include "balnet/particle.hpp"

namespace balnet {

enum ExitCode : int {
  kExitOk = 0,
  kExitCompareFailed = 1,
  kExitNoBalance = 2,
  kExitBlowUp = 3,
  kExitUsage = 4,
};

struct ScenarioOutcome {
  int exit_code = kExitOk;
  std::optional<LimitTrajectory> limit;
  std::optional<ObservableSeries> particle;
  std::optional<ComparisonReport> report;
};

/// Runs the scenario, writes outputs under cfg.output_dir (created if
/// missing) and prints diagnostics to `log`. `workers` caps OpenMP threads
/// (0 = runtime default).
ScenarioOutcome run_scenario(const ScenarioConfig& cfg, std::ostream& log, int workers = 0);

std::string format_number(double value, int precision = 17);

void write_limit_csv(const std::string& path, const ScenarioConfig& cfg, const LimitTrajectory& traj);
void write_particle_csv(const std::string& path, const ScenarioConfig& cfg, const ObservableSeries& series);

struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Throws Error for unknown names.
  std::size_t column(const std::string& name) const;
};

/// Reads files written by the writers above. Throws ParseError.
CsvTable read_csv(const std::string& path);

}  // namespace balnet
