#pragma once

// Scenario files: flat INI-style text with sections [model], [run], [init],
// [output]. Every key may appear once; unknown keys are errors.
//
//   name = test1
//   mode = compare            # limit | particle | compare
//   [model]
//   domain = point            # point | ring
//   basis = constant          # ring: constant cosine [sine]
//   tau_e = 1
//   sigma_e = 1               # likewise tau_i, sigma_i
//   kernel_ee = 1             # diagonal c_aa, or full rows "1 0; 0 2"
//   gain_ee = constant 1      # constant A | linear C | tanh C [gamma [shift]]
//   ...
//   [run]
//   n = 4000
//   dt = 0.001
//   T = 5
//   seed = 1
//   stride = 10               # steps between recorded rows
//   [init]
//   K_e0 = 0.5
//   K_i0 = 0.5
//   v_guess = 0 0             # optional Newton start (2M values)
//   v0 = 0 0                  # optional explicit particle means
//   [output]
//   dir = out
//   precision = 17

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "balnet/analysis.hpp"
#include "balnet/balance.hpp"
#include "balnet/model.hpp"

namespace balnet {

enum class RunMode { Limit, Particle, Compare };

const char* to_string(RunMode m);
RunMode parse_mode(std::string_view text);

struct ScenarioConfig {
  std::string name;
  RunMode mode = RunMode::Compare;
  Model model;

  int n = 1000;
  double dt = 1e-3;
  double horizon = 5.0;
  std::uint64_t seed = 1;
  int stride = 10;
  int snapshot_stride = 0;
  int quadrature_order = kDefaultQuadratureOrder;
  BalanceOptions balance;
  CompareTolerances tolerances;

  double k_e0 = 1.0;
  double k_i0 = 1.0;
  std::optional<Eigen::VectorXd> v_guess;
  std::optional<Eigen::VectorXd> v0;

  std::string output_dir = "out";
  int precision = 17;

  /// Throws ValidationError.
  void validate() const;
};

/// Throws ParseError (with line number) or ValidationError.
ScenarioConfig parse_config(std::string_view text);

ScenarioConfig load_config(const std::string& path);

/// Names of the bundled scenarios.
std::vector<std::string> preset_names();
/// Config text of a bundled scenario; throws Error for unknown names.
std::string preset_text(const std::string& name);

}  // namespace balnet
