// balnet: run bundled or file-based scenarios of the balanced E/I network.
//
//   balnet run --config scenario.ini [--mode compare] [--n 4000] [--seed 7] [--out DIR]
//   balnet run --preset test1
//   balnet presets [NAME]
//
// NTHREADS caps the OpenMP worker count; results do not depend on it.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "balnet/config.hpp"
#include "balnet/scenario.hpp"

namespace {

int workers_from_env() {
  const char* s = std::getenv("NTHREADS");
  if (!s || !*s) return 0;
  const int v = std::atoi(s);
  return v > 0 ? v : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balanced E/I network: limit solver, particle simulator and comparison"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario and write CSV outputs");
  std::string config_path, preset, mode, out_dir;
  int n = 0;
  std::uint64_t seed = 0;
  auto* source = run->add_option_group("source");
  source->add_option("--config", config_path, "Scenario file")->check(CLI::ExistingFile);
  source->add_option("--preset", preset, "Bundled scenario name");
  source->require_option(1);
  run->add_option("--mode", mode, "limit | particle | compare")
      ->check(CLI::IsMember({"limit", "particle", "compare"}));
  auto* n_opt = run->add_option("--n", n, "Neurons per population")->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed, "Random seed");
  run->add_option("--out", out_dir, "Output directory");

  auto* presets = app.add_subcommand("presets", "List bundled scenarios or print one");
  std::string preset_name;
  presets->add_option("name", preset_name, "Scenario to print");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*presets) {
      if (preset_name.empty()) {
        for (const auto& name : balnet::preset_names()) std::cout << name << '\n';
      } else {
        std::cout << balnet::preset_text(preset_name);
      }
      return balnet::kExitOk;
    }

    auto cfg = config_path.empty() ? balnet::parse_config(balnet::preset_text(preset))
                                   : balnet::load_config(config_path);
    if (!mode.empty()) cfg.mode = balnet::parse_mode(mode);
    if (*n_opt) cfg.n = n;
    if (*seed_opt) cfg.seed = seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    return balnet::run_scenario(cfg, std::cerr, workers_from_env()).exit_code;
  } catch (const balnet::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const balnet::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return balnet::kExitUsage;
}
