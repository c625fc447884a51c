#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <sstream>

#include "ddswarm/config_file.hpp"
#include "ddswarm/error.hpp"
#include "ddswarm/harness.hpp"
#include "ddswarm/io.hpp"

namespace {

using namespace ddswarm;

std::map<std::string, std::string> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorCode::InvalidConfig, "expected key=value, got " + item);
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

std::vector<double> parse_grains(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "bad grain " + item);
    }
  }
  return out;
}

struct Common {
  std::string config;
  std::string scenario = "free_gaussian";
  std::string layers = "swarm,reference";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  int workers = 1;
  std::vector<std::string> params;
  bool samples = false;
  bool no_phase = false;
  bool no_refine = false;
  std::string rounding = "stochastic";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value configuration file")->required();
  cmd->add_option("--scenario", c.scenario,
                  "free_gaussian, harmonic_ground, displaced_gaussian, plane_wave or custom");
  cmd->add_option("--layers", c.layers, "comma list of swarm, continuum, reference");
  cmd->add_option("--seed", c.seed, "RNG seed (default: the config's seed)");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--workers", c.workers, "swarm worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--param", c.params, "scenario override key=value (repeatable)");
  cmd->add_flag("--samples", c.samples, "also write per-sample frames");
  cmd->add_flag("--no-phase", c.no_phase, "skip phase reconstruction");
  cmd->add_flag("--no-refine", c.no_refine, "use the analytic diffusion ratio without the refinement run");
  cmd->add_option("--rounding", c.rounding, "stochastic or nearest");
}

struct Prepared {
  ValidatedConfig config;
  Scenario scenario;
  RunOptions options;
};

Prepared prepare(const Common& c) {
  const RawConfig raw = parse_config_file(c.config);
  const InternalConfig internal = to_internal_units(raw.physics, raw.grid);
  Prepared p;
  p.config = validate(internal.physics, internal.grid, raw.seed);
  p.scenario = make_scenario(c.scenario, p.config);
  apply_overrides(p.scenario, parse_params(c.params), p.config.physics.mass);
  p.options.layers = parse_layers(c.layers);
  p.options.seed = c.seed_given ? c.seed : raw.seed;
  p.options.out_dir = c.out;
  p.options.workers = c.workers;
  p.options.write_samples = c.samples;
  p.options.write_phase = !c.no_phase;
  p.options.refine_calibration = !c.no_refine;
  if (c.rounding == "nearest") p.options.rounding = RoundingPolicy::Nearest;
  else if (c.rounding != "stochastic") throw Error(ErrorCode::InvalidConfig, "unknown rounding " + c.rounding);
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical diffusion swarm simulator"};
  app.require_subcommand(1);

  Common run_opts;
  CLI::App* run = app.add_subcommand("run", "run one scenario");
  add_common(run, run_opts);

  Common sweep_opts;
  std::string grains;
  CLI::App* sweep = app.add_subcommand("sweep", "rerun a scenario over several grains");
  add_common(sweep, sweep_opts);
  sweep->add_option("--grains", grains, "comma list of dx values")->required();

  std::string run_dir;
  CLI::App* report = app.add_subcommand("report", "print the report of a finished run");
  report->add_option("--run", run_dir, "run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      run_opts.seed_given = run->count("--seed") > 0;
      const Prepared p = prepare(run_opts);
      const RunReport rep = run_scenario(p.scenario, p.config, p.options);
      std::cout << report_json(rep) << "\n";
    } else if (sweep->parsed()) {
      sweep_opts.seed_given = sweep->count("--seed") > 0;
      const Prepared p = prepare(sweep_opts);
      const SweepReport rep = grain_sweep(p.scenario, parse_grains(grains), p.config, p.options);
      const std::string text = sweep_json(rep);
      if (!p.options.out_dir.empty()) write_text(p.options.out_dir / "sweep.json", text + "\n");
      std::cout << text << "\n";
    } else if (report->parsed()) {
      std::cout << read_text(std::filesystem::path(run_dir) / "report.json");
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
