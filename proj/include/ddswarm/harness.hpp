#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddswarm/calibration.hpp"
#include "ddswarm/observables.hpp"
#include "ddswarm/scenario.hpp"

namespace ddswarm {

enum Layer : unsigned {
  kLayerSwarm = 1,
  kLayerContinuum = 2,
  kLayerReference = 4,
};

/// Comma-separated subset of swarm, continuum, reference.
unsigned parse_layers(const std::string& text);
std::string layers_to_string(unsigned layers);

struct StatisticalFloor {
  double closed_form = 0;
  double bootstrap = 0;
};

/// Expected L1 distance between a histogram of n draws from `probabilities`
/// and the probabilities themselves: sqrt(2/pi) sum sqrt(p (1 - p) / n),
/// and a multinomial bootstrap of the same quantity.
StatisticalFloor statistical_floor(const std::vector<double>& probabilities, std::uint64_t n_samples,
                                   std::uint64_t seed = 0, int replicates = 32);

/// Floor for n samples spread uniformly over `occupied_cells` cells.
StatisticalFloor statistical_floor_uniform(std::uint64_t n_samples, std::size_t occupied_cells,
                                           std::uint64_t seed = 0, int replicates = 32);

/// sum |a - b| * volume and sqrt(sum (a - b)^2 * volume).
double l1_distance(const std::vector<double>& a, const std::vector<double>& b, double volume);
double l2_distance(const std::vector<double>& a, const std::vector<double>& b, double volume);

struct RunOptions {
  unsigned layers = kLayerSwarm | kLayerReference;
  std::uint64_t seed = 0;
  /// Empty: keep everything in memory.
  std::filesystem::path out_dir;
  int workers = 1;
  bool write_samples = false;
  bool write_phase = true;
  bool refine_calibration = true;
  int bootstrap_replicates = 16;
  RoundingPolicy rounding = RoundingPolicy::Stochastic;
};

struct FrameMetrics {
  std::size_t index = 0;
  double time = 0;
  std::uint64_t step = 0;
  /// Swarm against reference |psi|^2 when both run.
  std::optional<double> swarm_reference_l1;
  std::optional<double> swarm_reference_l2;
  /// Swarm against the initial density.
  std::optional<double> swarm_initial_l1;
  std::optional<double> continuum_reference_l1;
  /// Floor of whichever swarm distance is the verdict for this frame.
  StatisticalFloor floor;
  std::optional<ObservableRecord> swarm;
  std::optional<ObservableRecord> reference;
  std::optional<double> moving_fraction;
  std::optional<double> reference_norm;
  std::optional<double> continuum_mass;
  std::optional<std::size_t> phase_clipped_links;
};

struct RunReport {
  std::string scenario;
  unsigned layers = 0;
  std::uint64_t seed = 0;
  std::uint64_t n_samples = 0;
  double moving_ratio = 0;
  double sound_speed_sq = 0;
  std::optional<CalibrationResult> calibration;
  double k_cal = 0;
  std::vector<FrameMetrics> frames;
  /// Largest swarm distance over its floor; agreement means <= 3.
  double max_floor_ratio = 0;
  bool agreement = false;
  std::uint64_t count_error = 0;
  std::array<std::int64_t, 3> impulse_count_error{0, 0, 0};
  double norm_drift = 0;
  double mass_drift = 0;
  std::vector<std::string> warnings;
  // Timing; kept out of the frame and metrics files.
  double wall_seconds = 0;
  double swarm_seconds = 0;
  double sample_steps = 0;
  double throughput = 0;
};

/// Steps the requested layers on the scenario's grid and frame times. When
/// `options.out_dir` is set, writes manifest.json, metrics.jsonl, report.json,
/// timing.json and one CSV per layer and frame under frames/.
RunReport run_scenario(const Scenario& scenario, const ValidatedConfig& config, const RunOptions& options);

std::string report_json(const RunReport& report, bool include_timing = true);

struct SweepEntry {
  double dx = 0;
  double c = 0;
  double dt = 0;
  std::array<int, 3> extent{1, 1, 1};
  DerivedCoefficients coefficients;
  double moving_ratio = 0;
  double moving_fraction = 0;
  double k_cal = 0;
  double max_l1 = 0;
  double max_floor_ratio = 0;
};

struct SweepReport {
  std::vector<SweepEntry> entries;
  bool moving_fraction_increases = false;
};

/// Reruns the scenario per grain. The physical box, dt and c dt / dx are
/// held fixed, so c shrinks with dx; d and k are recalibrated per grain.
SweepReport grain_sweep(const Scenario& scenario, const std::vector<double>& grains,
                        const ValidatedConfig& base, const RunOptions& options);

std::string sweep_json(const SweepReport& report);

}  // namespace ddswarm
