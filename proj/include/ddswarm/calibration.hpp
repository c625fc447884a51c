#pragma once

#include <string>
#include <vector>

#include "ddswarm/swarm.hpp"
#include "ddswarm/units.hpp"

namespace ddswarm {

/// Squared sound speed of the quantum pressure of a Gaussian of width
/// sigma, h^2 / (4 M^2 sigma^2). For a harmonic ground state this is
/// h omega / (2 M).
double packet_sound_speed_sq(double h, double mass, double sigma);

/// Isothermal sound speed squared carried by a swarm balanced at ratio d:
/// c^2 (d / (1 + d)) / dims.
double swarm_sound_speed_sq(double moving_ratio, double c, int dims);

/// Inverse of swarm_sound_speed_sq, before clipping.
double analytic_moving_ratio(double sound_speed_sq, double c, int dims);

struct CalibrationOptions {
  /// Sound speed squared the swarm has to realise, i.e. the diffusion
  /// intensity per unit mass.
  double target_sound_speed_sq = 0;
  bool refine = true;
  int cells = 16;
  std::uint64_t samples = 400000;
  double amplitude = 0.3;
  int max_iterations = 4;
  double tolerance = 0.01;
  /// Residual above which the fit is declared diverged.
  double divergence_threshold = 0.25;
  RoundingPolicy rounding = RoundingPolicy::Stochastic;
  int workers = 1;
};

struct CalibrationResult {
  double moving_ratio = 0;
  double analytic_ratio = 0;
  double measured_sound_speed_sq = 0;
  double residual = 0;
  int iterations = 0;
  bool clipped = false;
  std::vector<std::string> warnings;
};

/// Chooses d so the swarm's pressure flux matches the target. The analytic
/// ratio is refined by letting a standing acoustic mode of the swarm swing
/// through its first zero and comparing the time with the continuum model
/// at the target intensity. d is clipped to (0, 0.5].
CalibrationResult calibrate_diffusion(const ValidatedConfig& config, const CalibrationOptions& options);

/// Time at which a standing cosine mode of the swarm first crosses zero.
double swarm_mode_crossing(const ValidatedConfig& config, double moving_ratio,
                           const CalibrationOptions& options);

/// Same for the continuum model with sound speed squared cs2.
double continuum_mode_crossing(const ValidatedConfig& config, double sound_speed_sq,
                               const CalibrationOptions& options);

}  // namespace ddswarm
