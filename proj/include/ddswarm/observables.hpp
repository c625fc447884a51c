#pragma once

#include <array>
#include <vector>

#include "ddswarm/quantum.hpp"
#include "ddswarm/swarm.hpp"

namespace ddswarm {

struct ObservableRecord {
  double time = 0;
  std::array<double, 3> impulse{0, 0, 0};
  double kinetic = 0;
  double potential = 0;
  std::array<double, 3> angular{0, 0, 0};
  std::array<double, 3> mean_position{0, 0, 0};
};

/// Sum over cells of m c (n_plus - n_minus) per axis; equals the direct
/// per-sample impulse sum.
std::array<double, 3> estimate_impulse(const std::vector<CellStats>& stats,
                                       const PhysicalConfig& physics);

/// Direct sum of m v over samples.
std::array<double, 3> direct_impulse(const SwarmState& swarm, const PhysicalConfig& physics);

/// Sum over cells and axes of m c^2 n_u^2 / (2 n(r)), n_u the net count.
/// This is the cell's mass n(r) m times v_mean^2 / 2.
double estimate_kinetic(const std::vector<CellStats>& stats, const PhysicalConfig& physics);

/// Per-cell n(r) m |v_mean|^2 / 2 with v_mean = c n_u / n(r), summed.
double kinetic_from_mean_velocity(const std::vector<CellStats>& stats,
                                  const PhysicalConfig& physics);

/// Sum over cells of n(r) / n_total V_pot(r).
double estimate_potential(const std::vector<CellStats>& stats, const ScalarField& v_pot);

/// Sum over samples of (pos - origin) x m v.
std::array<double, 3> estimate_angular(const SwarmState& swarm, const PhysicalConfig& physics,
                                       const std::array<double, 3>& origin);

/// Mean sample position.
std::array<double, 3> mean_position(const SwarmState& swarm, int dims);

ObservableRecord observe_swarm(const SwarmState& swarm, const GridSpec& grid,
                               const PhysicalConfig& physics, const ScalarField& v_pot,
                               const std::array<double, 3>& origin);

/// Expectation values of the same quantities for a wave function.
/// Kinetic energy is <T> from the discrete Laplacian.
ObservableRecord observe_wave(const WaveField& psi, const PhysicalConfig& physics,
                              const ScalarField& v_pot, const std::array<double, 3>& origin);

struct EhrenfestReport {
  std::size_t frames = 0;
  double max_position_deviation = 0;  // max over frames and axes
  double max_impulse_deviation = 0;
  double position_band = 0;           // statistical band used for the verdict
  double impulse_band = 0;
  double reference_energy_drift = 0;  // relative
  bool within_band = false;
};

/// Compares swarm and reference traces frame by frame. `position_band` and
/// `impulse_band` are the allowed deviations (typically 3 standard errors).
EhrenfestReport ehrenfest_check(const std::vector<ObservableRecord>& swarm,
                                const std::vector<ObservableRecord>& reference,
                                double position_band, double impulse_band, int dims);

/// Mean of each field over a window of records.
ObservableRecord window_average(const std::vector<ObservableRecord>& records);

}  // namespace ddswarm
