#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>

#include "ddswarm/quantum.hpp"
#include "ddswarm/units.hpp"

namespace ddswarm {

enum class InitialKind { FreeGaussian, HarmonicGround, DisplacedGaussian, PlaneWave, Custom };
enum class PotentialKind { None, Harmonic, Switched, Custom };

struct InitialState {
  InitialKind kind = InitialKind::FreeGaussian;
  double sigma0 = 0;                       // FreeGaussian
  std::array<double, 3> center{0, 0, 0};   // FreeGaussian, trap centre for the others
  std::array<double, 3> wavevector{0, 0, 0};
  double omega = 0;                        // HarmonicGround, DisplacedGaussian
  std::array<double, 3> offset{0, 0, 0};   // DisplacedGaussian
  std::string file;                        // Custom: ix,iy,iz,psi_r,psi_i
};

/// V_pot = a |x - center|^2, switched on by sin^2(pi t / 2 tau) for t < tau.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::None;
  double a = 0;
  double ramp_time = 0;
  std::array<double, 3> center{0, 0, 0};
  std::string file;  // Custom: ix,iy,iz,V
};

struct Scenario {
  std::string name = "free_gaussian";
  InitialState initial;
  PotentialSpec potential;
  double duration = 0;
  double frame_interval = 0;
  /// Rebalancing ratio for the swarm; calibrated when unset.
  std::optional<double> moving_ratio;
  /// Sound speed squared the swarm and continuum use; derived from the
  /// initial state when unset.
  std::optional<double> sound_speed_sq;
  /// Inertia coefficient of the continuum layer (0 = omitted).
  double inertia = 0;
};

/// Ratio of the isothermal pressure that best follows the free spreading of
/// a Gaussian packet to the packet's initial quantum pressure.
inline constexpr double kFreePacketPressureMatch = 0.885;

/// Named scenario with defaults scaled to the grid: width 8 cells, trap
/// frequency matching that width, wavenumber 0.2 / dx, ten frames.
/// Names: free_gaussian, harmonic_ground, displaced_gaussian, plane_wave, custom.
Scenario make_scenario(const std::string& name, const ValidatedConfig& config);

/// Applies `key=value` overrides: sigma0, center_x/y/z, k_x/y/z, omega,
/// offset_x/y/z, initial_file, potential (none|harmonic|switched|custom),
/// a, ramp_time, potential_file, duration, frame_interval, moving_ratio,
/// sound_speed_sq, inertia. Unknown keys raise InvalidConfig.
void apply_overrides(Scenario& scenario, const std::map<std::string, std::string>& overrides,
                     double mass = 1.0);

/// Throws InvalidConfig / ScenarioGridMismatch on inconsistent scenarios.
void check_scenario(const Scenario& scenario, const ValidatedConfig& config);

/// External potential energy at time t.
ScalarField potential_at(const PotentialSpec& spec, const GridSpec& grid, double t);
bool potential_is_static(const PotentialSpec& spec);

/// Initial wave function of the scenario.
WaveField initial_wave(const Scenario& scenario, const ValidatedConfig& config);

/// Sound speed squared used by the swarm and continuum layers.
double scenario_sound_speed_sq(const Scenario& scenario, const ValidatedConfig& config);

/// Ramp factor sin^2(pi t / 2 tau), 1 after tau.
double ramp_factor(double t, double ramp_time);

}  // namespace ddswarm
