#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ddswarm {

enum class Boundary { Periodic, Reflecting };

const char* to_string(Boundary b);

/// Physical constants of the simulated particle and of its swarm.
///
/// `c` is the single nonzero speed a sample can carry. It is a model input,
/// the limit speed of sample movement, and has nothing to do with light.
struct PhysicalConfig {
  double h = 1.0;       // action quantum
  double mass = 1.0;    // particle mass M
  double charge = 0.0;  // particle charge Q
  double c = 1.0;       // sample speed modulus
  std::uint64_t n_samples = 1;
  int dims = 1;

  double sample_mass() const { return mass / static_cast<double>(n_samples); }
  double sample_charge() const { return charge / static_cast<double>(n_samples); }
};

/// Uniform cubic grid. Cell `i` along an axis covers [i*dx, (i+1)*dx).
struct GridSpec {
  double dx = 0.1;
  double dt = 0.001;
  std::array<int, 3> extent{2, 1, 1};
  Boundary boundary = Boundary::Periodic;
  int dims = 1;

  std::size_t cell_count() const;
  double cell_volume() const;
  double length(int axis) const { return extent[axis] * dx; }
  bool same_geometry(const GridSpec& other) const;
};

/// Grain-dependent coefficients. Always recomputed from the configuration.
struct DerivedCoefficients {
  double intensity = 0;  // I = h^2 / (2 m^2 dx^3)
  double kappa = 0;      // h / (m dx)
  double gamma = 0;      // (h / 2M) / dx^2
  double alpha = 0;      // -3 h^2 / (m dx^2)
  double g = 1.0;        // inertia coefficient, 1 by unit choice
};

DerivedCoefficients derive_coefficients(const PhysicalConfig& physics, const GridSpec& grid);

/// Intensity form quoted alongside the two-cell argument, h^3 / (m^3 c dx^3).
/// Documentation only; nothing in the engine consumes it.
double alternative_intensity(const PhysicalConfig& physics, const GridSpec& grid);

struct ValidatedConfig {
  PhysicalConfig physics;
  GridSpec grid;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  DerivedCoefficients coefficients() const { return derive_coefficients(physics, grid); }
};

/// Largest moving fraction before the swarm counts as relativistic.
inline constexpr double kRelativisticMovingFraction = 0.2;
/// c * dt must not exceed dx / kScaleSeparation.
inline constexpr double kScaleSeparation = 10.0;

/// Checks scales and derives coefficients. `moving_ratio` is the rebalancing
/// ratio d the swarm will run with, if already known; it only feeds the
/// relativistic-regime warning.
ValidatedConfig validate(const PhysicalConfig& physics, const GridSpec& grid,
                         std::uint64_t seed = 0,
                         std::optional<double> moving_ratio = std::nullopt);

/// Moving fraction of a rest cell balanced to ratio d: s / n = d / (1 + d).
inline double moving_fraction(double moving_ratio) { return moving_ratio / (1.0 + moving_ratio); }

/// Scale factors between user units and internal units (h = 1, M = 1).
/// Lengths keep their unit; the time unit is M L^2 / h.
struct UnitScale {
  double mass = 1.0;
  double action = 1.0;
  double length = 1.0;
  double time = 1.0;
};

struct InternalConfig {
  PhysicalConfig physics;
  GridSpec grid;
  UnitScale scale;
};

InternalConfig to_internal_units(const PhysicalConfig& physics, const GridSpec& grid);
InternalConfig from_internal_units(const InternalConfig& internal);

}  // namespace ddswarm
