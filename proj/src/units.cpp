#include "ddswarm/units.hpp"

#include <cmath>
#include <sstream>

#include "ddswarm/error.hpp"

namespace ddswarm {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::ScaleSeparationViolated: return "ScaleSeparationViolated";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::PositionOutOfDomain: return "PositionOutOfDomain";
    case ErrorCode::PairNotOpposite: return "PairNotOpposite";
    case ErrorCode::PairTooFar: return "PairTooFar";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::CalibrationDiverged: return "CalibrationDiverged";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::UnstableStep: return "UnstableStep";
    case ErrorCode::LinearSolveFailed: return "LinearSolveFailed";
    case ErrorCode::NormDrift: return "NormDrift";
    case ErrorCode::NodeCell: return "NodeCell";
    case ErrorCode::NodeCrossing: return "NodeCrossing";
    case ErrorCode::ScenarioGridMismatch: return "ScenarioGridMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveScale:
    case ErrorCode::ScaleSeparationViolated:
    case ErrorCode::InvalidConfig:
    case ErrorCode::NegativeDensity:
    case ErrorCode::ScenarioGridMismatch:
    case ErrorCode::Io:
      return true;
    default:
      return false;
  }
}

const char* to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "reflecting"; }

std::size_t GridSpec::cell_count() const {
  std::size_t n = 1;
  for (int a = 0; a < dims; ++a) n *= static_cast<std::size_t>(extent[a]);
  return n;
}

double GridSpec::cell_volume() const { return std::pow(dx, dims); }

bool GridSpec::same_geometry(const GridSpec& other) const {
  if (dims != other.dims || dx != other.dx || boundary != other.boundary) return false;
  for (int a = 0; a < dims; ++a)
    if (extent[a] != other.extent[a]) return false;
  return true;
}

DerivedCoefficients derive_coefficients(const PhysicalConfig& physics, const GridSpec& grid) {
  const double h = physics.h;
  const double m = physics.sample_mass();
  const double dx = grid.dx;
  DerivedCoefficients k;
  k.intensity = h * h / (2.0 * m * m * dx * dx * dx);
  k.kappa = h / (m * dx);
  k.gamma = (h / (2.0 * physics.mass)) * (1.0 / (dx * dx));
  k.alpha = -3.0 * h * h / (m * dx * dx);
  k.g = 1.0;
  return k;
}

double alternative_intensity(const PhysicalConfig& physics, const GridSpec& grid) {
  const double m = physics.sample_mass();
  return std::pow(physics.h, 3) / (std::pow(m, 3) * physics.c * std::pow(grid.dx, 3));
}

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream os;
    os << name << " must be positive and finite, got " << value;
    throw Error(ErrorCode::NonPositiveScale, os.str());
  }
}

}  // namespace

ValidatedConfig validate(const PhysicalConfig& physics, const GridSpec& grid, std::uint64_t seed,
                         std::optional<double> moving_ratio) {
  require_positive(grid.dx, "dx");
  require_positive(grid.dt, "dt");
  require_positive(physics.c, "c");
  require_positive(physics.mass, "mass");
  require_positive(physics.h, "h");
  if (physics.n_samples == 0) throw Error(ErrorCode::NonPositiveScale, "n_samples must be >= 1");
  if (physics.dims < 1 || physics.dims > 3)
    throw Error(ErrorCode::InvalidConfig, "dims must be 1, 2 or 3");
  if (grid.dims != physics.dims)
    throw Error(ErrorCode::InvalidConfig, "grid dims disagree with physical dims");
  for (int a = 0; a < grid.dims; ++a) {
    if (grid.extent[a] < 2) {
      std::ostringstream os;
      os << "extent along axis " << a << " must be >= 2, got " << grid.extent[a];
      throw Error(ErrorCode::InvalidConfig, os.str());
    }
  }
  if (physics.c * grid.dt > grid.dx / kScaleSeparation) {
    std::ostringstream os;
    os << "c*dt = " << physics.c * grid.dt << " exceeds dx/" << kScaleSeparation << " = "
       << grid.dx / kScaleSeparation;
    throw Error(ErrorCode::ScaleSeparationViolated, os.str());
  }

  ValidatedConfig out;
  out.physics = physics;
  out.grid = grid;
  out.seed = seed;
  if (moving_ratio) {
    const double f = moving_fraction(*moving_ratio);
    if (f > kRelativisticMovingFraction) {
      std::ostringstream os;
      os << "RelativisticRegime: expected moving fraction " << f << " exceeds "
         << kRelativisticMovingFraction;
      out.warnings.push_back(os.str());
    }
  }
  return out;
}

InternalConfig to_internal_units(const PhysicalConfig& physics, const GridSpec& grid) {
  InternalConfig out;
  out.scale.mass = physics.mass;
  out.scale.action = physics.h;
  out.scale.length = 1.0;
  out.scale.time = physics.mass * out.scale.length * out.scale.length / physics.h;

  const double velocity = out.scale.length / out.scale.time;
  out.physics = physics;
  out.physics.h = physics.h / out.scale.action;
  out.physics.mass = physics.mass / out.scale.mass;
  out.physics.c = physics.c / velocity;
  out.grid = grid;
  out.grid.dx = grid.dx / out.scale.length;
  out.grid.dt = grid.dt / out.scale.time;
  return out;
}

InternalConfig from_internal_units(const InternalConfig& internal) {
  InternalConfig out = internal;
  const UnitScale& s = internal.scale;
  const double velocity = s.length / s.time;
  out.physics.h = internal.physics.h * s.action;
  out.physics.mass = internal.physics.mass * s.mass;
  out.physics.c = internal.physics.c * velocity;
  out.grid.dx = internal.grid.dx * s.length;
  out.grid.dt = internal.grid.dt * s.time;
  out.scale = UnitScale{};
  return out;
}

}  // namespace ddswarm
