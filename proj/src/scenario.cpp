#include "ddswarm/scenario.hpp"

#include <cmath>
#include <numbers>

#include "ddswarm/calibration.hpp"
#include "ddswarm/error.hpp"
#include "ddswarm/io.hpp"

namespace ddswarm {

namespace {

std::array<double, 3> domain_center(const GridSpec& g) {
  std::array<double, 3> c{0, 0, 0};
  for (int a = 0; a < g.dims; ++a) c[a] = 0.5 * g.length(a);
  return c;
}

double trap_a(double omega, double mass) { return 0.5 * mass * omega * omega; }

double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "bad number for " + key + ": " + value);
  }
}

}  // namespace

double ramp_factor(double t, double ramp_time) {
  if (ramp_time <= 0.0 || t >= ramp_time) return 1.0;
  const double s = std::sin(0.5 * std::numbers::pi * t / ramp_time);
  return s * s;
}

Scenario make_scenario(const std::string& name, const ValidatedConfig& config) {
  const GridSpec& g = config.grid;
  const PhysicalConfig& p = config.physics;
  Scenario s;
  s.name = name;
  s.initial.center = domain_center(g);
  s.initial.sigma0 = 8.0 * g.dx;
  s.potential.center = s.initial.center;
  const double omega = p.h / (2.0 * p.mass * s.initial.sigma0 * s.initial.sigma0);
  s.frame_interval = 100.0 * g.dt;
  s.duration = 1000.0 * g.dt;

  if (name == "free_gaussian") {
    s.initial.kind = InitialKind::FreeGaussian;
  } else if (name == "harmonic_ground") {
    s.initial.kind = InitialKind::HarmonicGround;
    s.initial.omega = omega;
    s.potential.kind = PotentialKind::Harmonic;
    s.potential.a = trap_a(omega, p.mass);
  } else if (name == "displaced_gaussian") {
    s.initial.kind = InitialKind::DisplacedGaussian;
    s.initial.omega = omega;
    s.initial.offset[0] = s.initial.sigma0;
    s.potential.kind = PotentialKind::Harmonic;
    s.potential.a = trap_a(omega, p.mass);
  } else if (name == "plane_wave") {
    s.initial.kind = InitialKind::PlaneWave;
    // Nearest wavenumber to 0.2/dx that fits the periodic box.
    const double L = g.length(0);
    const double turns = std::max(1.0, std::round(0.2 / g.dx * L / (2.0 * std::numbers::pi)));
    s.initial.wavevector[0] = 2.0 * std::numbers::pi * turns / L;
    s.sound_speed_sq = 0.0;
  } else if (name == "custom") {
    s.initial.kind = InitialKind::Custom;
    s.sound_speed_sq = 0.0;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown scenario " + name);
  }
  return s;
}

void apply_overrides(Scenario& s, const std::map<std::string, std::string>& overrides, double mass) {
  static const char* axes = "xyz";
  for (const auto& [key, value] : overrides) {
    auto num = [&] { return parse_number(key, value); };
    bool done = true;
    if (key == "sigma0") s.initial.sigma0 = num();
    else if (key == "omega") {
      s.initial.omega = num();
      s.potential.a = trap_a(s.initial.omega, mass);
    } else if (key == "initial_file") s.initial.file = value;
    else if (key == "a") s.potential.a = num();
    else if (key == "ramp_time") s.potential.ramp_time = num();
    else if (key == "potential_file") s.potential.file = value;
    else if (key == "duration") s.duration = num();
    else if (key == "frame_interval") s.frame_interval = num();
    else if (key == "moving_ratio") s.moving_ratio = num();
    else if (key == "sound_speed_sq") s.sound_speed_sq = num();
    else if (key == "inertia") s.inertia = num();
    else if (key == "potential") {
      if (value == "none") s.potential.kind = PotentialKind::None;
      else if (value == "harmonic") s.potential.kind = PotentialKind::Harmonic;
      else if (value == "switched") s.potential.kind = PotentialKind::Switched;
      else if (value == "custom") s.potential.kind = PotentialKind::Custom;
      else throw Error(ErrorCode::InvalidConfig, "unknown potential " + value);
    } else done = false;
    if (done) continue;

    for (int a = 0; a < 3 && !done; ++a) {
      const std::string suffix = std::string("_") + axes[a];
      if (key == "center" + suffix) {
        s.initial.center[a] = num();
        s.potential.center[a] = s.initial.center[a];
        done = true;
      } else if (key == "k" + suffix) {
        s.initial.wavevector[a] = num();
        done = true;
      } else if (key == "offset" + suffix) {
        s.initial.offset[a] = num();
        done = true;
      }
    }
    if (!done) throw Error(ErrorCode::InvalidConfig, "unknown scenario key " + key);
  }
  // An explicit trap strength wins over the one implied by omega.
  if (const auto it = overrides.find("a"); it != overrides.end()) s.potential.a = parse_number("a", it->second);
}

void check_scenario(const Scenario& s, const ValidatedConfig& config) {
  if (!(s.duration > 0.0) || !(s.frame_interval > 0.0))
    throw Error(ErrorCode::InvalidConfig, "duration and frame_interval must be positive");
  if (s.duration < s.frame_interval)
    throw Error(ErrorCode::InvalidConfig, "duration shorter than frame_interval");
  if (s.potential.kind == PotentialKind::Switched && !(s.potential.ramp_time > 0.0))
    throw Error(ErrorCode::InvalidConfig, "switched potential needs ramp_time > 0");
  const GridSpec& g = config.grid;
  const double frame_steps = s.frame_interval / g.dt;
  if (std::abs(frame_steps - std::round(frame_steps)) > 1e-6 * frame_steps)
    throw Error(ErrorCode::ScenarioGridMismatch, "frame_interval is not a multiple of dt");
  auto inside = [&](const std::array<double, 3>& x) {
    for (int a = 0; a < g.dims; ++a)
      if (x[a] < 0.0 || x[a] > g.length(a)) return false;
    return true;
  };
  if (!inside(s.initial.center))
    throw Error(ErrorCode::ScenarioGridMismatch, "initial centre lies outside the grid");
  switch (s.initial.kind) {
    case InitialKind::FreeGaussian:
      if (!(s.initial.sigma0 > 0.0)) throw Error(ErrorCode::InvalidConfig, "sigma0 must be positive");
      if (s.initial.sigma0 < g.dx)
        throw Error(ErrorCode::ScenarioGridMismatch, "packet narrower than one cell");
      break;
    case InitialKind::HarmonicGround:
    case InitialKind::DisplacedGaussian:
      if (!(s.initial.omega > 0.0)) throw Error(ErrorCode::InvalidConfig, "omega must be positive");
      break;
    case InitialKind::PlaneWave:
      if (g.boundary != Boundary::Periodic)
        throw Error(ErrorCode::ScenarioGridMismatch, "plane waves need a periodic grid");
      break;
    case InitialKind::Custom:
      if (s.initial.file.empty()) throw Error(ErrorCode::InvalidConfig, "custom state needs initial_file");
      break;
  }
  if (s.potential.kind == PotentialKind::Custom && s.potential.file.empty())
    throw Error(ErrorCode::InvalidConfig, "custom potential needs potential_file");
}

bool potential_is_static(const PotentialSpec& spec) { return spec.kind != PotentialKind::Switched; }

ScalarField potential_at(const PotentialSpec& spec, const GridSpec& grid, double t) {
  switch (spec.kind) {
    case PotentialKind::None:
      return ScalarField(grid, 0.0);
    case PotentialKind::Custom:
      return read_scalar_table(spec.file, grid);
    case PotentialKind::Harmonic:
    case PotentialKind::Switched: {
      const double s = spec.kind == PotentialKind::Switched ? ramp_factor(t, spec.ramp_time) : 1.0;
      return sample_field(grid, [&](const std::array<double, 3>& x) {
        double r2 = 0.0;
        for (int a = 0; a < grid.dims; ++a) r2 += (x[a] - spec.center[a]) * (x[a] - spec.center[a]);
        return s * spec.a * r2;
      });
    }
  }
  return ScalarField(grid, 0.0);
}

WaveField initial_wave(const Scenario& s, const ValidatedConfig& config) {
  const GridSpec& g = config.grid;
  const PhysicalConfig& p = config.physics;
  switch (s.initial.kind) {
    case InitialKind::FreeGaussian:
      return gaussian_packet(g, s.initial.sigma0, s.initial.center, s.initial.wavevector);
    case InitialKind::HarmonicGround: {
      PotentialSpec trap = s.potential;
      trap.kind = PotentialKind::Harmonic;
      trap.a = trap_a(s.initial.omega, p.mass);
      return discrete_ground_state(g, p, potential_at(trap, g, 0.0));
    }
    case InitialKind::DisplacedGaussian: {
      const double sigma = std::sqrt(p.h / (2.0 * p.mass * s.initial.omega));
      std::array<double, 3> c = s.initial.center;
      for (int a = 0; a < 3; ++a) c[a] += s.initial.offset[a];
      return gaussian_packet(g, sigma, c, s.initial.wavevector);
    }
    case InitialKind::PlaneWave:
      return plane_wave(g, s.initial.wavevector);
    case InitialKind::Custom:
      return read_wave_frame(s.initial.file, g);
  }
  return WaveField(g);
}

double scenario_sound_speed_sq(const Scenario& s, const ValidatedConfig& config) {
  if (s.sound_speed_sq) return *s.sound_speed_sq;
  const PhysicalConfig& p = config.physics;
  switch (s.initial.kind) {
    case InitialKind::FreeGaussian:
      return kFreePacketPressureMatch * packet_sound_speed_sq(p.h, p.mass, s.initial.sigma0);
    case InitialKind::HarmonicGround:
    case InitialKind::DisplacedGaussian:
      return p.h * s.initial.omega / (2.0 * p.mass);
    case InitialKind::PlaneWave:
    case InitialKind::Custom:
      return 0.0;
  }
  return 0.0;
}

}  // namespace ddswarm
