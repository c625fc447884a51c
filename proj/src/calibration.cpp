#include "ddswarm/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ddswarm/continuum.hpp"
#include "ddswarm/error.hpp"

namespace ddswarm {

double packet_sound_speed_sq(double h, double mass, double sigma) {
  return h * h / (4.0 * mass * mass * sigma * sigma);
}

double swarm_sound_speed_sq(double moving_ratio, double c, int dims) {
  return c * c * moving_fraction(moving_ratio) / dims;
}

double analytic_moving_ratio(double sound_speed_sq, double c, int dims) {
  const double theta = dims * sound_speed_sq / (c * c);
  if (theta >= 1.0) return std::numeric_limits<double>::infinity();
  return theta / (1.0 - theta);
}

namespace {

constexpr double kMaxRatio = 0.5;

GridSpec mode_grid(const ValidatedConfig& config, const CalibrationOptions& options) {
  GridSpec g = config.grid;
  g.boundary = Boundary::Periodic;
  g.extent = {options.cells, 1, 1};
  for (int a = 1; a < g.dims; ++a) g.extent[a] = 2;
  return g;
}

ScalarField mode_density(const GridSpec& g, double amplitude) {
  const double k = 2.0 * std::numbers::pi / g.length(0);
  return sample_field(g, [&](const std::array<double, 3>& x) { return 1.0 + amplitude * std::cos(k * x[0]); });
}

// Projection of a per-cell field on cos(k x), normalised by its mean.
double mode_amplitude(const GridSpec& g, const std::vector<double>& values) {
  const double k = 2.0 * std::numbers::pi / g.length(0);
  double proj = 0.0, total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    proj += values[i] * std::cos(k * cell_center(g, cell_coords(g, i)[0]));
    total += values[i];
  }
  return 2.0 * proj / total;
}

template <typename Step>
double first_crossing(double dt, std::uint64_t max_steps, double a0, Step&& step) {
  double prev = a0;
  for (std::uint64_t s = 1; s <= max_steps; ++s) {
    const double a = step();
    if (a <= 0.0) return dt * (static_cast<double>(s - 1) + prev / (prev - a));
    prev = a;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::uint64_t crossing_budget(const GridSpec& g, double sound_speed_sq) {
  const double quarter = g.length(0) / (4.0 * std::sqrt(sound_speed_sq));
  return static_cast<std::uint64_t>(std::ceil(4.0 * quarter / g.dt)) + 10;
}

}  // namespace

double swarm_mode_crossing(const ValidatedConfig& config, double moving_ratio,
                           const CalibrationOptions& options) {
  ValidatedConfig local = config;
  local.grid = mode_grid(config, options);
  local.physics.n_samples = options.samples;
  const GridSpec& g = local.grid;
  SwarmState swarm = sample_initial_swarm(mode_density(g, options.amplitude), nullptr, options.samples,
                                          local.physics.c, config.seed ^ mix64(kStreamCalibration));
  SwarmParams params;
  params.moving_ratio = moving_ratio;
  params.rounding = options.rounding;
  params.workers = options.workers;
  Potential v = Potential::zero(g);
  std::vector<double> counts(g.cell_count());
  auto amplitude = [&] {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t i = 0; i < swarm.size(); ++i)
      counts[cell_of(g, {swarm.pos[0][i], swarm.pos[1][i], swarm.pos[2][i]})] += 1.0;
    return mode_amplitude(g, counts);
  };
  const double cs2 = std::max(swarm_sound_speed_sq(moving_ratio, local.physics.c, g.dims), 1e-300);
  return first_crossing(g.dt, 3 * crossing_budget(g, cs2), amplitude(), [&] {
    full_step(swarm, v, local, params);
    return amplitude();
  });
}

double continuum_mode_crossing(const ValidatedConfig& config, double sound_speed_sq,
                               const CalibrationOptions& options) {
  const GridSpec g = mode_grid(config, options);
  ScalarField rho = mode_density(g, options.amplitude);
  const double norm = rho.integral();
  for (double& r : rho.v) r /= norm;
  const ContinuumCoefficients coeffs = ContinuumCoefficients::isothermal(sound_speed_sq, config.physics);
  ContinuumState state{DensityField{rho, true}, ImpulseField(g), 0.0};
  const Potential v = Potential::zero(g);
  const double dt = std::min(g.dt, continuum_stable_dt(g, coeffs, 0.2));
  return first_crossing(dt, 3 * crossing_budget(g, sound_speed_sq) * static_cast<std::uint64_t>(g.dt / dt + 1),
                        mode_amplitude(g, state.rho.rho.v), [&] {
                          continuum_step(state, v, coeffs, dt);
                          return mode_amplitude(g, state.rho.rho.v);
                        });
}

CalibrationResult calibrate_diffusion(const ValidatedConfig& config, const CalibrationOptions& options) {
  CalibrationResult res;
  const double target = options.target_sound_speed_sq;
  const double c = config.physics.c;
  const int dims = config.grid.dims;
  if (!(target >= 0.0)) throw Error(ErrorCode::InvalidConfig, "target intensity must be non-negative");
  res.analytic_ratio = analytic_moving_ratio(target, c, dims);
  if (target == 0.0) return res;

  auto clip = [&](double d) {
    if (d > kMaxRatio) {
      res.clipped = true;
      return kMaxRatio;
    }
    return d;
  };
  double d = clip(res.analytic_ratio);
  res.moving_ratio = d;
  res.measured_sound_speed_sq = swarm_sound_speed_sq(d, c, dims);
  res.residual = std::abs(res.measured_sound_speed_sq / target - 1.0);

  if (options.refine && !res.clipped) {
    const double t_ref = continuum_mode_crossing(config, target, options);
    for (int it = 0; it < options.max_iterations; ++it) {
      const double t_swarm = swarm_mode_crossing(config, d, options);
      ++res.iterations;
      if (!std::isfinite(t_swarm) || !std::isfinite(t_ref))
        throw Error(ErrorCode::CalibrationDiverged, "acoustic mode never crossed zero");
      res.measured_sound_speed_sq = target * (t_ref / t_swarm) * (t_ref / t_swarm);
      res.moving_ratio = d;
      res.residual = std::abs(res.measured_sound_speed_sq / target - 1.0);
      if (res.residual <= options.tolerance) break;
      const double theta = moving_fraction(d) * target / res.measured_sound_speed_sq;
      if (theta >= 1.0) {
        res.clipped = true;
        res.moving_ratio = kMaxRatio;
        break;
      }
      const double next = clip(theta / (1.0 - theta));
      if (next == d) break;
      d = next;
    }
  }
  if (res.clipped)
    res.warnings.push_back("RelativisticRegime: required ratio exceeds 0.5, clipped");
  if (moving_fraction(res.moving_ratio) > kRelativisticMovingFraction)
    res.warnings.push_back("RelativisticRegime: moving fraction " +
                           std::to_string(moving_fraction(res.moving_ratio)) + " above " +
                           std::to_string(kRelativisticMovingFraction));
  if (!res.clipped && res.residual > options.divergence_threshold)
    throw Error(ErrorCode::CalibrationDiverged,
                "calibration residual " + std::to_string(res.residual) + " above threshold");
  return res;
}

}  // namespace ddswarm
