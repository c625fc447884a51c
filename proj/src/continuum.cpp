#include "ddswarm/continuum.hpp"

#include <algorithm>
#include <cmath>

#include "ddswarm/error.hpp"

namespace ddswarm {

ContinuumCoefficients ContinuumCoefficients::from_grain(const DerivedCoefficients& d,
                                                        const PhysicalConfig& physics) {
  ContinuumCoefficients c;
  c.intensity = d.intensity;
  c.kappa = d.kappa;
  c.mass = physics.mass;
  return c;
}

ContinuumCoefficients ContinuumCoefficients::isothermal(double sound_speed_sq,
                                                        const PhysicalConfig& physics, double inertia) {
  ContinuumCoefficients c;
  c.inertia = inertia;
  c.intensity = physics.mass * sound_speed_sq;
  c.kappa = 1.0;
  c.mass = physics.mass;
  return c;
}

namespace {

// Cell-centred impulse from the two faces of a cell along `axis`.
double cell_value(const GridSpec& g, const std::vector<double>& faces, std::size_t i, int axis) {
  std::size_t lo;
  const double below = neighbor(g, i, axis, -1, lo) ? faces[lo] : 0.0;
  return 0.5 * (faces[i] + below);
}

// Central difference of a cell field along `axis`, mirror ghosts at walls.
double central(const GridSpec& g, const std::vector<double>& f, std::size_t i, int axis) {
  std::size_t up = i, down = i;
  const double fu = neighbor(g, i, axis, +1, up) ? f[up] : f[i];
  const double fd = neighbor(g, i, axis, -1, down) ? f[down] : f[i];
  return (fu - fd) / (2.0 * g.dx);
}

// Nearly empty cells carry no momentum flux.
constexpr double kFluxFloor = 1e-8;

}  // namespace

ImpulseField cell_impulse(const ImpulseField& faces) {
  const GridSpec& g = faces.grid;
  ImpulseField out(g);
  for (int a = 0; a < g.dims; ++a)
    for (std::size_t i = 0; i < out.size(); ++i) out.v[a][i] = cell_value(g, faces.v[a], i, a);
  return out;
}

ImpulseField face_impulse_from_cells(const ImpulseField& cells) {
  const GridSpec& g = cells.grid;
  ImpulseField out(g);
  for (int a = 0; a < g.dims; ++a)
    for (std::size_t i = 0; i < out.size(); ++i) {
      std::size_t j;
      if (neighbor(g, i, a, +1, j)) out.v[a][i] = 0.5 * (cells.v[a][i] + cells.v[a][j]);
    }
  return out;
}

ImpulseField dpdt(const DensityField& rho, const Potential& V, const ContinuumCoefficients& coeffs) {
  const GridSpec& g = rho.rho.grid;
  require_same_grid(g, V.values.grid, "dpdt potential");
  const auto cells = static_cast<std::int64_t>(g.cell_count());
  ImpulseField out(g);
  const std::vector<double>& r = rho.rho.v;
  const std::vector<double>& v = V.values.v;
  const double inv_dx = 1.0 / g.dx;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < cells; ++i) {
    for (int a = 0; a < g.dims; ++a) {
      std::size_t j;
      if (!neighbor(g, i, a, +1, j)) continue;
      out.v[a][i] = -coeffs.intensity * (r[j] - r[i]) * inv_dx -
                    coeffs.kappa * 0.5 * (r[i] + r[j]) * (v[j] - v[i]) * inv_dx;
    }
  }
  return out;
}

ImpulseField inertia_rate(const DensityField& rho, const ImpulseField& p, const ContinuumCoefficients& coeffs) {
  const GridSpec& g = rho.rho.grid;
  require_same_grid(g, p.grid, "inertia impulse");
  ImpulseField out(g);
  if (coeffs.inertia == 0.0) return out;
  const auto cells = static_cast<std::int64_t>(g.cell_count());
  const std::vector<double>& r = rho.rho.v;
  const double floor = kFluxFloor * *std::max_element(r.begin(), r.end());
  const ImpulseField pc = cell_impulse(p);
  std::array<std::vector<double>, 9> flux;
  for (int a = 0; a < g.dims; ++a)
    for (int b = 0; b < g.dims; ++b) {
      auto& f = flux[3 * a + b];
      f.assign(cells, 0.0);
      for (std::int64_t i = 0; i < cells; ++i) {
        if (!(r[i] > floor)) continue;
        const double u = pc.v[b][i] / (coeffs.mass * r[i]);
        if (a != b) {
          f[i] = pc.v[a][i] * u;
          continue;
        }
        std::size_t lo;
        const double lower = neighbor(g, i, a, -1, lo) ? p.v[a][lo] : 0.0;
        f[i] = u * (u > 0 ? lower : p.v[a][i]);
      }
    }
  const double inv_dx = 1.0 / g.dx;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < cells; ++i) {
    for (int a = 0; a < g.dims; ++a) {
      std::size_t j;
      if (!neighbor(g, i, a, +1, j)) continue;
      double div = (flux[4 * a][j] - flux[4 * a][i]) * inv_dx;
      for (int b = 0; b < g.dims; ++b)
        if (b != a) div += 0.5 * (central(g, flux[3 * a + b], i, b) + central(g, flux[3 * a + b], j, b));
      out.v[a][i] = -coeffs.inertia * div;
    }
  }
  return out;
}

ScalarField drho_dt(const ImpulseField& p, const ContinuumCoefficients& coeffs) {
  const GridSpec& g = p.grid;
  const auto cells = static_cast<std::int64_t>(g.cell_count());
  ScalarField out(g);
  const double scale = 1.0 / (g.dx * coeffs.mass);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < cells; ++i) {
    double net_out = 0.0;
    for (int a = 0; a < g.dims; ++a) {
      const auto& pa = p.v[a];
      std::size_t j;
      if (neighbor(g, i, a, +1, j)) net_out += pa[i];
      if (neighbor(g, i, a, -1, j)) net_out -= pa[j];
    }
    out[i] = -net_out * scale;
  }
  return out;
}

ScalarField d2rho_dt2(const DensityField& rho, const Potential& V,
                      const ContinuumCoefficients& coeffs) {
  return drho_dt(dpdt(rho, V, coeffs), coeffs);
}

double two_cell_continuum_d2rho(double rho_x, double rho_x1, double v_x, double v_x1, double dx,
                                const ContinuumCoefficients& coeffs) {
  // Face impulse rate from x towards x1, then the flux balance of cell x.
  const double face_rate =
      -coeffs.intensity * (rho_x1 - rho_x) / dx - coeffs.kappa * rho_x * (v_x1 - v_x) / dx;
  return -face_rate / (dx * coeffs.mass);
}

double continuum_stable_dt(const GridSpec& grid, const ContinuumCoefficients& coeffs,
                           double safety) {
  // symplectic Euler on the compact Laplacian is stable below dx / (cs sqrt(dims))
  const double cs = std::sqrt(std::max(coeffs.intensity, 0.0) / coeffs.mass);
  if (cs == 0.0) return grid.dt;
  return safety * grid.dx / (cs * std::sqrt(static_cast<double>(grid.dims)));
}

double total_mass(const DensityField& rho) { return rho.rho.integral(); }

void continuum_step(ContinuumState& state, const Potential& V, const ContinuumCoefficients& coeffs,
                    double dt) {
  const double mass_before = total_mass(state.rho);
  ImpulseField rate = dpdt(state.rho, V, coeffs);
  const GridSpec& g = state.rho.rho.grid;
  if (coeffs.inertia != 0.0) {
    const ImpulseField extra = inertia_rate(state.rho, state.p, coeffs);
    for (int a = 0; a < g.dims; ++a)
      for (std::size_t i = 0; i < rate.size(); ++i) rate.v[a][i] += extra.v[a][i];
  }
  for (int a = 0; a < g.dims; ++a)
    for (std::size_t i = 0; i < rate.size(); ++i) state.p.v[a][i] += dt * rate.v[a][i];
  const ScalarField dr = drho_dt(state.p, coeffs);
  bool finite = true;
  for (std::size_t i = 0; i < dr.size(); ++i) {
    state.rho.rho[i] += dt * dr[i];
    finite = finite && std::isfinite(state.rho.rho[i]);
  }
  state.time += dt;
  const double mass_after = total_mass(state.rho);
  const double drift = std::abs(mass_after - mass_before) / std::max(std::abs(mass_before), 1e-300);
  if (!finite || drift > 1e-9)
    throw Error(ErrorCode::UnstableStep,
                "continuum state diverged at t=" + std::to_string(state.time));
}

std::vector<ContinuumState> integrate_continuum(const DensityField& rho0, const ImpulseField& p0,
                                                const Potential& V,
                                                const ContinuumCoefficients& coeffs, double t_end,
                                                double dt, double frame_interval) {
  require_same_grid(rho0.rho.grid, p0.grid, "integrate_continuum");
  if (dt <= 0.0) dt = continuum_stable_dt(rho0.rho.grid, coeffs);
  ContinuumState state{rho0, p0, 0.0};
  std::vector<ContinuumState> frames{state};
  const auto steps = static_cast<std::uint64_t>(std::ceil(t_end / dt - 1e-9));
  std::uint64_t next_frame = 1;
  for (std::uint64_t s = 1; s <= steps; ++s) {
    continuum_step(state, V, coeffs, std::min(dt, t_end - state.time));
    if (frame_interval <= 0.0 || state.time + 1e-12 * dt >= next_frame * frame_interval || s == steps) {
      frames.push_back(state);
      if (frame_interval > 0.0)
        while (next_frame * frame_interval <= state.time + 1e-12 * dt) ++next_frame;
    }
  }
  return frames;
}

}  // namespace ddswarm
