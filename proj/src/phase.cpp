#include "ddswarm/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include "ddswarm/error.hpp"

namespace ddswarm {

double lattice_k(const PhysicalConfig& physics, const GridSpec& grid) {
  return 1.0 / (physics.h * grid.dx * grid.dx);
}

double node_floor(std::uint64_t n_samples, const GridSpec& grid, double samples_per_cell) {
  return samples_per_cell / (static_cast<double>(n_samples) * grid.cell_volume());
}

double link_increment(double rho_a, double rho_b, double p_ab, double k_cal, double dx,
                      std::size_t* clipped) {
  double arg = k_cal * dx * dx * dx * p_ab / std::sqrt(rho_a * rho_b);
  if (arg > 1.0 || arg < -1.0) {
    if (clipped) ++*clipped;
    arg = std::clamp(arg, -1.0, 1.0);
  }
  return std::asin(arg);
}

namespace {

// Axis and direction of the face between adjacent cells a and b.
bool face_between(const GridSpec& g, std::size_t a, std::size_t b, int& axis, int& dir) {
  for (int ax = 0; ax < g.dims; ++ax)
    for (int d : {+1, -1}) {
      std::size_t n;
      if (neighbor(g, a, ax, d, n) && n == b) {
        axis = ax;
        dir = d;
        return true;
      }
    }
  return false;
}

double face_value(const ImpulseField& p, std::size_t a, std::size_t b, int axis, int dir) {
  return dir * 0.5 * (p.v[axis][a] + p.v[axis][b]);
}

}  // namespace

double link_phase(const DensityField& rho, const ImpulseField& p, std::size_t a, std::size_t b,
                  double k_cal, double floor, std::size_t* clipped) {
  const GridSpec& g = rho.rho.grid;
  int axis = 0, dir = 0;
  if (!face_between(g, a, b, axis, dir))
    throw Error(ErrorCode::InvalidConfig,
                "cells " + std::to_string(a) + " and " + std::to_string(b) + " are not adjacent");
  const double ra = rho.rho[a], rb = rho.rho[b];
  if (!(ra > floor) || !(rb > floor))
    throw Error(ErrorCode::NodeCell, "density at or below the node floor on link " +
                                         std::to_string(a) + "-" + std::to_string(b));
  return link_increment(ra, rb, face_value(p, a, b, axis, dir), k_cal, g.dx, clipped);
}

PhaseField reconstruct_phase(const DensityField& rho, const ImpulseField& p, std::size_t ref_cell,
                             double k_cal, double floor) {
  const GridSpec& g = rho.rho.grid;
  require_same_grid(g, p.grid, "reconstruct_phase");
  const std::size_t cells = g.cell_count();
  PhaseField out;
  out.grid = g;
  out.phi.assign(cells, 0.0);
  out.defined.assign(cells, 0);
  out.ref_cell = ref_cell;
  out.k_cal = k_cal;

  auto grow = [&](std::size_t root) {
    std::queue<std::size_t> q;
    out.defined[root] = 1;
    q.push(root);
    while (!q.empty()) {
      const std::size_t a = q.front();
      q.pop();
      for (int axis = 0; axis < g.dims; ++axis)
        for (int dir : {+1, -1}) {
          std::size_t b;
          if (!neighbor(g, a, axis, dir, b) || out.defined[b] || !(rho.rho[b] > floor)) continue;
          out.defined[b] = 1;
          out.phi[b] = out.phi[a] + link_increment(rho.rho[a], rho.rho[b],
                                                   face_value(p, a, b, axis, dir), k_cal, g.dx,
                                                   &out.clipped_links);
          q.push(b);
        }
    }
    ++out.components;
  };

  if (ref_cell < cells && rho.rho[ref_cell] > floor) grow(ref_cell);
  for (std::size_t c = 0; c < cells; ++c)
    if (!out.defined[c] && rho.rho[c] > floor) grow(c);
  return out;
}

Contour square_contour(const GridSpec& grid, const CellIndex3& center, int half_width) {
  Contour c;
  c.closed = true;
  const int w = half_width;
  auto push = [&](int dx, int dy) {
    CellIndex3 k = center;
    k[0] += dx;
    k[1] += dy;
    c.cells.push_back(linear_index(grid, k));
  };
  for (int i = -w; i < w; ++i) push(i, -w);
  for (int j = -w; j < w; ++j) push(w, j);
  for (int i = w; i > -w; --i) push(i, w);
  for (int j = w; j > -w; --j) push(-w, j);
  return c;
}

Contour axis_path(const GridSpec& grid, const CellIndex3& from, const CellIndex3& to, bool x_first) {
  Contour c;
  CellIndex3 k = from;
  c.cells.push_back(linear_index(grid, k));
  const std::array<int, 3> order = x_first ? std::array<int, 3>{0, 1, 2} : std::array<int, 3>{1, 0, 2};
  for (int axis : order) {
    while (k[axis] != to[axis]) {
      k[axis] += to[axis] > k[axis] ? 1 : -1;
      c.cells.push_back(linear_index(grid, k));
    }
  }
  return c;
}

double contour_phase(const DensityField& rho, const ImpulseField& p, const Contour& contour,
                     double k_cal, double floor) {
  double sum = 0.0;
  const std::size_t n = contour.cells.size();
  for (std::size_t i = 0; i + 1 < n; ++i)
    sum += link_phase(rho, p, contour.cells[i], contour.cells[i + 1], k_cal, floor);
  if (contour.closed && n > 1) sum += link_phase(rho, p, contour.cells[n - 1], contour.cells[0], k_cal, floor);
  return sum;
}

PathIndependenceReport path_independence_check(const DensityField& rho, const ImpulseField& p,
                                               const std::vector<std::pair<Contour, Contour>>& paths,
                                               double k_cal, double floor) {
  PathIndependenceReport rep;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (const auto& [a, b] : paths) {
    const double diff = contour_phase(rho, p, a, k_cal, floor) - contour_phase(rho, p, b, k_cal, floor);
    const long w = std::lround(diff / two_pi);
    rep.max_residual = std::max(rep.max_residual, std::abs(diff - two_pi * static_cast<double>(w)));
    if (w != 0) rep.windings.push_back(w);
    ++rep.pairs;
  }
  return rep;
}

double circulation(const DensityField& rho, const ImpulseField& p, const Contour& contour,
                   double mass, double floor) {
  const GridSpec& g = rho.rho.grid;
  const std::size_t n = contour.cells.size();
  double sum = 0.0;
  auto link = [&](std::size_t a, std::size_t b) {
    int axis = 0, dir = 0;
    if (!face_between(g, a, b, axis, dir))
      throw Error(ErrorCode::InvalidConfig, "contour cells are not adjacent");
    const double ra = rho.rho[a], rb = rho.rho[b];
    if (!(ra > floor) || !(rb > floor))
      throw Error(ErrorCode::NodeCrossing, "contour touches a node cell");
    sum += g.dx * face_value(p, a, b, axis, dir) / (mass * 0.5 * (ra + rb));
  };
  for (std::size_t i = 0; i + 1 < n; ++i) link(contour.cells[i], contour.cells[i + 1]);
  if (contour.closed && n > 1) link(contour.cells[n - 1], contour.cells[0]);
  return sum;
}

CirculationReport circulation_drift(const std::vector<ContinuumState>& frames, const Contour& contour,
                                    double mass, double floor) {
  CirculationReport rep;
  for (const auto& f : frames) {
    rep.times.push_back(f.time);
    rep.values.push_back(circulation(f.rho, cell_impulse(f.p), contour, mass, floor));
  }
  if (frames.size() > 1) {
    const double span = rep.times.back() - rep.times.front();
    double worst = 0.0;
    for (double v : rep.values) worst = std::max(worst, std::abs(v - rep.values.front()));
    rep.drift_rate = span > 0 ? worst / span : 0.0;
  }
  return rep;
}

std::pair<DensityField, ImpulseField> plane_wave_fields(const PhysicalConfig& physics,
                                                        const GridSpec& grid, double wavenumber) {
  DensityField rho{ScalarField(grid, 1.0 / (static_cast<double>(grid.cell_count()) * grid.cell_volume())), true};
  ImpulseField p(grid);
  for (std::size_t i = 0; i < grid.cell_count(); ++i) p.v[0][i] = rho.rho[i] * physics.h * wavenumber;
  return {std::move(rho), std::move(p)};
}

double phase_slope_x(const PhaseField& phase) {
  const GridSpec& g = phase.grid;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (int i = 0; i < g.extent[0]; ++i) {
    const std::size_t c = linear_index(g, {i, 0, 0});
    if (!phase.defined[c]) continue;
    const double x = cell_center(g, i);
    sx += x;
    sy += phase.phi[c];
    sxx += x * x;
    sxy += x * phase.phi[c];
    n += 1;
  }
  const double den = n * sxx - sx * sx;
  return den > 0 ? (n * sxy - sx * sy) / den : 0.0;
}

namespace {

double slope_for(const PhysicalConfig& physics, const GridSpec& open, double wavenumber, double k) {
  const auto [rho, p] = plane_wave_fields(physics, open, wavenumber);
  return phase_slope_x(reconstruct_phase(rho, p, 0, k));
}

}  // namespace

KCalibration calibrate_k(const PhysicalConfig& physics, const GridSpec& grid, double wavenumber) {
  if (!(wavenumber > 0.0)) throw Error(ErrorCode::InvalidConfig, "calibration wavenumber must be positive");
  // A walled copy of the grid keeps the spanning tree from wrapping around.
  GridSpec open = grid;
  open.boundary = Boundary::Reflecting;

  KCalibration cal;
  cal.wavenumber = wavenumber;
  double k0 = lattice_k(physics, grid);
  double f0 = slope_for(physics, open, wavenumber, k0) - wavenumber;
  double k1 = k0 * 1.01;
  double f1 = slope_for(physics, open, wavenumber, k1) - wavenumber;
  for (int it = 0; it < 50 && std::abs(f1) > 1e-13 * wavenumber && f1 != f0; ++it) {
    const double k2 = k1 - f1 * (k1 - k0) / (f1 - f0);
    k0 = k1;
    f0 = f1;
    k1 = k2;
    f1 = slope_for(physics, open, wavenumber, k1) - wavenumber;
  }
  cal.k_cal = k1;
  cal.fitted_slope = f1 + wavenumber;
  cal.residual = std::abs(f1) / wavenumber;
  if (!(cal.residual < 0.01))
    throw Error(ErrorCode::CalibrationDiverged,
                "phase calibration residual " + std::to_string(cal.residual));
  return cal;
}

}  // namespace ddswarm
