#include "ddswarm/observables.hpp"

#include <algorithm>
#include <cmath>

namespace ddswarm {

std::array<double, 3> estimate_impulse(const std::vector<CellStats>& stats,
                                       const PhysicalConfig& physics) {
  std::array<std::int64_t, 3> net{0, 0, 0};
  for (const auto& st : stats)
    for (int a = 0; a < 3; ++a) net[a] += st.net(a);
  const double mc = physics.sample_mass() * physics.c;
  return {mc * static_cast<double>(net[0]), mc * static_cast<double>(net[1]),
          mc * static_cast<double>(net[2])};
}

std::array<double, 3> direct_impulse(const SwarmState& swarm, const PhysicalConfig& physics) {
  std::array<double, 3> p{0, 0, 0};
  const double mc = physics.sample_mass() * physics.c;
  for (const SpeedTag t : swarm.speed)
    if (is_moving(t)) p[axis_of(t)] += mc * sign_of(t);
  return p;
}

double estimate_kinetic(const std::vector<CellStats>& stats, const PhysicalConfig& physics) {
  const double mc2 = physics.sample_mass() * physics.c * physics.c;
  double e = 0.0;
  for (const auto& st : stats) {
    if (st.n == 0) continue;
    for (int a = 0; a < 3; ++a) {
      const double nu = static_cast<double>(st.net(a));
      e += mc2 * nu * nu / (2.0 * st.n);
    }
  }
  return e;
}

double kinetic_from_mean_velocity(const std::vector<CellStats>& stats,
                                  const PhysicalConfig& physics) {
  double e = 0.0;
  for (const auto& st : stats) {
    if (st.n == 0) continue;
    const double cell_mass = st.n * physics.sample_mass();
    double v2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double v = physics.c * static_cast<double>(st.net(a)) / st.n;
      v2 += v * v;
    }
    e += 0.5 * cell_mass * v2;
  }
  return e;
}

double estimate_potential(const std::vector<CellStats>& stats, const ScalarField& v_pot) {
  std::uint64_t total = 0;
  double acc = 0.0;
  for (std::size_t c = 0; c < stats.size(); ++c) {
    total += stats[c].n;
    acc += stats[c].n * v_pot[c];
  }
  return total ? acc / static_cast<double>(total) : 0.0;
}

std::array<double, 3> estimate_angular(const SwarmState& swarm, const PhysicalConfig& physics,
                                       const std::array<double, 3>& origin) {
  std::array<double, 3> l{0, 0, 0};
  const double mc = physics.sample_mass() * physics.c;
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    const SpeedTag t = swarm.speed[i];
    if (!is_moving(t)) continue;
    std::array<double, 3> r{0, 0, 0}, p{0, 0, 0};
    for (int a = 0; a < 3; ++a) r[a] = (swarm.pos[a].empty() ? 0.0 : swarm.pos[a][i]) - origin[a];
    p[axis_of(t)] = mc * sign_of(t);
    l[0] += r[1] * p[2] - r[2] * p[1];
    l[1] += r[2] * p[0] - r[0] * p[2];
    l[2] += r[0] * p[1] - r[1] * p[0];
  }
  return l;
}

std::array<double, 3> mean_position(const SwarmState& swarm, int dims) {
  std::array<double, 3> m{0, 0, 0};
  if (swarm.size() == 0) return m;
  for (int a = 0; a < dims; ++a) {
    double s = 0.0;
    for (double x : swarm.pos[a]) s += x;
    m[a] = s / static_cast<double>(swarm.size());
  }
  return m;
}

ObservableRecord observe_swarm(const SwarmState& swarm, const GridSpec& grid,
                               const PhysicalConfig& physics, const ScalarField& v_pot,
                               const std::array<double, 3>& origin) {
  const auto stats = bin_samples(swarm, grid);
  ObservableRecord r;
  r.time = swarm.time;
  r.impulse = estimate_impulse(stats, physics);
  r.kinetic = estimate_kinetic(stats, physics);
  r.potential = estimate_potential(stats, v_pot);
  r.angular = estimate_angular(swarm, physics, origin);
  r.mean_position = mean_position(swarm, grid.dims);
  return r;
}

ObservableRecord observe_wave(const WaveField& psi, const PhysicalConfig& physics,
                              const ScalarField& v_pot, const std::array<double, 3>& origin) {
  const GridSpec& g = psi.grid;
  const double vol = g.cell_volume();
  const ImpulseField p = wave_impulse(psi, physics);
  ObservableRecord r;
  double norm = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double rho = psi.psi_r[i] * psi.psi_r[i] + psi.psi_i[i] * psi.psi_i[i];
    norm += rho * vol;
    r.potential += rho * v_pot[i] * vol;
    const CellIndex3 c = cell_coords(g, i);
    std::array<double, 3> x{0, 0, 0}, pi{0, 0, 0};
    for (int a = 0; a < g.dims; ++a) {
      x[a] = cell_center(g, c[a]);
      pi[a] = p.v[a][i] * vol;
      r.impulse[a] += pi[a];
      r.mean_position[a] += rho * x[a] * vol;
      x[a] -= origin[a];
    }
    r.angular[0] += x[1] * pi[2] - x[2] * pi[1];
    r.angular[1] += x[2] * pi[0] - x[0] * pi[2];
    r.angular[2] += x[0] * pi[1] - x[1] * pi[0];
  }
  ScalarField zero(g, 0.0);
  const SchrodingerSolver kinetic(g, physics, zero, 1.0);
  r.kinetic = kinetic.energy(psi);
  for (int a = 0; a < 3; ++a) r.mean_position[a] /= norm;
  r.potential /= norm;
  r.kinetic /= norm;
  return r;
}

EhrenfestReport ehrenfest_check(const std::vector<ObservableRecord>& swarm,
                                const std::vector<ObservableRecord>& reference,
                                double position_band, double impulse_band, int dims) {
  EhrenfestReport rep;
  rep.frames = std::min(swarm.size(), reference.size());
  rep.position_band = position_band;
  rep.impulse_band = impulse_band;
  for (std::size_t f = 0; f < rep.frames; ++f)
    for (int a = 0; a < dims; ++a) {
      rep.max_position_deviation = std::max(
          rep.max_position_deviation, std::abs(swarm[f].mean_position[a] - reference[f].mean_position[a]));
      rep.max_impulse_deviation =
          std::max(rep.max_impulse_deviation, std::abs(swarm[f].impulse[a] - reference[f].impulse[a]));
    }
  if (!reference.empty()) {
    const double e0 = reference.front().kinetic + reference.front().potential;
    for (const auto& r : reference)
      rep.reference_energy_drift = std::max(
          rep.reference_energy_drift, std::abs(r.kinetic + r.potential - e0) / std::max(std::abs(e0), 1e-300));
  }
  rep.within_band = rep.frames > 0 && rep.max_position_deviation <= position_band &&
                    rep.max_impulse_deviation <= impulse_band;
  return rep;
}

ObservableRecord window_average(const std::vector<ObservableRecord>& records) {
  ObservableRecord m;
  if (records.empty()) return m;
  const double w = 1.0 / static_cast<double>(records.size());
  for (const auto& r : records) {
    m.time += w * r.time;
    m.kinetic += w * r.kinetic;
    m.potential += w * r.potential;
    for (int a = 0; a < 3; ++a) {
      m.impulse[a] += w * r.impulse[a];
      m.angular[a] += w * r.angular[a];
      m.mean_position[a] += w * r.mean_position[a];
    }
  }
  return m;
}

}  // namespace ddswarm
