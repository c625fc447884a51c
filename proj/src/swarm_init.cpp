#include <algorithm>
#include <cmath>
#include <random>

#include "ddswarm/error.hpp"
#include "ddswarm/swarm.hpp"

namespace ddswarm {

SwarmState sample_initial_swarm(const ScalarField& density0, const VectorField* phase_velocity,
                                std::uint64_t n, double c, std::uint64_t seed) {
  const GridSpec& grid = density0.grid;
  const std::size_t cells = grid.cell_count();
  if (phase_velocity) require_same_grid(grid, phase_velocity->grid, "phase velocity");

  double total = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    if (!(density0[i] >= 0.0) || !std::isfinite(density0[i]))
      throw Error(ErrorCode::NegativeDensity, "initial density is negative or not finite in cell " +
                                                  std::to_string(i));
    total += density0[i];
  }
  if (total <= 0.0) throw Error(ErrorCode::NegativeDensity, "initial density has no mass");

  // Multinomial counts by the conditional-binomial method.
  std::vector<std::uint64_t> counts(cells, 0);
  {
    std::mt19937_64 gen(mix64(seed ^ kStreamInit));
    std::uint64_t left = n;
    double mass_left = total;
    for (std::size_t i = 0; i < cells && left > 0; ++i) {
      if (density0[i] == 0.0) continue;
      const double p = std::clamp(density0[i] / mass_left, 0.0, 1.0);
      std::binomial_distribution<std::uint64_t> bin(left, p);
      const std::uint64_t k = p >= 1.0 ? left : bin(gen);
      counts[i] = k;
      left -= k;
      mass_left -= density0[i];
    }
    if (left > 0) {
      // Rounding in mass_left can leave a remainder; it goes to the heaviest cell.
      const auto it = std::max_element(density0.v.begin(), density0.v.end());
      counts[static_cast<std::size_t>(it - density0.v.begin())] += left;
    }
  }

  SwarmState swarm;
  swarm.seed = seed;
  swarm.reserve(n);
  std::vector<std::uint32_t> start(cells + 1, 0);
  std::uint64_t next_id = 0;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    start[cell] = static_cast<std::uint32_t>(next_id);
    const std::uint64_t k = counts[cell];
    if (k == 0) continue;
    const CellIndex3 ci = cell_coords(grid, cell);
    KeyedRng jitter(seed, 0, cell, kStreamJitter);
    const std::size_t first = swarm.size();
    for (std::uint64_t j = 0; j < k; ++j) {
      Sample s;
      s.id = next_id++;
      for (int a = 0; a < grid.dims; ++a) {
        const double x = (ci[a] + jitter.uniform()) * grid.dx;
        s.pos[a] = std::min(x, std::nextafter((ci[a] + 1) * grid.dx, 0.0));
      }
      swarm.push_back(s);
    }
    if (!phase_velocity) continue;

    KeyedRng alloc(seed, 0, cell, kStreamInit);
    std::uint64_t free = k;
    std::size_t cursor = first;
    for (int a = 0; a < grid.dims && free > 0; ++a) {
      const double v = phase_velocity->v[a][cell];
      if (v == 0.0) continue;
      const double want = static_cast<double>(k) * std::min(std::abs(v) / c, 1.0);
      const auto movers =
          std::min<std::uint64_t>(static_cast<std::uint64_t>(alloc.stochastic_round(want)), free);
      const SpeedTag tag = moving_tag(a, v > 0 ? +1 : -1);
      for (std::uint64_t j = 0; j < movers; ++j) swarm.speed[cursor++] = tag;
      free -= movers;
    }
  }
  start[cells] = static_cast<std::uint32_t>(next_id);
  swarm.cell_start = std::move(start);
  return swarm;
}

}  // namespace ddswarm
