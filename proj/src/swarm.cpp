#include "ddswarm/swarm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ddswarm/error.hpp"

namespace ddswarm {

const char* to_string(SpeedTag t) {
  switch (t) {
    case SpeedTag::Zero: return "0";
    case SpeedTag::PlusX: return "+x";
    case SpeedTag::MinusX: return "-x";
    case SpeedTag::PlusY: return "+y";
    case SpeedTag::MinusY: return "-y";
    case SpeedTag::PlusZ: return "+z";
    case SpeedTag::MinusZ: return "-z";
  }
  return "?";
}

CellStats tally(std::span<const SpeedTag> speeds) {
  CellStats st;
  st.n = static_cast<std::uint32_t>(speeds.size());
  for (const SpeedTag t : speeds) {
    if (t == SpeedTag::Zero) {
      ++st.n_zero;
    } else if (sign_of(t) > 0) {
      ++st.n_plus[axis_of(t)];
    } else {
      ++st.n_minus[axis_of(t)];
    }
  }
  for (int a = 0; a < 3; ++a) st.s += 2 * std::min(st.n_plus[a], st.n_minus[a]);
  return st;
}

Sample SwarmState::sample(std::size_t i) const {
  return Sample{{pos[0][i], pos[1][i], pos[2][i]}, speed[i], id[i]};
}

void SwarmState::push_back(const Sample& s) {
  for (int a = 0; a < 3; ++a) pos[a].push_back(s.pos[a]);
  speed.push_back(s.speed);
  id.push_back(s.id);
  cell_start.clear();
}

void SwarmState::reserve(std::size_t n) {
  for (auto& p : pos) p.reserve(n);
  speed.reserve(n);
  id.reserve(n);
}

std::size_t cell_of(const GridSpec& grid, const std::array<double, 3>& pos) {
  CellIndex3 c{0, 0, 0};
  for (int a = 0; a < grid.dims; ++a) {
    const double x = pos[a];
    const int i = static_cast<int>(std::floor(x / grid.dx));
    if (!(x >= 0.0) || i < 0 || i >= grid.extent[a]) {
      std::ostringstream os;
      os << "coordinate " << x << " on axis " << a << " outside [0, " << grid.length(a) << ")";
      throw Error(ErrorCode::PositionOutOfDomain, os.str());
    }
    c[a] = i;
  }
  return linear_index(grid, c);
}

namespace {

std::size_t cell_of_sample(const SwarmState& s, const GridSpec& g, std::size_t i) {
  return cell_of(g, {s.pos[0][i], s.pos[1][i], s.pos[2][i]});
}

}  // namespace

std::vector<CellStats> bin_samples(const SwarmState& swarm, const GridSpec& grid) {
  std::vector<CellStats> stats(grid.cell_count());
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    CellStats& st = stats[cell_of_sample(swarm, grid, i)];
    ++st.n;
    const SpeedTag t = swarm.speed[i];
    if (t == SpeedTag::Zero) ++st.n_zero;
    else if (sign_of(t) > 0) ++st.n_plus[axis_of(t)];
    else ++st.n_minus[axis_of(t)];
  }
  for (auto& st : stats) {
    st.s = 0;
    for (int a = 0; a < 3; ++a) st.s += 2 * std::min(st.n_plus[a], st.n_minus[a]);
  }
  return stats;
}

void sort_by_cell(SwarmState& swarm, const GridSpec& grid, int workers) {
  const std::size_t n = swarm.size();
  const std::size_t cells = grid.cell_count();
  std::vector<std::uint32_t> key(n);
  // Exceptions may not cross an OpenMP region boundary.
  bool out_of_domain = false;
#pragma omp parallel for num_threads(workers) schedule(static) reduction(|| : out_of_domain)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      key[i] = static_cast<std::uint32_t>(cell_of_sample(swarm, grid, i));
    } catch (const Error&) {
      out_of_domain = true;
    }
  }
  if (out_of_domain) {
    for (std::size_t i = 0; i < n; ++i) (void)cell_of_sample(swarm, grid, i);
  }

  std::vector<std::uint32_t>& start = swarm.cell_start;
  start.assign(cells + 1, 0);
  for (std::size_t i = 0; i < n; ++i) ++start[key[i] + 1];
  for (std::size_t c = 0; c < cells; ++c) start[c + 1] += start[c];

  std::vector<std::uint32_t> dest(n);
  {
    std::vector<std::uint32_t> cursor(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) dest[i] = cursor[key[i]]++;
  }

  auto permute = [&](auto& vec) {
    using V = std::decay_t<decltype(vec)>;
    V out(vec.size());
#pragma omp parallel for num_threads(workers) schedule(static)
    for (std::size_t i = 0; i < n; ++i) out[dest[i]] = vec[i];
    vec.swap(out);
  };
  for (int a = 0; a < grid.dims; ++a) permute(swarm.pos[a]);
  for (int a = grid.dims; a < 3; ++a) {
    // Unused axes still travel with their samples.
    if (!swarm.pos[a].empty()) permute(swarm.pos[a]);
  }
  permute(swarm.speed);
  permute(swarm.id);
}

SwarmDensity density(const std::vector<CellStats>& stats, const GridSpec& grid) {
  SwarmDensity out;
  out.counts.rho = ScalarField(grid);
  out.counts.normalized = false;
  out.normalized.rho = ScalarField(grid);
  out.normalized.normalized = true;
  const double vol = grid.cell_volume();
  for (const auto& st : stats) out.total += st.n;
  for (std::size_t c = 0; c < stats.size(); ++c) {
    out.counts.rho[c] = stats[c].n / vol;
    out.normalized.rho[c] = out.total ? stats[c].n / (vol * static_cast<double>(out.total)) : 0.0;
  }
  return out;
}

ImpulseField impulse_density(const std::vector<CellStats>& stats, const GridSpec& grid,
                             const PhysicalConfig& physics) {
  ImpulseField p(grid);
  const double mc = physics.sample_mass() * physics.c / grid.cell_volume();
  for (std::size_t c = 0; c < stats.size(); ++c)
    for (int a = 0; a < grid.dims; ++a) p.v[a][c] = mc * static_cast<double>(stats[c].net(a));
  return p;
}

std::pair<Sample, Sample> reaction_of_change(const Sample& a, const Sample& b, double dx, int dims,
                                             KeyedRng& rng) {
  if (a.speed != opposite(b.speed))
    throw Error(ErrorCode::PairNotOpposite,
                std::string("speeds ") + to_string(a.speed) + " and " + to_string(b.speed));
  double d2 = 0;
  for (int k = 0; k < 3; ++k) d2 += (a.pos[k] - b.pos[k]) * (a.pos[k] - b.pos[k]);
  if (d2 > dx * dx) throw Error(ErrorCode::PairTooFar, "pair separation exceeds dx");

  Sample ra = a, rb = b;
  if (is_moving(a.speed)) {
    ra.speed = rb.speed = SpeedTag::Zero;
  } else {
    const int axis = static_cast<int>(rng.below(static_cast<std::uint64_t>(dims)));
    const int sign = rng.below(2) == 0 ? 1 : -1;
    ra.speed = moving_tag(axis, sign);
    rb.speed = moving_tag(axis, -sign);
  }
  return {ra, rb};
}

double balanced_pair_target(std::uint32_t n, std::int64_t net, double moving_ratio, int dims) {
  if (n == 0) return 0.0;
  const double theta = moving_fraction(moving_ratio) / dims;
  const double u = std::abs(static_cast<double>(net)) / n;
  const double movers = n * std::max(0.0, theta + u * u - u);
  return 0.5 * movers;
}

namespace {

struct CellScratch {
  std::vector<std::uint32_t> zeros;
  std::array<std::vector<std::uint32_t>, 3> plus, minus;

  void gather(std::span<const SpeedTag> speeds) {
    zeros.clear();
    for (int a = 0; a < 3; ++a) {
      plus[a].clear();
      minus[a].clear();
    }
    for (std::uint32_t i = 0; i < speeds.size(); ++i) {
      const SpeedTag t = speeds[i];
      if (t == SpeedTag::Zero) zeros.push_back(i);
      else if (sign_of(t) > 0) plus[axis_of(t)].push_back(i);
      else minus[axis_of(t)].push_back(i);
    }
  }
};

CellScratch& scratch() {
  thread_local CellScratch s;
  return s;
}

/// Removes and returns a uniformly chosen element.
std::uint32_t take_random(std::vector<std::uint32_t>& v, KeyedRng& rng) {
  const std::size_t j = rng.below(v.size());
  const std::uint32_t out = v[j];
  v[j] = v.back();
  v.pop_back();
  return out;
}

}  // namespace

BalanceOutcome step1_balance(std::span<SpeedTag> speeds, int dims, double moving_ratio,
                             RoundingPolicy rounding, KeyedRng& rng) {
  BalanceOutcome out;
  if (speeds.size() < 2) return out;
  CellScratch& sc = scratch();
  sc.gather(speeds);
  const auto n = static_cast<std::uint32_t>(speeds.size());

  std::array<std::int64_t, 3> deficit{0, 0, 0};
  for (int a = 0; a < dims; ++a) {
    const std::int64_t net = static_cast<std::int64_t>(sc.plus[a].size()) -
                             static_cast<std::int64_t>(sc.minus[a].size());
    const double target = balanced_pair_target(n, net, moving_ratio, dims);
    const std::int64_t pairs = rounding == RoundingPolicy::Stochastic
                                   ? rng.stochastic_round(target)
                                   : static_cast<std::int64_t>(std::llround(target));
    const auto current = static_cast<std::int64_t>(std::min(sc.plus[a].size(), sc.minus[a].size()));
    deficit[a] = pairs - current;
  }

  // Annihilations first; they return samples to the resting pool.
  for (int a = 0; a < dims; ++a) {
    for (; deficit[a] < 0; ++deficit[a]) {
      const std::uint32_t i = take_random(sc.plus[a], rng);
      const std::uint32_t j = take_random(sc.minus[a], rng);
      speeds[i] = SpeedTag::Zero;
      speeds[j] = SpeedTag::Zero;
      sc.zeros.push_back(i);
      sc.zeros.push_back(j);
      ++out.pairs_annihilated;
    }
  }

  // Creations: each new pair takes an axis drawn uniformly among the axes
  // that are still short of pairs.
  std::array<int, 3> open{};
  while (sc.zeros.size() >= 2) {
    int n_open = 0;
    for (int a = 0; a < dims; ++a)
      if (deficit[a] > 0) open[n_open++] = a;
    if (n_open == 0) break;
    const int axis = open[n_open == 1 ? 0 : rng.below(static_cast<std::uint64_t>(n_open))];
    const std::uint32_t i = take_random(sc.zeros, rng);
    const std::uint32_t j = take_random(sc.zeros, rng);
    speeds[i] = moving_tag(axis, +1);
    speeds[j] = moving_tag(axis, -1);
    --deficit[axis];
    ++out.pairs_created;
  }
  return out;
}

KickOutcome step2_potential_kick(std::span<SpeedTag> speeds, int dims,
                                 const std::array<double, 3>& grad_potential, double dt,
                                 const PhysicalConfig& physics, KeyedRng& rng) {
  KickOutcome out;
  if (speeds.empty()) return out;
  bool any = false;
  for (int a = 0; a < dims; ++a) any = any || grad_potential[a] != 0.0;
  if (!any) return out;

  CellScratch& sc = scratch();
  sc.zeros.clear();
  for (std::uint32_t i = 0; i < speeds.size(); ++i)
    if (speeds[i] == SpeedTag::Zero) sc.zeros.push_back(i);

  // Each sample carries 1/n of the particle's potential energy, so the cell
  // receives impulse n_cell |dV/du| dt / n per step; one granted speed is
  // worth m c = M c / n.
  const double per_sample = dt / (physics.mass * physics.c);
  for (int a = 0; a < dims; ++a) {
    const double g = grad_potential[a];
    if (g == 0.0) continue;
    const double expected = speeds.size() * std::abs(g) * per_sample;
    std::int64_t k = rng.stochastic_round(expected);
    const SpeedTag tag = moving_tag(a, g > 0 ? -1 : +1);
    std::int64_t granted = 0;
    for (; granted < k && !sc.zeros.empty(); ++granted) speeds[take_random(sc.zeros, rng)] = tag;
    if (granted < k) {
      // No stationary samples left: stop samples moving against the force.
      auto& against = sc.plus[a];
      against.clear();
      for (std::uint32_t i = 0; i < speeds.size(); ++i)
        if (speeds[i] == opposite(tag)) against.push_back(i);
      for (; granted < k && !against.empty(); ++granted) speeds[take_random(against, rng)] = SpeedTag::Zero;
      out.saturated = granted < k;
    }
    out.granted[a] = static_cast<std::uint32_t>(granted);
  }
  return out;
}

void step3_advect(SwarmState& swarm, const GridSpec& grid, double c, int workers) {
  const std::size_t n = swarm.size();
  const double step = c * grid.dt;
  const bool periodic = grid.boundary == Boundary::Periodic;
  std::array<double, 3> len{grid.length(0), grid.length(1), grid.length(2)};
#pragma omp parallel for num_threads(workers) schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const SpeedTag t = swarm.speed[i];
    if (t == SpeedTag::Zero) continue;
    const int a = axis_of(t);
    const double L = len[a];
    double x = swarm.pos[a][i] + sign_of(t) * step;
    if (periodic) {
      if (x >= L) x -= L;
      else if (x < 0.0) x += L;
      if (x >= L) x = 0.0;  // -tiny + L rounds to L
    } else {
      if (x < 0.0) {
        x = -x;
        swarm.speed[i] = opposite(t);
      } else if (x >= L) {
        x = 2.0 * L - x;
        swarm.speed[i] = opposite(t);
      }
      if (x >= L) x = std::nextafter(L, 0.0);
    }
    swarm.pos[a][i] = x;
  }
}

StepDiagnostics full_step(SwarmState& swarm, Potential& potential, const ValidatedConfig& config,
                          const SwarmParams& params, const PotentialHook& hook) {
  const GridSpec& grid = config.grid;
  const int dims = grid.dims;
  const int workers = std::max(1, params.workers);
  require_same_grid(grid, potential.values.grid, "full_step potential");
  sort_by_cell(swarm, grid, workers);

  const auto cells = static_cast<std::int64_t>(grid.cell_count());
  std::uint64_t created = 0, annihilated = 0, saturated = 0;
  std::uint64_t kx = 0, ky = 0, kz = 0;
#pragma omp parallel for num_threads(workers) schedule(dynamic, 16) \
    reduction(+ : created, annihilated, saturated, kx, ky, kz)
  for (std::int64_t c = 0; c < cells; ++c) {
    const std::uint32_t b = swarm.cell_start[c], e = swarm.cell_start[c + 1];
    if (b == e) continue;
    std::span<SpeedTag> speeds(swarm.speed.data() + b, e - b);

    KeyedRng balance_rng(swarm.seed, swarm.step, static_cast<std::uint64_t>(c), kStreamBalance);
    const BalanceOutcome bo =
        step1_balance(speeds, dims, params.moving_ratio, params.rounding, balance_rng);
    created += bo.pairs_created;
    annihilated += bo.pairs_annihilated;

    const std::array<double, 3> g{potential.grad.v[0][c], potential.grad.v[1][c],
                                  potential.grad.v[2][c]};
    KeyedRng kick_rng(swarm.seed, swarm.step, static_cast<std::uint64_t>(c), kStreamKick);
    const KickOutcome ko = step2_potential_kick(speeds, dims, g, grid.dt, config.physics, kick_rng);
    kx += ko.granted[0];
    ky += ko.granted[1];
    kz += ko.granted[2];
    saturated += ko.saturated ? 1 : 0;
  }

  step3_advect(swarm, grid, config.physics.c, workers);
  if (hook) hook(swarm, potential);
  swarm.time += grid.dt;
  ++swarm.step;

  StepDiagnostics d;
  d.pairs_created = created;
  d.pairs_annihilated = annihilated;
  d.kicks = {kx, ky, kz};
  d.saturated_cells = saturated;
  return d;
}

}  // namespace ddswarm
