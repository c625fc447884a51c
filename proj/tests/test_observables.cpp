#include <doctest.h>

#include <cmath>

#include "ddswarm/observables.hpp"

using namespace ddswarm;

namespace {

struct Gen {
  std::uint64_t s;
  double uniform() {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(s >> 11) * 0x1.0p-53;
  }
  int below(int n) { return static_cast<int>(uniform() * n); }
};

GridSpec box(int dims, int n, double dx) {
  GridSpec g;
  g.dims = dims;
  g.dx = dx;
  g.dt = 0.001;
  g.extent = {n, dims > 1 ? n : 1, dims > 2 ? n : 1};
  return g;
}

PhysicalConfig phys(std::uint64_t n, int dims) {
  PhysicalConfig p;
  p.n_samples = n;
  p.dims = dims;
  p.mass = 2.5;
  p.c = 1.7;
  return p;
}

SwarmState random_swarm(Gen& gen, const GridSpec& g, std::size_t n, double move) {
  SwarmState s;
  // clustered positions so that cells differ in their flow
  for (std::size_t i = 0; i < n; ++i) {
    Sample x;
    for (int a = 0; a < g.dims; ++a) x.pos[a] = gen.uniform() * gen.uniform() * g.length(a);
    if (gen.uniform() < move) {
      const int axis = gen.below(g.dims);
      const int sign = gen.uniform() < 0.3 + 0.4 * x.pos[0] / g.length(0) ? 1 : -1;
      x.speed = moving_tag(axis, sign);
    }
    x.id = i;
    s.push_back(x);
  }
  return s;
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("impulse examples") {
  const auto g = box(1, 4, 0.5);
  const auto p = phys(10, 1);
  SwarmState s;
  for (int i = 0; i < 10; ++i) s.push_back({{0.1 * i, 0, 0}, SpeedTag::Zero, std::uint64_t(i)});
  auto imp = estimate_impulse(bin_samples(s, g), p);
  CHECK(imp == std::array<double, 3>{0, 0, 0});
  for (int i = 0; i < 3; ++i) s.speed[i] = SpeedTag::PlusX;
  imp = estimate_impulse(bin_samples(s, g), p);
  CHECK(imp[0] == doctest::Approx(3 * p.sample_mass() * p.c));
  CHECK(imp[1] == 0.0);
}

TEST_CASE("impulse and kinetic identities on random swarms") {
  Gen gen{31};
  for (int trial = 0; trial < 100; ++trial) {
    const int dims = 1 + trial % 3;
    const auto g = box(dims, 3 + gen.below(8), 0.2);
    const std::size_t n = 1 + gen.below(4000);
    const auto s = random_swarm(gen, g, n, gen.uniform());
    const auto p = phys(n, dims);
    const auto stats = bin_samples(s, g);
    const auto a = estimate_impulse(stats, p), b = direct_impulse(s, p);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-12 * std::max(1.0, std::abs(b[k])));
    CHECK(rel_close(estimate_kinetic(stats, p), kinetic_from_mean_velocity(stats, p), 1e-12));
    CHECK(estimate_kinetic(stats, p) >= 0.0);
  }
}

TEST_CASE("kinetic examples") {
  const auto g = box(1, 4, 0.5);
  const std::uint64_t n = 40;
  const auto p = phys(n, 1);
  SwarmState s;
  for (std::uint64_t i = 0; i < n; ++i) s.push_back({{0.1, 0, 0}, SpeedTag::Zero, i});
  CHECK(estimate_kinetic(bin_samples(s, g), p) == 0.0);
  for (auto& t : s.speed) t = SpeedTag::PlusX;
  const auto st = bin_samples(s, g);
  // the whole particle moves at c
  CHECK(estimate_kinetic(st, p) == doctest::Approx(0.5 * p.mass * p.c * p.c).epsilon(1e-14));
  CHECK(estimate_kinetic(st, p) / kinetic_from_mean_velocity(st, p) == doctest::Approx(1.0).epsilon(1e-15));
  for (std::uint64_t i = 0; i < n; i += 2) s.speed[i] = SpeedTag::MinusX;
  CHECK(estimate_kinetic(bin_samples(s, g), p) == 0.0);
}

TEST_CASE("potential examples") {
  const auto g = box(1, 4, 0.5);
  const auto p = phys(5, 1);
  SwarmState s;
  for (int i = 0; i < 5; ++i) s.push_back({{1.2, 0, 0}, SpeedTag::Zero, std::uint64_t(i)});
  CHECK(estimate_potential(bin_samples(s, g), ScalarField(g, 0.0)) == 0.0);
  ScalarField v(g, 1.0);
  v[2] = -3.25;
  CHECK(estimate_potential(bin_samples(s, g), v) == -3.25);
  (void)p;
}

TEST_CASE("potential estimate matches quadrature within the sampling band") {
  GridSpec g = box(1, 128, 0.125);
  g.boundary = Boundary::Reflecting;
  auto psi = gaussian_packet(g, 1.0, {8, 0, 0}, {0, 0, 0});
  psi.normalize();
  const auto v = sample_field(g, [](auto x) { return 0.5 * (x[0] - 7) * (x[0] - 7); });
  PhysicalConfig ph;
  const auto ref = observe_wave(psi, ph, v, {0, 0, 0});
  const std::uint64_t n = 200000;
  const auto s = sample_initial_swarm(psi.density().rho, nullptr, n, 1.0, 4);
  const double est = estimate_potential(bin_samples(s, g), v);
  double m2 = 0;
  const auto rho = psi.density();
  for (std::size_t i = 0; i < v.size(); ++i) m2 += rho.rho[i] * g.dx * v[i] * v[i];
  const double sd = std::sqrt(m2 - ref.potential * ref.potential);
  CHECK(std::abs(est - ref.potential) < 5 * sd / std::sqrt(double(n)));
}

TEST_CASE("angular examples") {
  const auto p = phys(1, 3);
  SwarmState s;
  s.push_back({{0, 0, 0}, SpeedTag::Zero, 0});
  CHECK(estimate_angular(s, p, {0, 0, 0}) == std::array<double, 3>{0, 0, 0});
  SwarmState y;
  y.push_back({{2.0, 0, 0}, SpeedTag::PlusY, 0});
  const auto l = estimate_angular(y, p, {0, 0, 0});
  CHECK(l[0] == 0.0);
  CHECK(l[1] == 0.0);
  CHECK(l[2] == doctest::Approx(2.0 * p.sample_mass() * p.c));
}

TEST_CASE("a reaction of change moves angular momentum by at most m c dx") {
  Gen gen{8};
  const double dx = 0.3;
  const auto p = phys(100, 3);
  KeyedRng rng(1, 2, 3, 4);
  for (int trial = 0; trial < 500; ++trial) {
    Sample a, b;
    for (int k = 0; k < 3; ++k) a.pos[k] = 5 * gen.uniform();
    // random point within dx of a
    std::array<double, 3> d;
    double len2;
    do {
      for (auto& x : d) x = (2 * gen.uniform() - 1) * dx;
      len2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    } while (len2 > dx * dx);
    for (int k = 0; k < 3; ++k) b.pos[k] = a.pos[k] + d[k];
    if (trial % 2) {
      a.speed = moving_tag(gen.below(3), 1);
      b.speed = opposite(a.speed);
    }
    SwarmState before, after;
    before.push_back(a);
    before.push_back(b);
    const auto [ra, rb] = reaction_of_change(a, b, dx, 3, rng);
    after.push_back(ra);
    after.push_back(rb);
    const auto l0 = estimate_angular(before, p, {1, 2, 3}), l1 = estimate_angular(after, p, {1, 2, 3});
    double change = 0;
    for (int k = 0; k < 3; ++k) change += (l1[k] - l0[k]) * (l1[k] - l0[k]);
    CHECK(std::sqrt(change) <= p.sample_mass() * p.c * dx * (1 + 1e-12));
  }
}

TEST_CASE("observables are permutation invariant") {
  Gen gen{2};
  const auto g = box(2, 6, 0.25);
  auto s = random_swarm(gen, g, 500, 0.4);
  const auto p = phys(500, 2);
  const ScalarField v = sample_field(g, [](auto x) { return x[0] + 2 * x[1]; });
  const auto r0 = observe_swarm(s, g, p, v, {0.7, 0.7, 0});
  SwarmState rev;
  for (std::size_t i = s.size(); i-- > 0;) rev.push_back(s.sample(i));
  const auto r1 = observe_swarm(rev, g, p, v, {0.7, 0.7, 0});
  CHECK(r0.impulse == r1.impulse);
  CHECK(r0.kinetic == doctest::Approx(r1.kinetic).epsilon(1e-14));
  CHECK(r0.potential == doctest::Approx(r1.potential).epsilon(1e-14));
  for (int k = 0; k < 3; ++k) CHECK(r0.angular[k] == doctest::Approx(r1.angular[k]).epsilon(1e-12));
}

TEST_CASE("wave observables of a moving packet") {
  GridSpec g = box(1, 256, 0.0625);
  PhysicalConfig ph;
  auto psi = gaussian_packet(g, 1.0, {8, 0, 0}, {1.5, 0, 0});
  psi.normalize();
  const auto r = observe_wave(psi, ph, ScalarField(g, 0.0), {0, 0, 0});
  CHECK(r.mean_position[0] == doctest::Approx(8.0).epsilon(1e-6));
  CHECK(r.impulse[0] == doctest::Approx(1.5).epsilon(2e-3));
  // <p^2>/2M = (K^2 + 1/(4 sigma^2)) / 2 up to O(dx^2)
  CHECK(r.kinetic == doctest::Approx(0.5 * (1.5 * 1.5 + 0.25)).epsilon(2e-3));
}

TEST_CASE("Ehrenfest report") {
  std::vector<ObservableRecord> a(5), b(5);
  for (int i = 0; i < 5; ++i) {
    a[i].mean_position[0] = b[i].mean_position[0] = std::sin(i);
    b[i].kinetic = 1.0 - 0.1 * i;
    b[i].potential = 0.1 * i;
  }
  a[3].mean_position[0] += 0.02;
  auto rep = ehrenfest_check(a, b, 0.05, 1e-9, 1);
  CHECK(rep.frames == 5);
  CHECK(rep.max_position_deviation == doctest::Approx(0.02));
  CHECK(rep.reference_energy_drift <= 1e-15);
  CHECK(rep.within_band);
  CHECK_FALSE(ehrenfest_check(a, b, 0.01, 1e-9, 1).within_band);
  const auto w = window_average(b);
  CHECK(w.kinetic == doctest::Approx(0.8));
}
