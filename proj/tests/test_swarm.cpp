#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ddswarm/error.hpp"
#include "ddswarm/swarm.hpp"

using namespace ddswarm;

namespace {

GridSpec grid1(int nx = 16, double dx = 0.5, Boundary b = Boundary::Periodic) {
  GridSpec g;
  g.dx = dx;
  g.dt = 0.01;
  g.dims = 1;
  g.extent = {nx, 1, 1};
  g.boundary = b;
  return g;
}

PhysicalConfig phys(std::uint64_t n, int dims = 1) {
  PhysicalConfig p;
  p.n_samples = n;
  p.dims = dims;
  return p;
}

// Small linear congruential generator for property-test inputs.
struct Gen {
  std::uint64_t s;
  std::uint64_t next() {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return s >> 17;
  }
  double uniform() { return static_cast<double>(next() & ((1ULL << 40) - 1)) / (1ULL << 40); }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

SpeedTag random_tag(Gen& g, int dims) {
  const int k = g.below(2 * dims + 1);
  return static_cast<SpeedTag>(k);
}

SwarmState random_swarm(Gen& g, const GridSpec& grid, std::size_t n) {
  SwarmState s;
  for (std::size_t i = 0; i < n; ++i) {
    Sample x;
    for (int a = 0; a < grid.dims; ++a) x.pos[a] = g.uniform() * grid.length(a);
    x.speed = random_tag(g, grid.dims);
    x.id = i;
    s.push_back(x);
  }
  return s;
}

std::array<std::int64_t, 3> net_impulse(const SwarmState& s) {
  std::array<std::int64_t, 3> out{0, 0, 0};
  for (auto t : s.speed)
    if (is_moving(t)) out[axis_of(t)] += sign_of(t);
  return out;
}

}  // namespace

TEST_CASE("speed tags") {
  for (int a = 0; a < 3; ++a)
    for (int sgn : {1, -1}) {
      const auto t = moving_tag(a, sgn);
      CHECK(axis_of(t) == a);
      CHECK(sign_of(t) == sgn);
      CHECK(opposite(opposite(t)) == t);
      CHECK(sign_of(opposite(t)) == -sgn);
    }
  CHECK(opposite(SpeedTag::Zero) == SpeedTag::Zero);
  CHECK(std::string(to_string(SpeedTag::MinusY)) == "-y");
}

TEST_CASE("tally examples") {
  std::vector<SpeedTag> eight(8, SpeedTag::Zero);
  auto st = tally(eight);
  CHECK(st.n == 8);
  CHECK(st.n_zero == 8);
  CHECK(st.s == 0);

  std::vector<SpeedTag> three{SpeedTag::PlusX, SpeedTag::MinusX, SpeedTag::PlusX};
  st = tally(three);
  CHECK(st.n_plus[0] == 2);
  CHECK(st.n_minus[0] == 1);
  CHECK(st.s == 2);
  CHECK(st.net(0) == 1);

  st = tally({});
  CHECK(st.n == 0);
  CHECK(st.s == 0);
}

TEST_CASE("binning and density") {
  GridSpec g;
  g.dx = 0.5;
  g.dims = 3;
  g.dt = 0.001;
  g.extent = {2, 2, 2};
  SwarmState s;
  for (int i = 0; i < 8; ++i) s.push_back(Sample{{0.1 + 0.01 * i, 0.2, 0.3}, SpeedTag::Zero, std::uint64_t(i)});
  const auto stats = bin_samples(s, g);
  CHECK(stats[0].n == 8);
  CHECK(stats[0].n_zero == 8);
  for (std::size_t c = 1; c < stats.size(); ++c) CHECK(stats[c].n == 0);
  const auto d = density(stats, g);
  CHECK(d.counts.rho[0] == 64.0);
  CHECK(d.counts.rho[5] == 0.0);
  CHECK(d.total == 8);
  CHECK(d.counts.rho.integral() == 8.0);
  CHECK(d.normalized.rho.integral() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.normalized.normalized);
}

TEST_CASE("half-open cells and out-of-domain positions") {
  const auto g = grid1(4, 0.5);
  CHECK(cell_of(g, {0.0, 0, 0}) == 0);
  CHECK(cell_of(g, {0.5, 0, 0}) == 1);
  CHECK(cell_of(g, {1.999, 0, 0}) == 3);
  CHECK_THROWS_AS(cell_of(g, {2.0, 0, 0}), Error);
  CHECK_THROWS_AS(cell_of(g, {-0.1, 0, 0}), Error);
}

TEST_CASE("density partitions the sample count") {
  Gen gen{11};
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = grid1(4 + gen.below(30), 0.25);
    const auto s = random_swarm(gen, g, 1 + gen.below(3000));
    const auto d = density(bin_samples(s, g), g);
    double sum = 0;
    for (double r : d.counts.rho.v) sum += r * g.cell_volume();
    CHECK(sum == doctest::Approx(static_cast<double>(s.size())).epsilon(1e-14));
  }
}

TEST_CASE("reaction of change") {
  KeyedRng rng(1, 0, 0, 0);
  Sample a{{0.1, 0, 0}, SpeedTag::PlusX, 0}, b{{0.2, 0, 0}, SpeedTag::MinusX, 1};
  auto [ra, rb] = reaction_of_change(a, b, 0.5, 1, rng);
  CHECK(ra.speed == SpeedTag::Zero);
  CHECK(rb.speed == SpeedTag::Zero);
  CHECK(ra.pos == a.pos);

  Sample z1{{0.1, 0, 0}, SpeedTag::Zero, 0}, z2{{0.2, 0.1, 0}, SpeedTag::Zero, 1};
  std::map<std::pair<int, int>, int> seen;
  const int trials = 60000;
  for (int i = 0; i < trials; ++i) {
    auto [x, y] = reaction_of_change(z1, z2, 0.5, 3, rng);
    REQUIRE(x.speed == opposite(y.speed));
    REQUIRE(is_moving(x.speed));
    ++seen[{axis_of(x.speed), sign_of(x.speed)}];
  }
  CHECK(seen.size() == 6);
  const double p = 1.0 / 6;
  for (auto& [k, v] : seen) CHECK(std::abs(v - trials * p) < 5 * std::sqrt(trials * p * (1 - p)));

  Sample far{{0.9, 0, 0}, SpeedTag::MinusX, 2};
  CHECK_THROWS_AS(reaction_of_change(a, far, 0.5, 1, rng), Error);
  try {
    reaction_of_change(a, a, 0.5, 1, rng);
    FAIL("expected PairNotOpposite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PairNotOpposite);
  }
  try {
    reaction_of_change(a, far, 0.5, 1, rng);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PairTooFar);
  }
}

TEST_CASE("step1: hundred resting samples at d = 0.04") {
  // oracle: pair count k minimising |2k / (100 - 2k) - d|
  const double d = 0.04;
  int best = 0;
  for (int k = 0; k < 50; ++k)
    if (std::abs(2.0 * k / (100 - 2 * k) - d) < std::abs(2.0 * best / (100 - 2 * best) - d)) best = k;
  REQUIRE(best == 2);

  std::vector<SpeedTag> cell(100, SpeedTag::Zero);
  KeyedRng rng(5, 0, 0, kStreamBalance);
  const auto out = step1_balance(cell, 1, d, RoundingPolicy::Nearest, rng);
  const auto st = tally(cell);
  CHECK(out.pairs_created == static_cast<std::uint32_t>(best));
  CHECK(st.s == 2u * best);
  CHECK(st.n_zero == 100u - 2u * best);
  CHECK(st.n_plus[0] == st.n_minus[0]);
}

TEST_CASE("step1: stochastic rounding hits the ratio on average") {
  const double d = 0.04;
  double s_sum = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    std::vector<SpeedTag> cell(100, SpeedTag::Zero);
    KeyedRng rng(6, t, 0, kStreamBalance);
    step1_balance(cell, 1, d, RoundingPolicy::Stochastic, rng);
    s_sum += tally(cell).s;
  }
  // expected movers n * d / (1 + d)
  CHECK(s_sum / trials == doctest::Approx(100 * d / (1 + d)).epsilon(0.01));
}

TEST_CASE("step1: fixed point and the d = 0 limit") {
  std::vector<SpeedTag> cell(96, SpeedTag::Zero);
  for (int i = 0; i < 2; ++i) {
    cell.push_back(SpeedTag::PlusX);
    cell.push_back(SpeedTag::MinusX);
  }
  KeyedRng rng(1, 1, 1, kStreamBalance);
  const auto out = step1_balance(cell, 1, 4.0 / 96.0, RoundingPolicy::Nearest, rng);
  CHECK(out.pairs_created == 0);
  CHECK(out.pairs_annihilated == 0);
  CHECK(tally(cell).s == 4);

  Gen gen{3};
  for (int trial = 0; trial < 50; ++trial) {
    const int dims = 1 + gen.below(3);
    std::vector<SpeedTag> c(1 + gen.below(200));
    for (auto& t : c) t = random_tag(gen, dims);
    const auto before = tally(c);
    KeyedRng r(9, trial, 0, kStreamBalance);
    step1_balance(c, dims, 0.0, RoundingPolicy::Stochastic, r);
    const auto after = tally(c);
    CHECK(after.s == 0);
    for (int a = 0; a < dims; ++a) CHECK(after.net(a) == before.net(a));
  }
}

TEST_CASE("step1 properties: count, impulse and closure") {
  Gen gen{21};
  for (int trial = 0; trial < 300; ++trial) {
    const int dims = 1 + gen.below(3);
    std::vector<SpeedTag> c(gen.below(400));
    for (auto& t : c) t = random_tag(gen, dims);
    const auto before = tally(c);
    KeyedRng r(2, trial, 7, kStreamBalance);
    const double d = gen.uniform() * 0.6;
    step1_balance(c, dims, d, trial % 2 ? RoundingPolicy::Nearest : RoundingPolicy::Stochastic, r);
    const auto after = tally(c);
    CHECK(after.n == before.n);
    for (int a = 0; a < 3; ++a) CHECK(after.net(a) == before.net(a));
    for (auto t : c) CHECK(static_cast<int>(t) <= 2 * dims);
  }
}

TEST_CASE("step2: zero gradient changes nothing") {
  std::vector<SpeedTag> cell(50, SpeedTag::Zero);
  KeyedRng rng(1, 0, 0, kStreamKick);
  const auto out = step2_potential_kick(cell, 3, {0, 0, 0}, 0.01, phys(50, 3), rng);
  CHECK(out.granted == std::array<std::uint32_t, 3>{0, 0, 0});
  CHECK(tally(cell).n_zero == 50);
}

TEST_CASE("step2: sign rule and Monte-Carlo impulse") {
  const auto p = phys(100);
  const double g = 2.5, dt = 0.01;
  const int trials = 20000;
  double sum = 0, sum2 = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<SpeedTag> cell(100, SpeedTag::Zero);
    KeyedRng rng(4, t, 0, kStreamKick);
    step2_potential_kick(cell, 1, {g, 0, 0}, dt, p, rng);
    double imp = 0;
    for (auto s : cell) {
      REQUIRE(s != SpeedTag::PlusX);
      if (s == SpeedTag::MinusX) imp -= p.sample_mass() * p.c;
    }
    sum += imp;
    sum2 += imp * imp;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sum2 / trials - mean * mean) / trials);
  // the whole particle sits in this cell, so the impulse over dt is -V_x dt
  CHECK(std::abs(mean - (-g * dt)) < 3 * se + 1e-15);
}

TEST_CASE("step2: saturation when stationary samples run out") {
  std::vector<SpeedTag> cell{SpeedTag::Zero, SpeedTag::Zero, SpeedTag::PlusX};
  KeyedRng rng(1, 0, 0, kStreamKick);
  const auto out = step2_potential_kick(cell, 1, {-1e6, 0, 0}, 0.01, phys(3), rng);
  CHECK(out.saturated);
  CHECK(out.granted[0] == 2);
  CHECK(tally(cell).n_plus[0] == 3);
}

TEST_CASE("step2: counter-moving samples are stopped once stationary ones run out") {
  std::vector<SpeedTag> cell{SpeedTag::MinusX, SpeedTag::Zero, SpeedTag::MinusX, SpeedTag::PlusY};
  KeyedRng rng(2, 0, 0, kStreamKick);
  const auto out = step2_potential_kick(cell, 2, {-1e6, 0, 0}, 0.01, phys(4), rng);
  CHECK(out.saturated);
  CHECK(out.granted[0] == 3);
  const auto t = tally(cell);
  CHECK(t.n_plus[0] == 1);
  CHECK(t.n_minus[0] == 0);
  CHECK(t.n_plus[1] == 1);
  CHECK(t.n_zero == 2);
}

TEST_CASE("step3 examples") {
  const auto g = grid1(8, 0.25);
  SwarmState s;
  s.push_back({{0.0, 0, 0}, SpeedTag::PlusX, 0});
  s.push_back({{1.0, 0, 0}, SpeedTag::Zero, 1});
  s.push_back({{2.0 - 1e-4, 0, 0}, SpeedTag::PlusX, 2});
  step3_advect(s, g, 1.0);
  CHECK(s.pos[0][0] == doctest::Approx(0.01));
  CHECK(s.pos[0][1] == 1.0);
  CHECK(s.pos[0][2] == doctest::Approx(0.01 - 1e-4));
  CHECK(s.id == std::vector<std::uint64_t>{0, 1, 2});

  auto r = grid1(8, 0.25, Boundary::Reflecting);
  SwarmState w;
  w.push_back({{2.0 - 0.004, 0, 0}, SpeedTag::PlusX, 0});
  w.push_back({{0.003, 0, 0}, SpeedTag::MinusX, 1});
  step3_advect(w, r, 1.0);
  CHECK(w.pos[0][0] == doctest::Approx(2.0 - 0.006));
  CHECK(w.speed[0] == SpeedTag::MinusX);
  CHECK(w.pos[0][1] == doctest::Approx(0.007));
  CHECK(w.speed[1] == SpeedTag::PlusX);
}

TEST_CASE("full step properties") {
  Gen gen{77};
  for (int trial = 0; trial < 40; ++trial) {
    const int dims = 1 + gen.below(3);
    GridSpec g;
    g.dims = dims;
    g.dx = 0.25;
    g.dt = 0.01;
    g.extent = {4 + gen.below(6), dims > 1 ? 4 + gen.below(6) : 1, dims > 2 ? 4 + gen.below(4) : 1};
    const std::size_t n = 100 + gen.below(5000);
    auto s = random_swarm(gen, g, n);
    auto cfg = validate(phys(n, dims), g, trial);
    auto pot = Potential::zero(g);
    SwarmParams params;
    params.moving_ratio = gen.uniform() * 0.4;
    const auto imp0 = net_impulse(s);
    for (int step = 0; step < 5; ++step) {
      std::map<std::uint64_t, std::array<double, 3>> before;
      for (std::size_t i = 0; i < s.size(); ++i) before[s.id[i]] = {s.pos[0][i], s.pos[1][i], s.pos[2][i]};
      full_step(s, pot, cfg, params);
      REQUIRE(s.size() == n);
      for (std::size_t i = 0; i < s.size(); ++i) {
        double moved = 0;
        for (int a = 0; a < dims; ++a) {
          double dlt = std::abs(s.pos[a][i] - before[s.id[i]][a]);
          dlt = std::min(dlt, g.length(a) - dlt);
          moved += dlt;
        }
        REQUIRE(moved <= 1.0 * g.dt * (1 + 1e-12));
        REQUIRE(static_cast<int>(s.speed[i]) <= 2 * dims);
      }
    }
    CHECK(net_impulse(s) == imp0);
    std::set<std::uint64_t> ids(s.id.begin(), s.id.end());
    CHECK(ids.size() == n);
  }
}

TEST_CASE("full step is independent of the worker count") {
  Gen gen{5};
  GridSpec g;
  g.dims = 2;
  g.dx = 0.25;
  g.dt = 0.01;
  g.extent = {12, 10, 1};
  const auto init = random_swarm(gen, g, 20000);
  auto pot = Potential(sample_field(g, [](auto x) { return 0.3 * x[0] * x[0] + 0.1 * x[1]; }));
  auto cfg = validate(phys(20000, 2), g, 3);
  std::vector<SwarmState> out;
  for (int w : {1, 2, 8}) {
    auto s = init;
    auto p = pot;
    SwarmParams params;
    params.moving_ratio = 0.2;
    params.workers = w;
    for (int i = 0; i < 20; ++i) full_step(s, p, cfg, params);
    out.push_back(std::move(s));
  }
  for (std::size_t k = 1; k < out.size(); ++k) {
    CHECK(out[k].pos == out[0].pos);
    CHECK(out[k].speed == out[0].speed);
    CHECK(out[k].id == out[0].id);
  }
}

TEST_CASE("uniform density stays uniform in expectation") {
  const auto g = grid1(8, 0.25);
  const std::uint64_t n = 80000;
  Gen gen{8};
  SwarmState s;
  for (std::uint64_t i = 0; i < n; ++i) s.push_back({{gen.uniform() * g.length(0), 0, 0}, SpeedTag::Zero, i});
  auto cfg = validate(phys(n), g, 1);
  auto pot = Potential::zero(g);
  SwarmParams params;
  params.moving_ratio = 0.3;
  for (int i = 0; i < 200; ++i) full_step(s, pot, cfg, params);
  const auto st = bin_samples(s, g);
  const double mean = static_cast<double>(n) / 8;
  for (const auto& c : st) CHECK(std::abs(c.n - mean) < 6 * std::sqrt(mean));
}

TEST_CASE("sort keeps samples grouped by cell") {
  Gen gen{12};
  const auto g = grid1(20, 0.1);
  auto s = random_swarm(gen, g, 3000);
  sort_by_cell(s, g, 2);
  REQUIRE(s.cell_start.size() == g.cell_count() + 1);
  for (std::size_t c = 0; c < g.cell_count(); ++c)
    for (auto i = s.cell_start[c]; i < s.cell_start[c + 1]; ++i) CHECK(cell_of(g, {s.pos[0][i], 0, 0}) == c);
}

TEST_CASE("initial swarm sampling") {
  SUBCASE("uniform counts stay within five standard deviations") {
    GridSpec g;
    g.dims = 2;
    g.dx = 0.1;
    g.dt = 0.001;
    g.extent = {40, 25, 1};
    ScalarField rho(g, 1.0 / (g.cell_count() * g.cell_volume()));
    const std::uint64_t n = 1000000;
    const auto s = sample_initial_swarm(rho, nullptr, n, 1.0, 17);
    CHECK(s.size() == n);
    const auto st = bin_samples(s, g);
    const double p = 1.0 / g.cell_count();
    const double mean = n * p, sd = std::sqrt(n * p * (1 - p));
    int outside = 0;
    for (const auto& c : st) outside += std::abs(c.n - mean) > 5 * sd;
    CHECK(outside == 0);
    CHECK(tally(s.speed).n_zero == n);
  }
  SUBCASE("point mass") {
    const auto g = grid1(10, 0.5);
    ScalarField rho(g, 0.0);
    rho[3] = 1.0 / g.cell_volume();
    const auto s = sample_initial_swarm(rho, nullptr, 5000, 1.0, 2);
    const auto st = bin_samples(s, g);
    CHECK(st[3].n == 5000);
  }
  SUBCASE("phase velocity sets the mean impulse") {
    const auto g = grid1(10, 0.5);
    ScalarField rho(g, 1.0 / (10 * 0.5));
    VectorField v(g);
    for (std::size_t i = 0; i < 10; ++i) v.v[0][i] = 0.25;
    const std::uint64_t n = 200000;
    const auto s = sample_initial_swarm(rho, &v, n, 1.0, 3);
    const auto st = tally(s.speed);
    CHECK(static_cast<double>(st.net(0)) / n == doctest::Approx(0.25).epsilon(0.01));
  }
  SUBCASE("negative density") {
    const auto g = grid1(4, 0.5);
    ScalarField rho(g, 0.5);
    rho[1] = -0.1;
    CHECK_THROWS_AS(sample_initial_swarm(rho, nullptr, 10, 1.0, 1), Error);
  }
}
