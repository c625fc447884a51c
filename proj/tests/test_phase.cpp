#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ddswarm/error.hpp"
#include "ddswarm/phase.hpp"
#include "ddswarm/quantum.hpp"

using namespace ddswarm;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

struct Gen {
  std::uint64_t s;
  double uniform() {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(s >> 11) * 0x1.0p-53;
  }
};

GridSpec plane(int n, double dx, Boundary b = Boundary::Reflecting) {
  GridSpec g;
  g.dims = 2;
  g.dx = dx;
  g.dt = 0.001;
  g.extent = {n, n, 1};
  g.boundary = b;
  return g;
}

PhysicalConfig phys2() {
  PhysicalConfig p;
  p.dims = 2;
  p.n_samples = 1000000;
  return p;
}

// Cell impulses whose face averages give exactly the link increments f_b - f_a.
ImpulseField impulse_for_phase(const DensityField& rho, const std::vector<double>& f, double k) {
  const GridSpec& g = rho.rho.grid;
  const double dx3 = g.dx * g.dx * g.dx;
  ImpulseField p(g);
  for (int axis = 0; axis < 2; ++axis) {
    const int other = 1 - axis;
    for (int line = 0; line < g.extent[other]; ++line) {
      CellIndex3 c{0, 0, 0};
      c[other] = line;
      c[axis] = 0;
      p.v[axis][linear_index(g, c)] = 0.0;
      for (int i = 0; i + 1 < g.extent[axis]; ++i) {
        CellIndex3 ca = c, cb = c;
        ca[axis] = i;
        cb[axis] = i + 1;
        const auto a = linear_index(g, ca), b = linear_index(g, cb);
        const double q = std::sqrt(rho.rho[a] * rho.rho[b]) * std::sin(f[b] - f[a]) / (k * dx3);
        p.v[axis][b] = 2 * q - p.v[axis][a];
      }
    }
  }
  return p;
}

}  // namespace

TEST_CASE("link increment") {
  CHECK(link_increment(1, 1, 0, 5, 0.1) == 0.0);
  // k dx^3 p / sqrt(rho_a rho_b) = 0.5
  CHECK(link_increment(4, 1, 1000, 1.0, 0.1) == doctest::Approx(std::asin(0.5)));
  std::size_t clipped = 0;
  CHECK(link_increment(1, 1, 1e9, 1, 0.1, &clipped) == doctest::Approx(std::numbers::pi / 2));
  CHECK(clipped == 1);
}

TEST_CASE("antisymmetry and node cells") {
  Gen gen{3};
  const auto g = plane(8, 0.25);
  DensityField rho{ScalarField(g), true};
  ImpulseField p(g);
  for (std::size_t i = 0; i < rho.rho.size(); ++i) {
    rho.rho[i] = 0.1 + gen.uniform();
    p.v[0][i] = gen.uniform() - 0.5;
    p.v[1][i] = gen.uniform() - 0.5;
  }
  const double k = lattice_k(phys2(), g) * 0.01;
  for (std::size_t a = 0; a < rho.rho.size(); ++a)
    for (int axis = 0; axis < 2; ++axis) {
      std::size_t b;
      if (!neighbor(g, a, axis, +1, b)) continue;
      CHECK(link_phase(rho, p, a, b, k) == -link_phase(rho, p, b, a, k));
    }
  CHECK_THROWS_AS(link_phase(rho, p, 0, 9, k), Error);
  rho.rho[1] = 0.0;
  try {
    link_phase(rho, p, 0, 1, k, 1e-6);
    FAIL("expected NodeCell");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NodeCell);
  }
}

TEST_CASE("node floor") {
  GridSpec g = plane(4, 0.5);
  CHECK(node_floor(1000, g) == doctest::Approx(10.0 / (1000 * 0.25)));
}

TEST_CASE("gradient flows are path independent") {
  Gen gen{11};
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = plane(12, 0.2);
    DensityField rho{ScalarField(g), true};
    std::vector<double> f(g.cell_count());
    const double ax = gen.uniform(), ay = gen.uniform(), b = gen.uniform();
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto c = cell_coords(g, i);
      const double x = cell_center(g, c[0]), y = cell_center(g, c[1]);
      rho.rho[i] = 0.2 + gen.uniform();
      f[i] = ax * x * x + ay * y + b * x * y;
    }
    const double k = lattice_k(phys2(), g);
    const auto p = impulse_for_phase(rho, f, k);
    std::vector<std::pair<Contour, Contour>> paths;
    for (int q = 0; q < 6; ++q) {
      const CellIndex3 from{int(gen.uniform() * 12), int(gen.uniform() * 12), 0};
      const CellIndex3 to{int(gen.uniform() * 12), int(gen.uniform() * 12), 0};
      paths.push_back({axis_path(g, from, to, true), axis_path(g, from, to, false)});
      // and identical paths
      paths.push_back({axis_path(g, from, to, true), axis_path(g, from, to, true)});
      CHECK(contour_phase(rho, p, axis_path(g, from, to), k) ==
            doctest::Approx(f[linear_index(g, to)] - f[linear_index(g, from)]).epsilon(1e-10).scale(1.0));
    }
    const auto rep = path_independence_check(rho, p, paths, k);
    CHECK(rep.pairs == 12);
    CHECK(rep.max_residual <= 1e-12);
    CHECK(rep.windings.empty());

    // spanning tree recovers f up to the reference value
    const auto phase = reconstruct_phase(rho, p, 0, k);
    CHECK(phase.components == 1);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(phase.phi[i] == doctest::Approx(f[i] - f[0]).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("gauge shift leaves the reconstruction unchanged") {
  const auto g = plane(10, 0.2);
  DensityField rho{ScalarField(g, 1.0), true};
  std::vector<double> f(g.cell_count()), f2(g.cell_count());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = 0.05 * static_cast<double>(i % 10) + 0.03 * static_cast<double>(i / 10);
    f2[i] = f[i] + 1.234;
  }
  const double k = lattice_k(phys2(), g);
  const auto p1 = impulse_for_phase(rho, f, k), p2 = impulse_for_phase(rho, f2, k);
  const auto a = reconstruct_phase(rho, p1, 0, k), b = reconstruct_phase(rho, p2, 0, k);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(a.phi[i] == doctest::Approx(b.phi[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("vortex winds by two pi") {
  const auto g = plane(40, 0.25);
  const auto ph = phys2();
  WaveField psi(g);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const auto c = cell_coords(g, i);
    const double x = cell_center(g, c[0]) - 5.0, y = cell_center(g, c[1]) - 5.0;
    const double env = std::exp(-(x * x + y * y) / 8.0);
    psi.psi_r[i] = x * env;
    psi.psi_i[i] = y * env;
  }
  psi.normalize();
  const auto rho = psi.density();
  const auto p = wave_impulse(psi, ph);
  const double k = lattice_k(ph, g);
  // the node sits on the corner shared by cells 19 and 20
  const auto loop = square_contour(g, {20, 20, 0}, 6);
  const double total = contour_phase(rho, p, loop, k);
  CHECK(total == doctest::Approx(kTwoPi).epsilon(0.05));
  std::vector<std::pair<Contour, Contour>> paths{
      {axis_path(g, {14, 14, 0}, {26, 26, 0}, true), axis_path(g, {14, 14, 0}, {26, 26, 0}, false)}};
  const auto rep = path_independence_check(rho, p, paths, k);
  REQUIRE(rep.windings.size() == 1);
  CHECK(std::abs(rep.windings[0]) == 1);
}

TEST_CASE("closed contour sums of log-density gradients vanish") {
  Gen gen{5};
  const auto g = plane(16, 0.1, Boundary::Periodic);
  std::vector<double> r(g.cell_count());
  for (double& x : r) x = 0.1 + gen.uniform();
  for (int w = 1; w < 7; ++w) {
    const auto loop = square_contour(g, {8, 8, 0}, w);
    double sum = 0;
    const std::size_t n = loop.cells.size();
    for (std::size_t i = 0; i < n; ++i) sum += std::log(r[loop.cells[(i + 1) % n]]) - std::log(r[loop.cells[i]]);
    CHECK(std::abs(sum) <= 1e-13);
  }
}

TEST_CASE("circulation of a static symmetric state is zero") {
  const auto g = plane(32, 0.25);
  DensityField rho{sample_field(g, [](auto x) { return std::exp(-((x[0] - 4) * (x[0] - 4) + (x[1] - 4) * (x[1] - 4))); }), true};
  ImpulseField p(g);
  CHECK(circulation(rho, p, square_contour(g, {16, 16, 0}, 5), 1.0) == 0.0);

  // a symmetric outward flow has no circulation either
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto c = cell_coords(g, i);
    p.v[0][i] = rho.rho[i] * (cell_center(g, c[0]) - 4);
    p.v[1][i] = rho.rho[i] * (cell_center(g, c[1]) - 4);
  }
  CHECK(std::abs(circulation(rho, p, square_contour(g, {16, 16, 0}, 5), 1.0)) <= 1e-13);

  DensityField holed = rho;
  holed.rho[linear_index(g, {11, 11, 0})] = 0.0;
  try {
    circulation(holed, p, square_contour(g, {16, 16, 0}, 5), 1.0, 1e-9);
    FAIL("expected NodeCrossing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NodeCrossing);
  }
}

TEST_CASE("k calibration") {
  PhysicalConfig p;
  GridSpec g;
  g.dims = 1;
  g.dx = 0.1;
  g.dt = 0.001;
  g.extent = {200, 1, 1};
  const auto cal = calibrate_k(p, g, 1.5);
  CHECK(cal.residual < 0.01);
  CHECK(cal.k_cal == doctest::Approx(lattice_k(p, g)).epsilon(0.01));

  // holdout wavenumber
  for (double kprime : {0.5, 1.0, 2.5}) {
    GridSpec open = g;
    open.boundary = Boundary::Reflecting;
    const auto [rho, imp] = plane_wave_fields(p, open, kprime);
    const double slope = phase_slope_x(reconstruct_phase(rho, imp, 0, cal.k_cal));
    CHECK(slope == doctest::Approx(kprime).epsilon(0.02));
  }

  // k_cal scales as dx^-2
  GridSpec h = g;
  h.dx = 0.05;
  h.extent = {400, 1, 1};
  const double ratio = calibrate_k(p, h, 1.5).k_cal / cal.k_cal;
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
}
