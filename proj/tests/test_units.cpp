#include <doctest.h>

#include <cmath>

#include "ddswarm/config_file.hpp"
#include "ddswarm/error.hpp"
#include "ddswarm/units.hpp"

using namespace ddswarm;

namespace {

PhysicalConfig physics(double n = 1e6, int dims = 1) {
  PhysicalConfig p;
  p.h = 1;
  p.mass = 1;
  p.c = 1;
  p.n_samples = static_cast<std::uint64_t>(n);
  p.dims = dims;
  return p;
}

GridSpec grid(double dx = 0.1, double dt = 0.001, int dims = 1) {
  GridSpec g;
  g.dx = dx;
  g.dt = dt;
  g.dims = dims;
  g.extent = {16, dims > 1 ? 16 : 1, dims > 2 ? 16 : 1};
  return g;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("intensity for a million samples at dx 0.1") {
  const auto c = validate(physics(), grid());
  CHECK(c.physics.sample_mass() == doctest::Approx(1e-6).epsilon(1e-15));
  CHECK(c.coefficients().intensity == doctest::Approx(5e14).epsilon(1e-12));
}

TEST_CASE("gamma at dx 0.1") {
  CHECK(validate(physics(), grid()).coefficients().gamma == doctest::Approx(50.0).epsilon(1e-14));
}

TEST_CASE("kappa and alpha follow their definitions") {
  const auto k = validate(physics(1e3), grid(0.5, 0.01)).coefficients();
  CHECK(k.kappa == doctest::Approx(1.0 / (1e-3 * 0.5)));
  CHECK(k.alpha == doctest::Approx(-3.0 / (1e-3 * 0.25)));
  CHECK(k.g == 1.0);
}

TEST_CASE("scale separation violation") {
  CHECK(code_of([] { validate(physics(), grid(0.1, 0.05)); }) == ErrorCode::ScaleSeparationViolated);
  // the boundary case c dt = dx / 10 is allowed
  CHECK_NOTHROW(validate(physics(), grid(0.1, 0.01)));
}

TEST_CASE("non-positive scales are rejected") {
  CHECK(code_of([] { validate(physics(), grid(0.0)); }) == ErrorCode::NonPositiveScale);
  CHECK(code_of([] { validate(physics(), grid(0.1, -1)); }) == ErrorCode::NonPositiveScale);
  CHECK(code_of([] {
          auto p = physics();
          p.c = 0;
          validate(p, grid());
        }) == ErrorCode::NonPositiveScale);
  CHECK(code_of([] {
          auto p = physics();
          p.mass = -1;
          validate(p, grid());
        }) == ErrorCode::NonPositiveScale);
  CHECK(code_of([] {
          auto p = physics();
          p.n_samples = 0;
          validate(p, grid());
        }) == ErrorCode::NonPositiveScale);
}

TEST_CASE("extent and dims checks") {
  auto g = grid();
  g.extent[0] = 1;
  CHECK(code_of([&] { validate(physics(), g); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { validate(physics(1e6, 2), grid()); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("relativistic regime is a warning") {
  const auto quiet = validate(physics(), grid(), 0, 0.1);
  CHECK(quiet.warnings.empty());
  const auto loud = validate(physics(), grid(), 0, 0.5);
  REQUIRE(loud.warnings.size() == 1);
  CHECK(loud.warnings[0].rfind("RelativisticRegime", 0) == 0);
}

TEST_CASE("grain law: halving dx") {
  for (int dims = 1; dims <= 3; ++dims) {
    const auto a = derive_coefficients(physics(1e5, dims), grid(0.2, 0.001, dims));
    const auto b = derive_coefficients(physics(1e5, dims), grid(0.1, 0.001, dims));
    CHECK(b.intensity / a.intensity == 8.0);
    CHECK(b.kappa / a.kappa == 2.0);
    CHECK(b.gamma / a.gamma == 4.0);
    CHECK(b.alpha / a.alpha == 4.0);
  }
}

TEST_CASE("coefficients recompute bit-identically") {
  const auto c = validate(physics(12345), grid(0.37, 0.0001));
  const auto a = c.coefficients();
  const auto b = c.coefficients();
  CHECK(a.intensity == b.intensity);
  CHECK(a.kappa == b.kappa);
  CHECK(a.gamma == b.gamma);
  CHECK(a.alpha == b.alpha);
}

TEST_CASE("alternative intensity form is only documented") {
  const auto p = physics(100);
  const auto g = grid(0.5, 0.01);
  CHECK(alternative_intensity(p, g) == doctest::Approx(1.0 / (1e-6 * 0.125)));
}

TEST_CASE("internal units") {
  SUBCASE("electron-like scales map to h = M = 1") {
    PhysicalConfig p = physics(1000);
    p.h = 6.6e-34;
    p.mass = 9.1e-31;
    p.c = 2.0e3;
    GridSpec g = grid(1e-9, 1e-16);
    const auto in = to_internal_units(p, g);
    CHECK(in.physics.h == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(in.physics.mass == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(in.scale.time == doctest::Approx(9.1e-31 / 6.6e-34));
    // c dt / dx is dimensionless and must survive
    CHECK(in.physics.c * in.grid.dt / in.grid.dx == doctest::Approx(p.c * g.dt / g.dx).epsilon(1e-14));
  }
  SUBCASE("identity config") {
    const auto p = physics(10);
    const auto g = grid();
    const auto in = to_internal_units(p, g);
    CHECK(in.physics.h == 1.0);
    CHECK(in.physics.mass == 1.0);
    CHECK(in.physics.c == p.c);
    CHECK(in.grid.dt == g.dt);
  }
  SUBCASE("round trip") {
    std::uint64_t s = 99;
    for (int i = 0; i < 200; ++i) {
      auto u = [&] {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return std::ldexp(static_cast<double>(s >> 11), -53);
      };
      PhysicalConfig p = physics(1 + static_cast<int>(u() * 1000));
      p.h = std::pow(10.0, -40 + 40 * u());
      p.mass = std::pow(10.0, -35 + 40 * u());
      p.c = std::pow(10.0, -3 + 6 * u());
      GridSpec g = grid(std::pow(10.0, -10 + 10 * u()), std::pow(10.0, -10 + 10 * u()));
      const auto back = from_internal_units(to_internal_units(p, g));
      CHECK(std::abs(back.physics.h / p.h - 1) <= 1e-14);
      CHECK(std::abs(back.physics.mass / p.mass - 1) <= 1e-14);
      CHECK(std::abs(back.physics.c / p.c - 1) <= 1e-14);
      CHECK(std::abs(back.grid.dx / g.dx - 1) <= 1e-14);
      CHECK(std::abs(back.grid.dt / g.dt - 1) <= 1e-14);
      CHECK(back.physics.n_samples == p.n_samples);
    }
  }
}

TEST_CASE("config file parsing") {
  const auto raw = parse_config_text(
      "# comment\n"
      "h = 1\nmass = 2\ncharge = -1\nc = 3\nn_samples = 500\n"
      "dx = 0.5\ndt = 0.01 # trailing\nextent_x = 8\nextent_y = 4\nextent_z = 9\n"
      "dims = 2\nboundary = reflecting\nseed = 42\n");
  CHECK(raw.physics.mass == 2);
  CHECK(raw.physics.charge == -1);
  CHECK(raw.physics.sample_charge() == doctest::Approx(-1.0 / 500));
  CHECK(raw.grid.extent[0] == 8);
  CHECK(raw.grid.extent[1] == 4);
  CHECK(raw.grid.extent[2] == 1);
  CHECK(raw.grid.boundary == Boundary::Reflecting);
  CHECK(raw.seed == 42);
  CHECK(raw.physics.dims == 2);
  CHECK(raw.grid.dims == 2);

  const auto again = parse_config_text(format_config(raw));
  CHECK(again.grid.dx == raw.grid.dx);
  CHECK(again.physics.n_samples == raw.physics.n_samples);
  CHECK(again.seed == raw.seed);

  CHECK(code_of([] { parse_config_text("colour = red\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config_text("dx 0.1\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config_text("dx = abc\n"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("error codes split into validation and runtime") {
  CHECK(is_validation_error(ErrorCode::ScaleSeparationViolated));
  CHECK(is_validation_error(ErrorCode::InvalidConfig));
  CHECK_FALSE(is_validation_error(ErrorCode::UnstableStep));
  CHECK_FALSE(is_validation_error(ErrorCode::NormDrift));
}
