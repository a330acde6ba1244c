#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <tedg/scenarios.hpp>

using namespace tedg;

namespace {

// central differences of a field (x, y, t) -> value
template <typename F>
double d_dx(const F& f, double x, double y, double t, double h = 1e-6) {
  return (f(x + h, y, t) - f(x - h, y, t)) / (2.0 * h);
}
template <typename F>
double d_dy(const F& f, double x, double y, double t, double h = 1e-6) {
  return (f(x, y + h, t) - f(x, y - h, t)) / (2.0 * h);
}
template <typename F>
double d_dt(const F& f, double x, double y, double t, double h = 1e-6) {
  return (f(x, y, t + h) - f(x, y, t - h)) / (2.0 * h);
}

} // namespace

TEST_CASE("benchmark fields satisfy the anisotropic system to difference accuracy",
          "[scenarios][oracle]") {
  const Scenario sc = manufactured_scenario();
  REQUIRE(sc.has_exact);
  const MaterialFunctions& mat = sc.regions.at(0);

  std::mt19937 rng(555u);
  std::uniform_real_distribution<double> uni(-0.95, 0.95);
  std::uniform_real_distribution<double> ut(0.05, 1.95);

  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    double x = uni(rng), y = uni(rng);
    // the off-diagonal permittivity has a kink at the origin; stay clear of it
    while (x * x + y * y < 0.05) {
      x = uni(rng);
      y = uni(rng);
    }
    const double t = ut(rng);

    const double r1 = mat.eps_xx(x, y) * d_dt(sc.exact_ex, x, y, t) +
                      mat.eps_xy(x, y) * d_dt(sc.exact_ey, x, y, t) -
                      d_dy(sc.exact_hz, x, y, t) - source_value_x(sc, x, y, t);
    const double r2 = mat.eps_xy(x, y) * d_dt(sc.exact_ex, x, y, t) +
                      mat.eps_yy(x, y) * d_dt(sc.exact_ey, x, y, t) +
                      d_dx(sc.exact_hz, x, y, t) - source_value_y(sc, x, y, t);
    const double r3 = mat.mu(x, y) * d_dt(sc.exact_hz, x, y, t) -
                      d_dy(sc.exact_ex, x, y, t) + d_dx(sc.exact_ey, x, y, t) -
                      source_value_h(sc, x, y, t);
    worst = std::max({worst, std::abs(r1), std::abs(r2), std::abs(r3)});
  }
  REQUIRE(worst < 1e-7);
}

TEST_CASE("benchmark solution vanishes at whole periods", "[scenarios]") {
  const Scenario sc = manufactured_scenario();
  std::mt19937 rng(7u);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double x = uni(rng), y = uni(rng);
    for (double t : {0.0, 1.0, 2.0}) {
      REQUIRE(std::abs(sc.exact_ex(x, y, t)) < 1e-13);
      REQUIRE(std::abs(sc.exact_ey(x, y, t)) < 1e-13);
      REQUIRE(std::abs(sc.exact_hz(x, y, t)) < 1e-13);
    }
  }
}

TEST_CASE("benchmark fields hit hand-computed values", "[scenarios]") {
  const Scenario sc = manufactured_scenario();
  // at (0.5, 0): eps_yy = 1.25, det = 0.25 + 1 + 0 + 1 = 2.25
  REQUIRE_THAT(sc.exact_ex(0.5, 0.0, 0.5),
               Catch::Matchers::WithinAbs(-std::sqrt(1.25 / 2.25), 1e-14));
  // at (0, 0.5): eps_xx = 1.25, det = 1
  REQUIRE_THAT(sc.exact_ey(0.0, 0.5, 0.5),
               Catch::Matchers::WithinAbs(std::sqrt(1.25), 1e-14));
  REQUIRE_THAT(sc.exact_hz(0.5, 0.5, 0.5),
               Catch::Matchers::WithinAbs(std::sin(0.25 * std::numbers::pi), 1e-14));
  REQUIRE(sc.region_of(0.3, -0.7) == 0);
  REQUIRE(sc.name == "manufactured");
}

TEST_CASE("exact fields meet the absorbing relation pointwise on the boundary",
          "[scenarios][oracle]") {
  const Scenario sc = manufactured_scenario();
  const MaterialFunctions& mat = sc.regions.at(0);
  std::mt19937 rng(99u);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_real_distribution<double> ut(0.1, 0.9);

  struct Side {
    double nx, ny;
  };
  const Side sides[4] = {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
  for (const Side& side : sides) {
    for (int i = 0; i < 25; ++i) {
      const double s = uni(rng), t = ut(rng);
      const double x = (side.ny == 0.0) ? side.nx : s;
      const double y = (side.ny == 0.0) ? s : side.ny;
      const double eff = effective_permittivity(mat.eps_xx(x, y), mat.eps_xy(x, y), mat.eps_yy(x, y),
                                                side.nx, side.ny);
      const double z = mat.mu(x, y) / std::sqrt(mat.mu(x, y) * eff);
      const double tangential =
          side.nx * sc.exact_ey(x, y, t) - side.ny * sc.exact_ex(x, y, t);
      REQUIRE_THAT(z * sc.exact_hz(x, y, t), Catch::Matchers::WithinAbs(tangential, 1e-12));
    }
  }
}

TEST_CASE("scattering geometries classify points correctly", "[scenarios]") {
  const Scenario one = scattering_scenario(one_circle_geometry());
  REQUIRE(one.name == "one_circle");
  REQUIRE(one.region_of(0.0, 0.0) == 1);
  REQUIRE(one.region_of(0.3, 0.3) == 1);   // r^2 = 0.18 <= 0.25
  REQUIRE(one.region_of(0.4, 0.4) == 0);   // r^2 = 0.32
  REQUIRE(one.region_of(0.5, 0.0) == 1);   // rim counts as inside
  REQUIRE(one.region_of(-0.9, 0.9) == 0);

  const Scenario three = scattering_scenario(three_circles_geometry());
  REQUIRE(three.name == "three_circles");
  REQUIRE(three.region_of(0.0, 0.5) == 1);
  REQUIRE(three.region_of(0.0, 0.0) == 1);
  REQUIRE(three.region_of(0.0, -0.5) == 1);
  REQUIRE(three.region_of(0.0, 0.25) == 0);
  REQUIRE(three.region_of(0.05, -0.42) == 1);

  REQUIRE(one.regions.at(0).eps_yy(0.1, 0.2) == 1.0);
  REQUIRE(one.regions.at(1).eps_yy(0.1, 0.2) == 1.2);
  REQUIRE_FALSE(one.has_exact);
  REQUIRE(one.initial_ey(0.3, -0.4) == 0.0);
}

TEST_CASE("contrast sources reduce to their closed form inside the inclusions",
          "[scenarios][oracle]") {
  ScatteringGeometry g = one_circle_geometry();
  const double w = g.wave_number;
  REQUIRE(w == 10.0);
  const Scenario sc = scattering_scenario(g);

  std::mt19937 rng(31u);
  std::uniform_real_distribution<double> uni(-0.3, 0.3);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double x = uni(rng), y = uni(rng), t = ut(rng);
    if (sc.region_of(x, y) != 1) continue;
    const double expected = (1.0 - g.eps_inside) * w * std::sin(w * (x - t));
    REQUIRE_THAT(source_value_y(sc, x, y, t), Catch::Matchers::WithinAbs(expected, 1e-12));
    REQUIRE(std::abs(source_value_x(sc, x, y, t)) < 1e-15);
    REQUIRE(std::abs(source_value_h(sc, x, y, t)) < 1e-15);
  }

  // outside the inclusion every source vanishes identically
  for (int i = 0; i < 20; ++i) {
    const double x = 0.6 + 0.3 * ut(rng), y = uni(rng), t = ut(rng);
    REQUIRE(source_value_x(sc, x, y, t) == 0.0);
    REQUIRE(source_value_y(sc, x, y, t) == 0.0);
    REQUIRE(source_value_h(sc, x, y, t) == 0.0);
  }
}

TEST_CASE("zero contrast silences every source", "[scenarios]") {
  ScatteringGeometry g = one_circle_geometry();
  g.eps_inside = 1.0;
  const Scenario sc = scattering_scenario(g);
  std::mt19937 rng(13u);
  std::uniform_real_distribution<double> uni(-0.95, 0.95);
  for (int i = 0; i < 40; ++i) {
    const double x = uni(rng), y = uni(rng), t = uni(rng) + 1.0;
    REQUIRE(source_value_x(sc, x, y, t) == 0.0);
    REQUIRE(source_value_y(sc, x, y, t) == 0.0);
    REQUIRE(source_value_h(sc, x, y, t) == 0.0);
  }
}

TEST_CASE("incident plane wave completes the background system", "[scenarios][oracle]") {
  const Scenario sc = scattering_scenario(one_circle_geometry());
  REQUIRE(sc.has_incident);

  std::mt19937 rng(81u);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double x = uni(rng), y = uni(rng), t = 0.5 * (uni(rng) + 1.0);
    REQUIRE(sc.incident_ex(x, y, t) == 0.0);
    REQUIRE(sc.incident_ey(x, y, t) == sc.incident_hz(x, y, t));
    // background material is the unit one, so the residuals are
    //   dEx/dt - dHz/dy, dEy/dt + dHz/dx, dHz/dt - dEx/dy + dEy/dx
    const double r1 = d_dt(sc.incident_ex, x, y, t) - d_dy(sc.incident_hz, x, y, t);
    const double r2 = d_dt(sc.incident_ey, x, y, t) + d_dx(sc.incident_hz, x, y, t);
    const double r3 = d_dt(sc.incident_hz, x, y, t) - d_dy(sc.incident_ex, x, y, t) +
                      d_dx(sc.incident_ey, x, y, t);
    worst = std::max({worst, std::abs(r1), std::abs(r2), std::abs(r3)});
  }
  REQUIRE(worst < 1e-7);

  // the wave really is cos(w(x - t))
  REQUIRE_THAT(sc.incident_hz(0.3, -0.8, 0.1),
               Catch::Matchers::WithinAbs(std::cos(10.0 * 0.2), 1e-14));
}

TEST_CASE("nonpositive wave numbers are rejected", "[scenarios]") {
  ScatteringGeometry g = one_circle_geometry();
  g.wave_number = 0.0;
  REQUIRE_THROWS_AS(scattering_scenario(g), ConfigError);
  g.wave_number = -3.0;
  REQUIRE_THROWS_AS(scattering_scenario(g), ConfigError);
}
