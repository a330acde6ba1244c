#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "tedg/materials.hpp"
#include "tedg/types.hpp"

namespace tedg {

// Volume source with separated time and space dependence. The spatial factors
// receive the material functions of the region that owns the evaluation
// point, so sources built from material contrasts stay consistent with the
// discrete material field.
struct SourceTerm {
  std::function<Real(Real)> time;
  std::function<Real(Real, Real, const MaterialFunctions&)> sx, sy, sh;
};

// A complete problem setup: materials by region, initial data, optional exact
// solution, and volume sources.
struct Scenario {
  std::string name;
  std::map<int, MaterialFunctions> regions;
  std::function<int(Real, Real)> region_of; // point classifier for generated meshes

  bool has_exact = false;
  std::function<Real(Real, Real, Real)> exact_ex, exact_ey, exact_hz; // (x, y, t)

  std::function<Real(Real, Real)> initial_ex, initial_ey, initial_hz;

  std::vector<SourceTerm> sources;

  // Incident field of a scattered-field formulation, for reconstructing the
  // total field in post-processing.
  bool has_incident = false;
  std::function<Real(Real, Real, Real)> incident_ex, incident_ey, incident_hz;
};

// Pointwise source evaluation through the region classifier.
inline Real source_value_x(const Scenario& sc, Real x, Real y, Real t) {
  const MaterialFunctions& mat = sc.regions.at(sc.region_of(x, y));
  Real v = 0.0;
  for (const auto& term : sc.sources) v += term.time(t) * term.sx(x, y, mat);
  return v;
}

inline Real source_value_y(const Scenario& sc, Real x, Real y, Real t) {
  const MaterialFunctions& mat = sc.regions.at(sc.region_of(x, y));
  Real v = 0.0;
  for (const auto& term : sc.sources) v += term.time(t) * term.sy(x, y, mat);
  return v;
}

inline Real source_value_h(const Scenario& sc, Real x, Real y, Real t) {
  const MaterialFunctions& mat = sc.regions.at(sc.region_of(x, y));
  Real v = 0.0;
  for (const auto& term : sc.sources) v += term.time(t) * term.sh(x, y, mat);
  return v;
}

// Smooth anisotropic benchmark with a known solution. The permittivity tensor
// is eps_xx = 4x^2+y^2+1, eps_yy = x^2+1, eps_xy = sqrt(x^2+y^2), mu = 1, and
// the fields are
//   Ex = -sqrt(eps_yy/det) sin(pi t) sin(pi x)
//   Ey =  sqrt(eps_xx/det) sin(pi t) sin(pi y)
//   Hz =  sin(pi t) sin(pi x y)
// with volume sources chosen so these satisfy the Maxwell system exactly.
inline Scenario manufactured_scenario() {
  constexpr Real pi = std::numbers::pi_v<Real>;

  auto exx = [](Real x, Real y) { return 4.0 * x * x + y * y + 1.0; };
  auto exy = [](Real x, Real y) { return std::sqrt(x * x + y * y); };
  auto eyy = [](Real x, Real) { return x * x + 1.0; };
  // det(eps) = exx*eyy - exy^2, which simplifies to a smooth polynomial.
  auto det = [](Real x, Real y) {
    return 4.0 * x * x * x * x + 4.0 * x * x + x * x * y * y + 1.0;
  };
  auto det_x = [](Real x, Real y) { return 16.0 * x * x * x + 8.0 * x + 2.0 * x * y * y; };
  auto det_y = [](Real x, Real y) { return 2.0 * x * x * y; };

  // Spatial amplitude of Ey and its x-derivative.
  auto coef_a = [=](Real x, Real y) { return std::sqrt(exx(x, y) / det(x, y)); };
  auto coef_a_x = [=](Real x, Real y) {
    return 0.5 * coef_a(x, y) * (8.0 * x / exx(x, y) - det_x(x, y) / det(x, y));
  };
  // Spatial amplitude of -Ex and its y-derivative.
  auto coef_b = [=](Real x, Real y) { return std::sqrt(eyy(x, y) / det(x, y)); };
  auto coef_b_y = [=](Real x, Real y) {
    return -0.5 * coef_b(x, y) * det_y(x, y) / det(x, y);
  };

  Scenario sc;
  sc.name = "manufactured";
  sc.regions[0] = MaterialFunctions{exx, exy, eyy, [](Real, Real) { return 1.0; }};
  sc.region_of = [](Real, Real) { return 0; };

  sc.has_exact = true;
  sc.exact_ex = [=](Real x, Real y, Real t) {
    return -coef_b(x, y) * std::sin(pi * t) * std::sin(pi * x);
  };
  sc.exact_ey = [=](Real x, Real y, Real t) {
    return coef_a(x, y) * std::sin(pi * t) * std::sin(pi * y);
  };
  sc.exact_hz = [=](Real x, Real y, Real t) {
    return std::sin(pi * t) * std::sin(pi * x * y);
  };
  sc.initial_ex = [=](Real x, Real y) { return sc.exact_ex(x, y, 0.0); };
  sc.initial_ey = [=](Real x, Real y) { return sc.exact_ey(x, y, 0.0); };
  sc.initial_hz = [=](Real x, Real y) { return sc.exact_hz(x, y, 0.0); };

  // Source residuals split by time factor. With E = sin(pi t) E_s(x,y) and
  // Hz = sin(pi t) Hz_s(x,y):
  //   S_x = eps_xx dEx/dt + eps_xy dEy/dt - dHz/dy
  //   S_y = eps_xy dEx/dt + eps_yy dEy/dt + dHz/dx
  //   S_h = mu dHz/dt + dEy/dx - dEx/dy
  SourceTerm amplitude; // multiplies pi cos(pi t)
  amplitude.time = [pi](Real t) { return pi * std::cos(pi * t); };
  amplitude.sx = [=](Real x, Real y, const MaterialFunctions&) {
    return exx(x, y) * (-coef_b(x, y) * std::sin(pi * x)) +
           exy(x, y) * (coef_a(x, y) * std::sin(pi * y));
  };
  amplitude.sy = [=](Real x, Real y, const MaterialFunctions&) {
    return exy(x, y) * (-coef_b(x, y) * std::sin(pi * x)) +
           eyy(x, y) * (coef_a(x, y) * std::sin(pi * y));
  };
  amplitude.sh = [=](Real x, Real y, const MaterialFunctions&) {
    return std::sin(pi * x * y);
  };

  SourceTerm curl; // multiplies sin(pi t)
  curl.time = [pi](Real t) { return std::sin(pi * t); };
  curl.sx = [=](Real x, Real y, const MaterialFunctions&) {
    return -pi * x * std::cos(pi * x * y);
  };
  curl.sy = [=](Real x, Real y, const MaterialFunctions&) {
    return pi * y * std::cos(pi * x * y);
  };
  curl.sh = [=](Real x, Real y, const MaterialFunctions&) {
    return coef_a_x(x, y) * std::sin(pi * y) + coef_b_y(x, y) * std::sin(pi * x);
  };

  sc.sources = {amplitude, curl};
  return sc;
}

struct Circle {
  Real cx = 0.0, cy = 0.0, radius = 1.0;
};

struct ScatteringGeometry {
  std::vector<Circle> circles;
  Real eps_inside = 1.2;
  Real wave_number = 10.0;
};

inline ScatteringGeometry one_circle_geometry() {
  ScatteringGeometry g;
  g.circles = {{0.0, 0.0, 0.5}};
  return g;
}

inline ScatteringGeometry three_circles_geometry() {
  ScatteringGeometry g;
  g.circles = {{0.0, 0.5, 0.1}, {0.0, 0.0, 0.1}, {0.0, -0.5, 0.1}};
  return g;
}

// Scattered-field formulation: circular inclusions with isotropic contrast in
// a unit background, driven by the plane wave
//   E^i = (0, cos(w(x - t))),  Hz^i = cos(w(x - t)).
// The solver evolves the scattered field with zero initial data; the volume
// sources carry the material contrast times the incident time derivative:
//   S_x = -eps_xy dEy^i/dt
//   S_y = (1 - eps_yy) dEy^i/dt
//   S_h = (1 - mu) dHz^i/dt
// and dEy^i/dt = dHz^i/dt = w sin(w(x-t)) splits into cos(wt), sin(wt) parts.
inline Scenario scattering_scenario(const ScatteringGeometry& geometry) {
  const Real w = geometry.wave_number;
  if (!(w > 0.0)) throw ConfigError("wave number must be positive");

  Scenario sc;
  sc.name = geometry.circles.size() == 1 ? "one_circle" : "three_circles";
  sc.regions[0] = isotropic_material(1.0);
  sc.regions[1] = isotropic_material(geometry.eps_inside);
  const auto circles = geometry.circles;
  sc.region_of = [circles](Real x, Real y) {
    for (const Circle& c : circles) {
      const Real dx = x - c.cx;
      const Real dy = y - c.cy;
      if (dx * dx + dy * dy <= c.radius * c.radius) return 1;
    }
    return 0;
  };

  sc.initial_ex = [](Real, Real) { return 0.0; };
  sc.initial_ey = [](Real, Real) { return 0.0; };
  sc.initial_hz = [](Real, Real) { return 0.0; };

  sc.has_incident = true;
  sc.incident_ex = [](Real, Real, Real) { return 0.0; };
  sc.incident_ey = [w](Real x, Real, Real t) { return std::cos(w * (x - t)); };
  sc.incident_hz = [w](Real x, Real, Real t) { return std::cos(w * (x - t)); };

  SourceTerm cos_part; // multiplies cos(w t); spatial factor w sin(w x)
  cos_part.time = [w](Real t) { return std::cos(w * t); };
  cos_part.sx = [w](Real x, Real y, const MaterialFunctions& mat) {
    return -mat.eps_xy(x, y) * w * std::sin(w * x);
  };
  cos_part.sy = [w](Real x, Real y, const MaterialFunctions& mat) {
    return (1.0 - mat.eps_yy(x, y)) * w * std::sin(w * x);
  };
  cos_part.sh = [w](Real x, Real y, const MaterialFunctions& mat) {
    return (1.0 - mat.mu(x, y)) * w * std::sin(w * x);
  };

  SourceTerm sin_part; // multiplies sin(w t); spatial factor -w cos(w x)
  sin_part.time = [w](Real t) { return std::sin(w * t); };
  sin_part.sx = [w](Real x, Real y, const MaterialFunctions& mat) {
    return mat.eps_xy(x, y) * w * std::cos(w * x);
  };
  sin_part.sy = [w](Real x, Real y, const MaterialFunctions& mat) {
    return -(1.0 - mat.eps_yy(x, y)) * w * std::cos(w * x);
  };
  sin_part.sh = [w](Real x, Real y, const MaterialFunctions& mat) {
    return -(1.0 - mat.mu(x, y)) * w * std::cos(w * x);
  };

  sc.sources = {cos_part, sin_part};
  return sc;
}

}  // namespace tedg
