#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "tedg/scenarios.hpp"
#include "tedg/semidiscrete.hpp"
#include "tedg/types.hpp"

namespace tedg {

// L2 distance between a DG field and a pointwise reference, integrated with a
// quadrature of degree 2N+2 so the measurement does not alias the
// interpolation error of the field itself.
inline Real l2_error_field(const Matrix& u, const std::function<Real(Real, Real)>& exact,
                           const Mesh& mesh, const ReferenceOperators& ops) {
  const TriangleRule rule = triangle_rule(2 * ops.N + 2);
  const Matrix interp = ops.interpolation_to(rule.r, rule.s);
  const Matrix uq = interp * u;
  Real total = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    Real acc = 0.0;
    for (int q = 0; q < rule.w.size(); ++q) {
      const Vec2 p = mesh.map_to_physical(k, rule.r[q], rule.s[q]);
      const Real diff = uq(q, k) - exact(p.x, p.y);
      acc += rule.w[q] * diff * diff;
    }
    total += mesh.jac[k] * acc;
  }
  return std::sqrt(total);
}

struct ErrorTriple {
  Real ex = 0.0, ey = 0.0, hz = 0.0;
};

// Field errors of a leap-frog state against the scenario's exact solution.
// The electric fields are compared at their time station t_e and the magnetic
// field at its own staggered station t_h = t_e + dt/2.
inline ErrorTriple l2_errors(const DGOperator& op, const FieldState& state,
                             const Scenario& scenario, Real t_e, Real t_h) {
  if (!scenario.has_exact)
    throw ConfigError("scenario '" + scenario.name + "' has no exact solution");
  ErrorTriple err;
  err.ex = l2_error_field(
      state.ex, [&](Real x, Real y) { return scenario.exact_ex(x, y, t_e); }, op.mesh, op.ops);
  err.ey = l2_error_field(
      state.ey, [&](Real x, Real y) { return scenario.exact_ey(x, y, t_e); }, op.mesh, op.ops);
  err.hz = l2_error_field(
      state.hz, [&](Real x, Real y) { return scenario.exact_hz(x, y, t_h); }, op.mesh, op.ops);
  return err;
}

struct RateFit {
  Real slope = 0.0;
  Real intercept = 0.0;
  Real residual = 0.0; // root mean square residual of the log-log fit
  int samples = 0;
};

// Least-squares slope of log(error) against log(scale).
inline RateFit fit_rate(const std::vector<Real>& scale, const std::vector<Real>& error) {
  if (scale.size() != error.size())
    throw ConfigError("rate fit needs matching scale and error lists");
  if (scale.size() < 2) throw ConfigError("rate fit needs at least two samples");
  const int n = static_cast<int>(scale.size());
  std::vector<Real> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    if (!(scale[i] > 0.0) || !std::isfinite(scale[i]))
      throw Error("rate fit: non-positive scale value");
    if (!(error[i] > 0.0) || !std::isfinite(error[i]))
      throw Error("rate fit: errors must be positive and finite");
    lx[i] = std::log(scale[i]);
    ly[i] = std::log(error[i]);
  }
  Real mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  Real sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw Error("rate fit: degenerate scale values");

  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.samples = n;
  Real ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const Real r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

// Scattered-field intensity sqrt(Ex^2 + Ey^2) at the nodes.
inline Matrix intensity(const FieldState& state) {
  return (state.ex.array().square() + state.ey.array().square()).sqrt().matrix();
}

inline Real discrete_energy(const DGOperator& op, const FieldState& state) {
  return op.discrete_energy(state);
}

// Point probes: each point is located in its containing element once and
// sampled by an interpolation row thereafter.
struct ProbeSet {
  std::vector<int> element;
  Matrix rows; // one interpolation row per probe

  static ProbeSet build(const DGOperator& op, const std::vector<Vec2>& points) {
    ProbeSet probes;
    probes.element.resize(points.size());
    probes.rows.resize(points.size(), op.ops.Np);
    for (size_t i = 0; i < points.size(); ++i) {
      int found = -1;
      Vec2 ref{0.0, 0.0};
      for (int k = 0; k < op.mesh.num_elements(); ++k) {
        const Vec2 rs = op.mesh.map_to_reference(k, points[i].x, points[i].y);
        if (rs.x >= -1.0 - 1e-10 && rs.y >= -1.0 - 1e-10 && rs.x + rs.y <= 1e-10) {
          found = k;
          ref = rs;
          break;
        }
      }
      if (found < 0)
        throw ConfigError("probe point (" + std::to_string(points[i].x) + ", " +
                          std::to_string(points[i].y) + ") lies outside the mesh");
      probes.element[i] = found;
      Vector r(1), s(1);
      r[0] = ref.x;
      s[0] = ref.y;
      probes.rows.row(i) = op.ops.interpolation_to(r, s).row(0);
    }
    return probes;
  }

  Vector sample(const Matrix& field) const {
    Vector out(element.size());
    for (size_t i = 0; i < element.size(); ++i)
      out[i] = rows.row(i).dot(field.col(element[i]));
    return out;
  }
};

}  // namespace tedg
