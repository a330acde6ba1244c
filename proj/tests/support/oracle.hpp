#pragma once

// Reference computations for the verification suite. Everything here is built
// from first principles: direct modal basis evaluation, explicit barycentric
// Lagrange interpolation along faces, and dense quadrature. It deliberately
// shares no differentiation matrices, lift matrices, or trace index tables
// with the assembly path it is used to check.

#include <array>
#include <cmath>
#include <map>

#include <tedg/materials.hpp>
#include <tedg/mesh.hpp>
#include <tedg/quadrature.hpp>
#include <tedg/reference_element.hpp>

namespace oracle {

using tedg::Matrix;
using tedg::Mesh;
using tedg::Real;
using tedg::Vector;

// Modal expansion with coefficient column k of c (modes ordered i-major as in
// vandermonde_2d) evaluated at reference point (r,s).
inline Real eval_modal(const Matrix& c, int k, int N, Real r, Real s) {
  Real acc = 0.0;
  int m = 0;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N - i; ++j, ++m) acc += c(m, k) * tedg::simplex_2d(r, s, i, j);
  return acc;
}

inline void eval_modal_gradient(const Matrix& c, int k, int N, Real r, Real s, Real& dr,
                                Real& ds) {
  dr = 0.0;
  ds = 0.0;
  int m = 0;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N - i; ++j, ++m) {
      Real gr, gs;
      tedg::grad_simplex_2d(r, s, i, j, gr, gs);
      dr += c(m, k) * gr;
      ds += c(m, k) * gs;
    }
}

// Barycentric Lagrange interpolation through (nodes, values), evaluated at x.
inline Real lagrange_interpolate(const Vector& nodes, const Vector& values, Real x) {
  const int n = static_cast<int>(nodes.size());
  for (int i = 0; i < n; ++i)
    if (x == nodes[i]) return values[i];
  Real num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    Real w = 1.0;
    for (int j = 0; j < n; ++j)
      if (j != i) w /= nodes[i] - nodes[j];
    const Real t = w / (x - nodes[i]);
    num += t * values[i];
    den += t;
  }
  return num / den;
}

inline Real impedance_at(const tedg::MaterialFunctions& mat, Real x, Real y, Real nx, Real ny) {
  const Real mu = mat.mu(x, y);
  const Real eff = tedg::effective_permittivity(mat.eps_xx(x, y), mat.eps_xy(x, y),
                                                mat.eps_yy(x, y), nx, ny);
  return mu / std::sqrt(mu * eff);
}

struct WeakRhs {
  Matrix volume_x, volume_y, volume_z;                   // modal projections, Np x K
  std::array<Matrix, 3> surface_x, surface_y, surface_z; // split by local face
  Matrix total_x, total_y, total_z;
};

// Dense-quadrature weak right-hand side of the curl system for modal states
// (cex, cey, chz), projected onto the modal basis. `face_nodes` holds the 1D
// parameters of the trace nodes that define the flux interpolant along each
// face; `alpha` is the interior flux penalty. Boundary faces drop the exterior
// trace, force the penalty to one, and mirror the interior impedance.
inline WeakRhs weak_rhs(const Mesh& mesh, int N, const Matrix& cex, const Matrix& cey,
                        const Matrix& chz,
                        const std::map<int, tedg::MaterialFunctions>& regions, Real alpha,
                        const Vector& face_nodes) {
  const int K = mesh.num_elements();
  const int Np = (N + 1) * (N + 2) / 2;
  const int Nfp = static_cast<int>(face_nodes.size());

  WeakRhs out;
  out.volume_x = Matrix::Zero(Np, K);
  out.volume_y = Matrix::Zero(Np, K);
  out.volume_z = Matrix::Zero(Np, K);
  for (int f = 0; f < 3; ++f) {
    out.surface_x[f] = Matrix::Zero(Np, K);
    out.surface_y[f] = Matrix::Zero(Np, K);
    out.surface_z[f] = Matrix::Zero(Np, K);
  }

  const tedg::TriangleRule vol = tedg::triangle_rule(2 * N + 2);
  for (int k = 0; k < K; ++k) {
    for (int q = 0; q < vol.w.size(); ++q) {
      const Real r = vol.r[q], s = vol.s[q];
      Real hzr, hzs, exr, exs, eyr, eys;
      eval_modal_gradient(chz, k, N, r, s, hzr, hzs);
      eval_modal_gradient(cex, k, N, r, s, exr, exs);
      eval_modal_gradient(cey, k, N, r, s, eyr, eys);
      const Real hz_x = mesh.rx[k] * hzr + mesh.sx[k] * hzs;
      const Real hz_y = mesh.ry[k] * hzr + mesh.sy[k] * hzs;
      const Real ex_y = mesh.ry[k] * exr + mesh.sy[k] * exs;
      const Real ey_x = mesh.rx[k] * eyr + mesh.sx[k] * eys;
      const Real wj = vol.w[q] * mesh.jac[k];
      int m = 0;
      for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N - i; ++j, ++m) {
          const Real phi = tedg::simplex_2d(r, s, i, j);
          out.volume_x(m, k) += wj * hz_y * phi;
          out.volume_y(m, k) -= wj * hz_x * phi;
          out.volume_z(m, k) += wj * (ex_y - ey_x) * phi;
        }
    }
  }

  const Real ref_r[3] = {-1.0, 1.0, -1.0};
  const Real ref_s[3] = {-1.0, -1.0, 1.0};
  const tedg::Rule1D line = tedg::gauss_legendre(2 * N + 4);

  for (int k = 0; k < K; ++k) {
    for (int f = 0; f < 3; ++f) {
      const Real ar = ref_r[f], as = ref_s[f];
      const Real br = ref_r[(f + 1) % 3], bs = ref_s[(f + 1) % 3];
      const Real nx = mesh.normal_x(k, f);
      const Real ny = mesh.normal_y(k, f);
      const bool boundary = mesh.is_boundary(k, f);
      const int k2 = boundary ? k : mesh.neighbor(k, f);
      const Real pen = boundary ? 1.0 : alpha;
      const tedg::MaterialFunctions& mat_m = regions.at(mesh.region_tags[k]);
      const tedg::MaterialFunctions& mat_p = regions.at(mesh.region_tags[k2]);

      Vector ge(Nfp), gh(Nfp);
      for (int p = 0; p < Nfp; ++p) {
        const Real xi = face_nodes[p];
        const Real r = ar + 0.5 * (xi + 1.0) * (br - ar);
        const Real s = as + 0.5 * (xi + 1.0) * (bs - as);
        const tedg::Vec2 pt = mesh.map_to_physical(k, r, s);

        Real jex = eval_modal(cex, k, N, r, s);
        Real jey = eval_modal(cey, k, N, r, s);
        Real jhz = eval_modal(chz, k, N, r, s);
        if (!boundary) {
          const tedg::Vec2 rs2 = mesh.map_to_reference(k2, pt.x, pt.y);
          jex -= eval_modal(cex, k2, N, rs2.x, rs2.y);
          jey -= eval_modal(cey, k2, N, rs2.x, rs2.y);
          jhz -= eval_modal(chz, k2, N, rs2.x, rs2.y);
        }

        const Real zm = impedance_at(mat_m, pt.x, pt.y, nx, ny);
        const Real zp = boundary ? zm : impedance_at(mat_p, pt.x, pt.y, nx, ny);
        const Real tangential = nx * jey - ny * jex;
        ge[p] = (zp * jhz - pen * tangential) / (zm + zp);
        gh[p] = ((1.0 / zp) * tangential - pen * jhz) / (1.0 / zm + 1.0 / zp);
      }

      const Real half_len = 0.5 * mesh.face_length(k, f);
      for (int q = 0; q < line.points.size(); ++q) {
        const Real xi = line.points[q];
        const Real r = ar + 0.5 * (xi + 1.0) * (br - ar);
        const Real s = as + 0.5 * (xi + 1.0) * (bs - as);
        const Real ge_q = lagrange_interpolate(face_nodes, ge, xi);
        const Real gh_q = lagrange_interpolate(face_nodes, gh, xi);
        const Real w = line.weights[q] * half_len;
        int m = 0;
        for (int i = 0; i <= N; ++i)
          for (int j = 0; j <= N - i; ++j, ++m) {
            const Real phi = tedg::simplex_2d(r, s, i, j);
            out.surface_x[f](m, k) += w * (-ny) * ge_q * phi;
            out.surface_y[f](m, k) += w * nx * ge_q * phi;
            out.surface_z[f](m, k) += w * gh_q * phi;
          }
      }
    }
  }

  out.total_x = out.volume_x + out.surface_x[0] + out.surface_x[1] + out.surface_x[2];
  out.total_y = out.volume_y + out.surface_y[0] + out.surface_y[1] + out.surface_y[2];
  out.total_z = out.volume_z + out.surface_z[0] + out.surface_z[1] + out.surface_z[2];
  return out;
}

} // namespace oracle
