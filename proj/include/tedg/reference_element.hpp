#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <vector>

#include "tedg/mesh.hpp"
#include "tedg/quadrature.hpp"
#include "tedg/types.hpp"

namespace tedg {

// Collapsed coordinates (a,b) of a reference-triangle point (r,s).
inline void rs_to_ab(Real r, Real s, Real& a, Real& b) {
  a = (std::abs(s - 1.0) > 1e-12) ? 2.0 * (1.0 + r) / (1.0 - s) - 1.0 : -1.0;
  b = s;
}

// Orthonormal basis on the reference triangle, mode (i,j) with i+j <= N.
inline Real simplex_2d(Real r, Real s, int i, int j) {
  Real a, b;
  rs_to_ab(r, s, a, b);
  const Real h1 = jacobi_p(a, 0.0, 0.0, i);
  const Real h2 = jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
  return std::sqrt(2.0) * h1 * h2 * std::pow(1.0 - b, i);
}

inline void grad_simplex_2d(Real r, Real s, int i, int j, Real& dr, Real& ds) {
  Real a, b;
  rs_to_ab(r, s, a, b);
  const Real fa = jacobi_p(a, 0.0, 0.0, i);
  const Real dfa = grad_jacobi_p(a, 0.0, 0.0, i);
  const Real gb = jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
  const Real dgb = grad_jacobi_p(b, 2.0 * i + 1.0, 0.0, j);

  dr = dfa * gb;
  if (i > 0) dr *= std::pow(0.5 * (1.0 - b), i - 1);

  ds = dfa * (0.5 * (1.0 + a)) * gb;
  if (i > 0) ds *= std::pow(0.5 * (1.0 - b), i - 1);
  Real tmp = dgb * std::pow(0.5 * (1.0 - b), i);
  if (i > 0) tmp -= 0.5 * i * gb * std::pow(0.5 * (1.0 - b), i - 1);
  ds += fa * tmp;

  const Real scale = std::pow(2.0, i + 0.5);
  dr *= scale;
  ds *= scale;
}

// Modal Vandermonde matrix: column m holds basis mode m at the given points.
inline Matrix vandermonde_2d(int N, const Vector& r, const Vector& s) {
  const int Np = (N + 1) * (N + 2) / 2;
  Matrix V(r.size(), Np);
  int m = 0;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N - i; ++j, ++m)
      for (int p = 0; p < r.size(); ++p) V(p, m) = simplex_2d(r[p], s[p], i, j);
  return V;
}

inline void grad_vandermonde_2d(int N, const Vector& r, const Vector& s, Matrix& Vr, Matrix& Vs) {
  const int Np = (N + 1) * (N + 2) / 2;
  Vr.resize(r.size(), Np);
  Vs.resize(r.size(), Np);
  int m = 0;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N - i; ++j, ++m)
      for (int p = 0; p < r.size(); ++p) {
        Real dr, ds;
        grad_simplex_2d(r[p], s[p], i, j, dr, ds);
        Vr(p, m) = dr;
        Vs(p, m) = ds;
      }
}

inline Matrix vandermonde_1d(int N, const Vector& x) {
  Matrix V(x.size(), N + 1);
  for (int j = 0; j <= N; ++j)
    for (int p = 0; p < x.size(); ++p) V(p, j) = jacobi_p(x[p], 0.0, 0.0, j);
  return V;
}

namespace detail {

// Edge warp that pulls equispaced points toward the Gauss-Lobatto layout.
inline Vector warp_factor(int N, const Vector& rout) {
  const Vector lgl = gauss_lobatto_points(N);
  Vector req(N + 1);
  for (int i = 0; i <= N; ++i) req[i] = -1.0 + 2.0 * static_cast<Real>(i) / N;

  const Matrix Veq = vandermonde_1d(N, req);
  Matrix Pmat(N + 1, rout.size());
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j < rout.size(); ++j) Pmat(i, j) = jacobi_p(rout[j], 0.0, 0.0, i);
  const Matrix Lmat = Veq.transpose().partialPivLu().solve(Pmat);

  Vector warp = Lmat.transpose() * (lgl - req);
  for (int j = 0; j < rout.size(); ++j) {
    if (std::abs(rout[j]) < 1.0 - 1e-10)
      warp[j] /= 1.0 - rout[j] * rout[j];
    else
      warp[j] = 0.0;
  }
  return warp;
}

inline void warp_blend_nodes(int N, Vector& r, Vector& s) {
  static constexpr Real alpha_opt[] = {0.0000, 0.0000, 1.4152, 0.1001, 0.2751,
                                       0.9800, 1.0999, 1.2832, 1.3648, 1.4773,
                                       1.4959, 1.5743, 1.5770, 1.6223, 1.6258};
  const Real alpha = (N < 16) ? alpha_opt[N - 1] : 5.0 / 3.0;
  const int Np = (N + 1) * (N + 2) / 2;

  Vector L1(Np), L2(Np), L3(Np);
  int sk = 0;
  for (int n = 0; n <= N; ++n)
    for (int m = 0; m <= N - n; ++m, ++sk) {
      L1[sk] = static_cast<Real>(n) / N;
      L3[sk] = static_cast<Real>(m) / N;
      L2[sk] = 1.0 - L1[sk] - L3[sk];
    }

  Vector x = -L2 + L3;
  Vector y = (-L2.array() - L3.array() + 2.0 * L1.array()).matrix() / std::sqrt(3.0);

  const Vector blend1 = (4.0 * L2.array() * L3.array()).matrix();
  const Vector blend2 = (4.0 * L1.array() * L3.array()).matrix();
  const Vector blend3 = (4.0 * L1.array() * L2.array()).matrix();
  const Vector warpf1 = warp_factor(N, L3 - L2);
  const Vector warpf2 = warp_factor(N, L1 - L3);
  const Vector warpf3 = warp_factor(N, L2 - L1);

  for (int p = 0; p < Np; ++p) {
    const Real w1 = blend1[p] * warpf1[p] * (1.0 + std::pow(alpha * L1[p], 2));
    const Real w2 = blend2[p] * warpf2[p] * (1.0 + std::pow(alpha * L2[p], 2));
    const Real w3 = blend3[p] * warpf3[p] * (1.0 + std::pow(alpha * L3[p], 2));
    constexpr Real pi = std::numbers::pi_v<Real>;
    x[p] += w1 + std::cos(2.0 * pi / 3.0) * w2 + std::cos(4.0 * pi / 3.0) * w3;
    y[p] += std::sin(2.0 * pi / 3.0) * w2 + std::sin(4.0 * pi / 3.0) * w3;
  }

  // Equilateral coordinates back to the reference triangle.
  r.resize(Np);
  s.resize(Np);
  for (int p = 0; p < Np; ++p) {
    const Real l1 = (std::sqrt(3.0) * y[p] + 1.0) / 3.0;
    const Real l2 = (-3.0 * x[p] - std::sqrt(3.0) * y[p] + 2.0) / 6.0;
    const Real l3 = (3.0 * x[p] - std::sqrt(3.0) * y[p] + 2.0) / 6.0;
    r[p] = -l2 + l3 - l1;
    s[p] = -l2 - l3 + l1;
  }

  // Snap edge nodes exactly onto the reference edges; the warp construction
  // leaves them within round-off but face extraction wants them exact.
  for (int p = 0; p < Np; ++p) {
    if (std::abs(s[p] + 1.0) < 1e-8) s[p] = -1.0;
    if (std::abs(r[p] + 1.0) < 1e-8) r[p] = -1.0;
    if (std::abs(r[p] + s[p]) < 1e-8) {
      const Real shift = 0.5 * (r[p] + s[p]);
      r[p] -= shift;
      s[p] -= shift;
    }
    if (std::abs(r[p] - 1.0) < 1e-8) r[p] = 1.0;
    if (std::abs(s[p] - 1.0) < 1e-8) s[p] = 1.0;
  }
}

}  // namespace detail

// Nodal operators on the reference triangle for polynomial order N.
struct ReferenceOperators {
  int N = 0;
  int Np = 0;  // nodes per element
  int Nfp = 0; // nodes per face

  Vector r, s;    // node coordinates
  Matrix V, Vinv; // modal Vandermonde and its inverse
  Matrix Dr, Ds;  // nodal differentiation
  Matrix M;       // reference mass matrix (V V^T)^{-1}
  Matrix Sr, Ss;  // M*Dr, M*Ds (weak-form stiffness)

  // fmask(p,f): node id of the p-th node on face f, ordered from local vertex
  // f to vertex f+1; face_param(p,f) is its 1D coordinate in [-1,1].
  IntMatrix fmask;
  Matrix face_param;
  Matrix M1D;  // face mass matrix in the 1D coordinate
  Matrix Emat; // Np x 3*Nfp: scatters face-node integrals to element dofs

  IntMatrix plot_triangles; // sub-triangulation of the node lattice

  // Interpolation from the element nodes to arbitrary reference points.
  Matrix interpolation_to(const Vector& rq, const Vector& sq) const {
    return vandermonde_2d(N, rq, sq) * Vinv;
  }
};

inline ReferenceOperators build_reference_operators(int N) {
  if (N < 1) throw ConfigError("polynomial order must be >= 1");
  ReferenceOperators ops;
  ops.N = N;
  ops.Np = (N + 1) * (N + 2) / 2;
  ops.Nfp = N + 1;

  detail::warp_blend_nodes(N, ops.r, ops.s);

  ops.V = vandermonde_2d(N, ops.r, ops.s);
  ops.Vinv = ops.V.partialPivLu().inverse();
  Matrix Vr, Vs;
  grad_vandermonde_2d(N, ops.r, ops.s, Vr, Vs);
  ops.Dr = Vr * ops.Vinv;
  ops.Ds = Vs * ops.Vinv;
  ops.M = ops.Vinv.transpose() * ops.Vinv;
  ops.Sr = ops.M * ops.Dr;
  ops.Ss = ops.M * ops.Ds;

  // Face node extraction. Reference edges: face 0 is s=-1, face 1 is r+s=0,
  // face 2 is r=-1. Vertex f sits at parameter -1 of face f.
  const Real vr[3] = {-1.0, 1.0, -1.0};
  const Real vs[3] = {-1.0, -1.0, 1.0};
  ops.fmask.resize(ops.Nfp, 3);
  ops.face_param.resize(ops.Nfp, 3);
  for (int f = 0; f < 3; ++f) {
    const Real ax = vr[f], ay = vs[f];
    const Real bx = vr[(f + 1) % 3], by = vs[(f + 1) % 3];
    const Real len2 = (bx - ax) * (bx - ax) + (by - ay) * (by - ay);
    std::vector<std::pair<Real, int>> on_face;
    for (int p = 0; p < ops.Np; ++p) {
      const Real dist = std::abs((bx - ax) * (ops.s[p] - ay) - (by - ay) * (ops.r[p] - ax)) /
                        std::sqrt(len2);
      if (dist < 1e-12) {
        const Real xi =
            2.0 * ((ops.r[p] - ax) * (bx - ax) + (ops.s[p] - ay) * (by - ay)) / len2 - 1.0;
        on_face.emplace_back(xi, p);
      }
    }
    if (static_cast<int>(on_face.size()) != ops.Nfp)
      throw Error("face node extraction failed for order " + std::to_string(N));
    std::sort(on_face.begin(), on_face.end());
    for (int p = 0; p < ops.Nfp; ++p) {
      ops.face_param(p, f) = on_face[p].first;
      ops.fmask(p, f) = on_face[p].second;
    }
  }

  // Face mass matrix from the 1D Vandermonde at the face parameters. The node
  // layout is the same on all three faces, so one matrix serves all of them.
  {
    const Matrix V1 = vandermonde_1d(N, ops.face_param.col(0));
    ops.M1D = (V1 * V1.transpose()).partialPivLu().inverse();
  }

  ops.Emat = Matrix::Zero(ops.Np, 3 * ops.Nfp);
  for (int f = 0; f < 3; ++f)
    for (int p = 0; p < ops.Nfp; ++p)
      for (int q = 0; q < ops.Nfp; ++q) ops.Emat(ops.fmask(p, f), f * ops.Nfp + q) += ops.M1D(p, q);

  // Triangulate the node lattice row by row for plotting and VTK export.
  std::vector<int> row_offset(N + 2, 0);
  for (int n = 0; n <= N; ++n) row_offset[n + 1] = row_offset[n] + (N + 1 - n);
  std::vector<std::array<int, 3>> tris;
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < N - n; ++m) {
      tris.push_back({row_offset[n] + m, row_offset[n] + m + 1, row_offset[n + 1] + m});
      if (m < N - n - 1)
        tris.push_back({row_offset[n] + m + 1, row_offset[n + 1] + m + 1, row_offset[n + 1] + m});
    }
  }
  ops.plot_triangles.resize(tris.size(), 3);
  for (size_t t = 0; t < tris.size(); ++t)
    for (int i = 0; i < 3; ++i) ops.plot_triangles(t, i) = tris[t][i];

  return ops;
}

// Physical node coordinates, one column per element.
inline void nodal_coordinates(const Mesh& mesh, const ReferenceOperators& ops, Matrix& x,
                              Matrix& y) {
  const int K = mesh.num_elements();
  x.resize(ops.Np, K);
  y.resize(ops.Np, K);
  for (int k = 0; k < K; ++k) {
    for (int p = 0; p < ops.Np; ++p) {
      const Vec2 pt = mesh.map_to_physical(k, ops.r[p], ops.s[p]);
      x(p, k) = pt.x;
      y(p, k) = pt.y;
    }
  }
}

// Nodal interpolant of a scalar function, one column per element.
inline Matrix project_function(const std::function<Real(Real, Real)>& f, const Mesh& mesh,
                               const ReferenceOperators& ops) {
  Matrix x, y;
  nodal_coordinates(mesh, ops, x, y);
  Matrix u(ops.Np, mesh.num_elements());
  for (int k = 0; k < mesh.num_elements(); ++k)
    for (int p = 0; p < ops.Np; ++p) {
      u(p, k) = f(x(p, k), y(p, k));
      if (!std::isfinite(u(p, k)))
        throw Error("non-finite function value while projecting onto the mesh");
    }
  return u;
}

// Discrete L2 inner product over the whole mesh; fields are Np x K.
inline Real l2_inner_product(const Matrix& u, const Matrix& v, const Mesh& mesh,
                             const ReferenceOperators& ops) {
  const Matrix Mv = ops.M * v;
  Real total = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k)
    total += mesh.jac[k] * u.col(k).dot(Mv.col(k));
  return total;
}

inline Real l2_norm(const Matrix& u, const Mesh& mesh, const ReferenceOperators& ops) {
  return std::sqrt(std::max(0.0, l2_inner_product(u, u, mesh, ops)));
}

}  // namespace tedg
