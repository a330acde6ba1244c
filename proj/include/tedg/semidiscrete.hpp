#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "tedg/materials.hpp"
#include "tedg/mesh.hpp"
#include "tedg/quadrature.hpp"
#include "tedg/reference_element.hpp"
#include "tedg/types.hpp"

namespace tedg {

// Transverse-electric field triple on a DG mesh, one column per element.
struct FieldState {
  Matrix ex, ey, hz;

  static FieldState zero(int np, int k) {
    FieldState state;
    state.ex = Matrix::Zero(np, k);
    state.ey = Matrix::Zero(np, k);
    state.hz = Matrix::Zero(np, k);
    return state;
  }

  bool is_finite() const {
    return ex.allFinite() && ey.allFinite() && hz.allFinite();
  }
};

// Spatially discrete curl operator with upwind-penalized numerical fluxes and
// prefactored material mass blocks. Jumps use the convention [u] = u- - u+;
// on the outer boundary the exterior trace is dropped ([u] = u-), the flux
// penalty is forced on (alpha = 1), and the exterior impedance copies the
// interior one, which together realize the absorbing boundary condition.
class DGOperator {
 public:
  Mesh mesh;
  ReferenceOperators ops;
  MaterialField material;
  FaceImpedance impedance;

  Matrix node_x, node_y; // Np x K physical node coordinates

  // Quadrature of degree 3N used to assemble variable-coefficient mass blocks.
  Matrix Iq; // nq x Np interpolation to quadrature points
  Vector wq;

  DGOperator(Mesh mesh_in, int order, const std::map<int, MaterialFunctions>& regions)
      : mesh(std::move(mesh_in)), ops(build_reference_operators(order)) {
    material = build_material_field(mesh, ops, regions);
    impedance = face_impedances(mesh, ops, material);
    nodal_coordinates(mesh, ops, node_x, node_y);
    build_quadrature();
    build_trace_tables();
    build_face_constants();
    build_mass_blocks();
  }

  int num_elements() const { return mesh.num_elements(); }
  int nodes_per_element() const { return ops.Np; }
  int face_nodes_per_element() const { return 3 * ops.Nfp; }

  // ---- trace extraction ------------------------------------------------

  // Minus-side traces at the face nodes, rows grouped by local face.
  Matrix trace_minus(const Matrix& u) const {
    return gather(u, vmap_minus_);
  }

  // Plus-side traces; on boundary faces the minus trace is returned.
  Matrix trace_plus(const Matrix& u) const {
    return gather(u, vmap_plus_);
  }

  // Face jumps [u] = u- - u+, with [u] = u- on the boundary.
  Matrix face_jumps(const Matrix& u) const {
    const int K = mesh.num_elements();
    const int rows = 3 * ops.Nfp;
    Matrix out(rows, K);
    const Real* flat = u.data();
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < rows; ++j) {
        const int idx = k * rows + j;
        out(j, k) = flat[vmap_minus_[idx]] - face_node_mask_[idx] * flat[vmap_plus_[idx]];
      }
    return out;
  }

  // Face jumps of the average (a+b)/2 without forming the averaged field.
  Matrix face_jumps_mean(const Matrix& a, const Matrix& b) const {
    const int K = mesh.num_elements();
    const int rows = 3 * ops.Nfp;
    Matrix out(rows, K);
    const Real* fa = a.data();
    const Real* fb = b.data();
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < rows; ++j) {
        const int idx = k * rows + j;
        const Real minus = fa[vmap_minus_[idx]] + fb[vmap_minus_[idx]];
        const Real plus = fa[vmap_plus_[idx]] + fb[vmap_plus_[idx]];
        out(j, k) = 0.5 * (minus - face_node_mask_[idx] * plus);
      }
    return out;
  }

  // ---- volume terms ------------------------------------------------------

  // Weak curl of Hz tested against the basis: vx = (d_y Hz, phi), vy = -(d_x Hz, phi).
  void electric_volume(const Matrix& hz, Matrix& vx, Matrix& vy) const {
    vx.resize(ops.Np, mesh.num_elements());
    vy.resize(ops.Np, mesh.num_elements());
    tmp_r_.noalias() = ops.Sr * hz;
    tmp_s_.noalias() = ops.Ss * hz;
    vx.noalias() = tmp_r_ * jry_.asDiagonal();
    vx.noalias() += tmp_s_ * jsy_.asDiagonal();
    vy.noalias() = tmp_r_ * jrx_.asDiagonal();
    vy.noalias() += tmp_s_ * jsx_.asDiagonal();
    vy *= -1.0;
  }

  // vz = (d_y Ex - d_x Ey, phi).
  void magnetic_volume(const Matrix& ex, const Matrix& ey, Matrix& vz) const {
    vz.resize(ops.Np, mesh.num_elements());
    tmp_r_.noalias() = ops.Sr * ex;
    tmp_s_.noalias() = ops.Ss * ex;
    vz.noalias() = tmp_r_ * jry_.asDiagonal();
    vz.noalias() += tmp_s_ * jsy_.asDiagonal();
    tmp_r_.noalias() = ops.Sr * ey;
    tmp_s_.noalias() = ops.Ss * ey;
    vz.noalias() -= tmp_r_ * jrx_.asDiagonal();
    vz.noalias() -= tmp_s_ * jsx_.asDiagonal();
  }

  // ---- surface terms -----------------------------------------------------

  // Adds the lifted electric flux to (fx, fy). jhz is the jump of the
  // magnetic trace; jex/jey are jumps of the averaged electric field.
  // `only_face` restricts the contribution to one local face (testing hook).
  void electric_flux_lift(const Matrix& jhz, const Matrix& jex, const Matrix& jey, Real alpha,
                          Matrix& fx, Matrix& fy, int only_face = -1) const {
    const int K = mesh.num_elements();
    const int Nfp = ops.Nfp;
    Matrix gx(3 * Nfp, K), gy(3 * Nfp, K);
    for (int k = 0; k < K; ++k) {
      for (int f = 0; f < 3; ++f) {
        const Real nx = mesh.normal_x(k, f);
        const Real ny = mesh.normal_y(k, f);
        const Real a = mesh.is_boundary(k, f) ? 1.0 : alpha;
        const Real scale = half_face_length_(k, f);
        const bool active = (only_face < 0 || only_face == f);
        for (int p = 0; p < Nfp; ++p) {
          const int row = f * Nfp + p;
          const Real g = active ? inv_zsum_n_(row, k) *
                                      (z_plus_n_(row, k) * jhz(row, k) -
                                       a * (nx * jey(row, k) - ny * jex(row, k)))
                                : 0.0;
          gx(row, k) = -ny * scale * g;
          gy(row, k) = nx * scale * g;
        }
      }
    }
    fx.noalias() += ops.Emat * gx;
    fy.noalias() += ops.Emat * gy;
  }

  // Adds the lifted magnetic flux to fz. jex/jey are jumps of the electric
  // field; jhz is the jump of the averaged magnetic trace.
  void magnetic_flux_lift(const Matrix& jex, const Matrix& jey, const Matrix& jhz, Real alpha,
                          Matrix& fz, int only_face = -1) const {
    const int K = mesh.num_elements();
    const int Nfp = ops.Nfp;
    Matrix gz(3 * Nfp, K);
    for (int k = 0; k < K; ++k) {
      for (int f = 0; f < 3; ++f) {
        const Real nx = mesh.normal_x(k, f);
        const Real ny = mesh.normal_y(k, f);
        const Real a = mesh.is_boundary(k, f) ? 1.0 : alpha;
        const Real scale = half_face_length_(k, f);
        const bool active = (only_face < 0 || only_face == f);
        for (int p = 0; p < Nfp; ++p) {
          const int row = f * Nfp + p;
          const Real g = active ? inv_ysum_n_(row, k) *
                                      (y_plus_n_(row, k) * (nx * jey(row, k) - ny * jex(row, k)) -
                                       a * jhz(row, k))
                                : 0.0;
          gz(row, k) = scale * g;
        }
      }
    }
    fz.noalias() += ops.Emat * gz;
  }

  // ---- full right-hand sides ----------------------------------------------

  // Weak right-hand side of the electric update: volume curl of hz plus the
  // lifted flux built from hz jumps and jumps of the averaged electric field.
  void electric_rhs(const Matrix& hz, const Matrix& ex_avg, const Matrix& ey_avg, Real alpha,
                    Matrix& rx, Matrix& ry) const {
    electric_volume(hz, rx, ry);
    electric_flux_lift(face_jumps(hz), face_jumps(ex_avg), face_jumps(ey_avg), alpha, rx, ry);
  }

  // Weak right-hand side of the magnetic update from the updated electric
  // field and jumps of the averaged magnetic trace.
  void magnetic_rhs(const Matrix& ex, const Matrix& ey, const Matrix& hz_avg, Real alpha,
                    Matrix& rz) const {
    magnetic_volume(ex, ey, rz);
    magnetic_flux_lift(face_jumps(ex), face_jumps(ey), face_jumps(hz_avg), alpha, rz);
  }

  // ---- mass solves ---------------------------------------------------------

  // Applies the inverse of the permittivity-weighted block mass matrix.
  void solve_electric(const Matrix& rx, const Matrix& ry, Matrix& ox, Matrix& oy) const {
    const int Np = ops.Np;
    const int K = mesh.num_elements();
    ox.resize(Np, K);
    oy.resize(Np, K);
#pragma omp parallel
    {
      Vector rhs(2 * Np), sol(2 * Np);
#pragma omp for
      for (int k = 0; k < K; ++k) {
        rhs.head(Np) = rx.col(k);
        rhs.tail(Np) = ry.col(k);
        sol.noalias() = eps_inverse_.middleCols(2 * Np * k, 2 * Np) * rhs;
        ox.col(k) = sol.head(Np);
        oy.col(k) = sol.tail(Np);
      }
    }
  }

  // Applies the inverse of the permeability-weighted mass matrix.
  void solve_magnetic(const Matrix& rz, Matrix& oz) const {
    const int Np = ops.Np;
    const int K = mesh.num_elements();
    if (mu_is_uniform_) {
      oz.noalias() = mass_inverse_ref_ * rz * mu_jac_inverse_.asDiagonal();
      return;
    }
    oz.resize(Np, K);
#pragma omp parallel for
    for (int k = 0; k < K; ++k)
      oz.col(k).noalias() = mu_inverse_.middleCols(Np * k, Np) * rz.col(k);
  }

  // Weighted element mass matrix J_k * (w phi_i, phi_j) with the weight
  // interpolated from nodal values; exposed for verification.
  Matrix weighted_mass(const Vector& w_nodal, int k) const {
    const Vector wq_scaled =
        (wq.array() * (Iq * w_nodal).array()).matrix() * mesh.jac[k];
    return Iq.transpose() * wq_scaled.asDiagonal() * Iq;
  }

  // Weak load vector of a nodal source: per element J_k * M * s.
  Matrix weak_load(const Matrix& s_nodal) const {
    return (ops.M * s_nodal) * mesh.jac.asDiagonal();
  }

  // L2 norms against the reference mass matrix, accumulated in element order.
  Real field_norm(const Matrix& u) const { return l2_norm(u, mesh, ops); }

  Real electric_norm(const Matrix& ux, const Matrix& uy) const {
    const Real nx = l2_inner_product(ux, ux, mesh, ops);
    const Real ny = l2_inner_product(uy, uy, mesh, ops);
    return std::sqrt(std::max(0.0, nx + ny));
  }

  // Physical energy 0.5*((eps E, E) + (mu Hz, Hz)) with material values
  // interpolated to the assembly quadrature.
  Real discrete_energy(const FieldState& state) const {
    const Matrix exq = Iq * state.ex;
    const Matrix eyq = Iq * state.ey;
    const Matrix hzq = Iq * state.hz;
    const Matrix exxq = Iq * material.eps_xx;
    const Matrix exyq = Iq * material.eps_xy;
    const Matrix eyyq = Iq * material.eps_yy;
    const Matrix muq = Iq * material.mu;
    Real energy = 0.0;
    for (int k = 0; k < mesh.num_elements(); ++k) {
      Real acc = 0.0;
      for (int q = 0; q < wq.size(); ++q) {
        const Real ex = exq(q, k), ey = eyq(q, k), hz = hzq(q, k);
        acc += wq[q] * (exxq(q, k) * ex * ex + 2.0 * exyq(q, k) * ex * ey +
                        eyyq(q, k) * ey * ey + muq(q, k) * hz * hz);
      }
      energy += 0.5 * mesh.jac[k] * acc;
    }
    return energy;
  }

  Real min_face_impedance() const { return impedance.Zm.minCoeff(); }
  Real min_face_admittance() const { return impedance.Ym.minCoeff(); }

 private:
  // Flattened node index tables, laid out face-node-major within an element:
  // entry k*3*Nfp + f*Nfp + p addresses u.data() of an Np x K field.
  std::vector<int> vmap_minus_, vmap_plus_;
  std::vector<Real> face_node_mask_; // 1 interior, 0 boundary
  Matrix half_face_length_;          // K x 3
  // Pointwise impedance data at the face nodes (3Nfp x K). Sampling the
  // material at each trace node keeps the flux and the absorbing boundary
  // consistent when the material varies along a face; for materials constant
  // per element these reduce to the per-face values of the ImpedanceMap.
  Matrix z_plus_n_, y_plus_n_;
  Matrix inv_zsum_n_, inv_ysum_n_;
  Vector jrx_, jry_, jsx_, jsy_;     // J * d(r,s)/d(x,y), per element
  Matrix eps_inverse_;               // 2Np x 2Np*K
  bool mu_is_uniform_ = false;
  Matrix mass_inverse_ref_; // V V^T
  Vector mu_jac_inverse_;   // 1/(mu * J_k), uniform-mu fast path
  Matrix mu_inverse_;       // Np x Np*K otherwise

  mutable Matrix tmp_r_, tmp_s_;

  Matrix gather(const Matrix& u, const std::vector<int>& vmap) const {
    const int K = mesh.num_elements();
    const int rows = 3 * ops.Nfp;
    Matrix out(rows, K);
    const Real* flat = u.data();
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < rows; ++j) out(j, k) = flat[vmap[k * rows + j]];
    return out;
  }

  void build_quadrature() {
    const TriangleRule rule = triangle_rule(3 * ops.N);
    Iq = ops.interpolation_to(rule.r, rule.s);
    wq = rule.w;
  }

  void build_trace_tables() {
    const int K = mesh.num_elements();
    const int Nfp = ops.Nfp;
    vmap_minus_.resize(K * 3 * Nfp);
    vmap_plus_.resize(K * 3 * Nfp);
    face_node_mask_.resize(K * 3 * Nfp);

    for (int k = 0; k < K; ++k) {
      for (int f = 0; f < 3; ++f) {
        for (int p = 0; p < Nfp; ++p) {
          const int idx = k * 3 * Nfp + f * Nfp + p;
          vmap_minus_[idx] = k * ops.Np + ops.fmask(p, f);
          vmap_plus_[idx] = vmap_minus_[idx];
          face_node_mask_[idx] = 0.0;
        }
        if (mesh.is_boundary(k, f)) continue;

        const int k2 = mesh.neighbor(k, f);
        const int f2 = mesh.neighbor_face(k, f);
        const Real tol = 1e-8 * mesh.face_length(k, f);
        for (int p = 0; p < Nfp; ++p) {
          const int idx = k * 3 * Nfp + f * Nfp + p;
          const Real px = node_x(ops.fmask(p, f), k);
          const Real py = node_y(ops.fmask(p, f), k);
          int best = -1;
          Real best_dist = std::numeric_limits<Real>::infinity();
          for (int p2 = 0; p2 < Nfp; ++p2) {
            const Real dx = node_x(ops.fmask(p2, f2), k2) - px;
            const Real dy = node_y(ops.fmask(p2, f2), k2) - py;
            const Real dist = std::sqrt(dx * dx + dy * dy);
            if (dist < best_dist) {
              best_dist = dist;
              best = p2;
            }
          }
          if (best_dist > tol)
            throw MeshError("face nodes of neighboring elements " + std::to_string(k) + " and " +
                            std::to_string(k2) + " do not coincide");
          vmap_plus_[idx] = k2 * ops.Np + ops.fmask(best, f2);
          face_node_mask_[idx] = 1.0;
        }
      }
    }
  }

  void build_face_constants() {
    const int K = mesh.num_elements();
    const int Nfp = ops.Nfp;
    half_face_length_.resize(K, 3);
    z_plus_n_.resize(3 * Nfp, K);
    y_plus_n_.resize(3 * Nfp, K);
    inv_zsum_n_.resize(3 * Nfp, K);
    inv_ysum_n_.resize(3 * Nfp, K);
    for (int k = 0; k < K; ++k)
      for (int f = 0; f < 3; ++f) {
        half_face_length_(k, f) = 0.5 * mesh.face_length(k, f);
        const Real nx = mesh.normal_x(k, f);
        const Real ny = mesh.normal_y(k, f);
        auto z_at = [&](int flat) {
          const Real mu = material.mu.data()[flat];
          const Real eff =
              effective_permittivity(material.eps_xx.data()[flat], material.eps_xy.data()[flat],
                                     material.eps_yy.data()[flat], nx, ny);
          return mu / std::sqrt(mu * eff);
        };
        for (int p = 0; p < Nfp; ++p) {
          const int idx = k * 3 * Nfp + f * Nfp + p;
          const int row = f * Nfp + p;
          const Real zm = z_at(vmap_minus_[idx]);
          const Real zp = face_node_mask_[idx] > 0.0 ? z_at(vmap_plus_[idx]) : zm;
          z_plus_n_(row, k) = zp;
          y_plus_n_(row, k) = 1.0 / zp;
          inv_zsum_n_(row, k) = 1.0 / (zm + zp);
          inv_ysum_n_(row, k) = 1.0 / (1.0 / zm + 1.0 / zp);
        }
      }

    jrx_ = (mesh.jac.array() * mesh.rx.array()).matrix();
    jry_ = (mesh.jac.array() * mesh.ry.array()).matrix();
    jsx_ = (mesh.jac.array() * mesh.sx.array()).matrix();
    jsy_ = (mesh.jac.array() * mesh.sy.array()).matrix();
  }

  void build_mass_blocks() {
    const int Np = ops.Np;
    const int K = mesh.num_elements();

    eps_inverse_.resize(2 * Np, 2 * Np * K);
    Matrix A(2 * Np, 2 * Np);
    for (int k = 0; k < K; ++k) {
      const Matrix mxx = weighted_mass(material.eps_xx.col(k), k);
      const Matrix mxy = weighted_mass(material.eps_xy.col(k), k);
      const Matrix myy = weighted_mass(material.eps_yy.col(k), k);
      A.topLeftCorner(Np, Np) = mxx;
      A.topRightCorner(Np, Np) = mxy;
      A.bottomLeftCorner(Np, Np) = mxy;
      A.bottomRightCorner(Np, Np) = myy;
      Eigen::LLT<Matrix> llt(A);
      if (llt.info() != Eigen::Success)
        throw MaterialError("permittivity mass block of element " + std::to_string(k) +
                            " is not positive definite");
      eps_inverse_.middleCols(2 * Np * k, 2 * Np) = llt.solve(Matrix::Identity(2 * Np, 2 * Np));
    }

    const Real mu0 = material.mu(0, 0);
    mu_is_uniform_ = ((material.mu.array() - mu0).abs() <= 1e-12 * std::abs(mu0)).all();
    if (mu_is_uniform_) {
      mass_inverse_ref_ = ops.V * ops.V.transpose();
      mu_jac_inverse_ = (1.0 / (mu0 * mesh.jac.array())).matrix();
    } else {
      mu_inverse_.resize(Np, Np * K);
      for (int k = 0; k < K; ++k) {
        const Matrix m = weighted_mass(material.mu.col(k), k);
        Eigen::LLT<Matrix> llt(m);
        if (llt.info() != Eigen::Success)
          throw MaterialError("permeability mass block of element " + std::to_string(k) +
                              " is not positive definite");
        mu_inverse_.middleCols(Np * k, Np) = llt.solve(Matrix::Identity(Np, Np));
      }
    }
  }
};

}  // namespace tedg
