#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>

#include "tedg/mesh.hpp"
#include "tedg/reference_element.hpp"
#include "tedg/types.hpp"

namespace tedg {

// Pointwise material description: symmetric permittivity tensor entries and
// scalar permeability, each a function of position.
struct MaterialFunctions {
  std::function<Real(Real, Real)> eps_xx;
  std::function<Real(Real, Real)> eps_xy;
  std::function<Real(Real, Real)> eps_yy;
  std::function<Real(Real, Real)> mu;
};

inline MaterialFunctions isotropic_material(Real eps, Real mu = 1.0) {
  return {[eps](Real, Real) { return eps; }, [](Real, Real) { return 0.0; },
          [eps](Real, Real) { return eps; }, [mu](Real, Real) { return mu; }};
}

inline Real eps_min_eigenvalue(Real exx, Real exy, Real eyy) {
  const Real mean = 0.5 * (exx + eyy);
  const Real radius = std::sqrt(0.25 * (exx - eyy) * (exx - eyy) + exy * exy);
  return mean - radius;
}

// Scalar permittivity felt by a plane wave crossing an interface with unit
// normal n: det(eps) / (n^T eps n).
inline Real effective_permittivity(Real exx, Real exy, Real eyy, Real nx, Real ny) {
  const Real det = exx * eyy - exy * exy;
  const Real nen = nx * (exx * nx + exy * ny) + ny * (exy * nx + eyy * ny);
  if (!(det > 0.0) || !(nen > 0.0))
    throw MaterialError("permittivity tensor is not positive definite at a face");
  return det / nen;
}

// Material sampled at every element node. Regions are resolved through the
// mesh's element tags, so neighboring elements with different tags keep their
// own one-sided values on the shared face.
struct MaterialField {
  Matrix eps_xx, eps_xy, eps_yy, mu; // Np x K
  Real eps_lb = 0.0;                 // min over nodes of the smallest eps eigenvalue
  Real mu_lb = 0.0;                  // min over nodes of mu
};

inline MaterialField build_material_field(const Mesh& mesh, const ReferenceOperators& ops,
                                          const std::map<int, MaterialFunctions>& regions) {
  const int K = mesh.num_elements();
  Matrix x, y;
  nodal_coordinates(mesh, ops, x, y);

  MaterialField field;
  field.eps_xx.resize(ops.Np, K);
  field.eps_xy.resize(ops.Np, K);
  field.eps_yy.resize(ops.Np, K);
  field.mu.resize(ops.Np, K);
  field.eps_lb = std::numeric_limits<Real>::infinity();
  field.mu_lb = std::numeric_limits<Real>::infinity();

  for (int k = 0; k < K; ++k) {
    const auto it = regions.find(mesh.region_tags[k]);
    if (it == regions.end())
      throw MaterialError("no material assigned to region tag " +
                          std::to_string(mesh.region_tags[k]));
    const MaterialFunctions& mat = it->second;
    for (int p = 0; p < ops.Np; ++p) {
      const Real exx = mat.eps_xx(x(p, k), y(p, k));
      const Real exy = mat.eps_xy(x(p, k), y(p, k));
      const Real eyy = mat.eps_yy(x(p, k), y(p, k));
      const Real mu = mat.mu(x(p, k), y(p, k));
      if (!std::isfinite(exx) || !std::isfinite(exy) || !std::isfinite(eyy) ||
          !std::isfinite(mu))
        throw MaterialError("non-finite material value in element " + std::to_string(k));
      const Real lam = eps_min_eigenvalue(exx, exy, eyy);
      if (!(lam > 0.0))
        throw MaterialError("permittivity tensor not positive definite in element " +
                            std::to_string(k));
      if (!(mu > 0.0))
        throw MaterialError("non-positive permeability in element " + std::to_string(k));
      field.eps_xx(p, k) = exx;
      field.eps_xy(p, k) = exy;
      field.eps_yy(p, k) = eyy;
      field.mu(p, k) = mu;
      field.eps_lb = std::min(field.eps_lb, lam);
      field.mu_lb = std::min(field.mu_lb, mu);
    }
  }
  return field;
}

// Face-wise impedance Z and admittance Y. The minus side is the owning
// element's face-averaged material; the plus side is the neighbor's own value
// at the shared face, or a copy of the minus side on the outer boundary.
struct FaceImpedance {
  Matrix Zm, Zp, Ym, Yp; // K x 3
};

inline FaceImpedance face_impedances(const Mesh& mesh, const ReferenceOperators& ops,
                                     const MaterialField& material) {
  const int K = mesh.num_elements();
  FaceImpedance imp;
  imp.Zm.resize(K, 3);
  imp.Zp.resize(K, 3);
  imp.Ym.resize(K, 3);
  imp.Yp.resize(K, 3);

  for (int k = 0; k < K; ++k) {
    for (int f = 0; f < 3; ++f) {
      Real exx = 0.0, exy = 0.0, eyy = 0.0, mu = 0.0;
      for (int p = 0; p < ops.Nfp; ++p) {
        const int node = ops.fmask(p, f);
        exx += material.eps_xx(node, k);
        exy += material.eps_xy(node, k);
        eyy += material.eps_yy(node, k);
        mu += material.mu(node, k);
      }
      exx /= ops.Nfp;
      exy /= ops.Nfp;
      eyy /= ops.Nfp;
      mu /= ops.Nfp;

      const Real eps_eff =
          effective_permittivity(exx, exy, eyy, mesh.normal_x(k, f), mesh.normal_y(k, f));
      const Real c = 1.0 / std::sqrt(mu * eps_eff);
      imp.Zm(k, f) = mu * c;
      imp.Ym(k, f) = 1.0 / imp.Zm(k, f);
    }
  }

  for (int k = 0; k < K; ++k) {
    for (int f = 0; f < 3; ++f) {
      if (mesh.is_boundary(k, f)) {
        imp.Zp(k, f) = imp.Zm(k, f);
        imp.Yp(k, f) = imp.Ym(k, f);
      } else {
        const int k2 = mesh.neighbor(k, f);
        const int f2 = mesh.neighbor_face(k, f);
        imp.Zp(k, f) = imp.Zm(k2, f2);
        imp.Yp(k, f) = imp.Ym(k2, f2);
      }
    }
  }
  return imp;
}

}  // namespace tedg
