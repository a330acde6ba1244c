#pragma once

#include <cmath>

#include "tedg/types.hpp"

namespace tedg {

// Normalized Jacobi polynomial P_n^{(alpha,beta)}(x), orthonormal with respect
// to the weight (1-x)^alpha (1+x)^beta on [-1,1].
inline Real jacobi_p(Real x, Real alpha, Real beta, int n) {
  const Real ab = alpha + beta;
  const Real gamma0 = std::pow(2.0, ab + 1.0) / (ab + 1.0) * std::tgamma(alpha + 1.0) *
                      std::tgamma(beta + 1.0) / std::tgamma(ab + 1.0);
  Real p_prev = 1.0 / std::sqrt(gamma0);
  if (n == 0) return p_prev;

  const Real gamma1 = (alpha + 1.0) * (beta + 1.0) / (ab + 3.0) * gamma0;
  Real p = ((ab + 2.0) * x / 2.0 + (alpha - beta) / 2.0) / std::sqrt(gamma1);
  if (n == 1) return p;

  Real a_prev = 2.0 / (2.0 + ab) * std::sqrt((alpha + 1.0) * (beta + 1.0) / (ab + 3.0));
  for (int i = 1; i <= n - 1; ++i) {
    const Real h1 = 2.0 * i + ab;
    const Real a_new = 2.0 / (h1 + 2.0) *
                       std::sqrt((i + 1.0) * (i + 1.0 + ab) * (i + 1.0 + alpha) *
                                 (i + 1.0 + beta) / (h1 + 1.0) / (h1 + 3.0));
    const Real b_new = -(alpha * alpha - beta * beta) / h1 / (h1 + 2.0);
    const Real p_new = (-a_prev * p_prev + (x - b_new) * p) / a_new;
    p_prev = p;
    p = p_new;
    a_prev = a_new;
  }
  return p;
}

inline Real grad_jacobi_p(Real x, Real alpha, Real beta, int n) {
  if (n == 0) return 0.0;
  return std::sqrt(n * (n + alpha + beta + 1.0)) * jacobi_p(x, alpha + 1.0, beta + 1.0, n - 1);
}

struct Rule1D {
  Vector points;
  Vector weights;
};

// Gauss quadrature for the weight (1-x)^alpha (1+x)^beta, computed from the
// eigen-decomposition of the Jacobi recurrence matrix. n points integrate
// weighted polynomials of degree 2n-1 exactly.
inline Rule1D gauss_jacobi(Real alpha, Real beta, int npoints) {
  if (npoints < 1) throw Error("gauss_jacobi: need at least one point");
  const Real ab = alpha + beta;
  const int n = npoints - 1;

  Rule1D rule;
  rule.points.resize(npoints);
  rule.weights.resize(npoints);
  const Real mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) *
                   std::tgamma(beta + 1.0) / std::tgamma(ab + 2.0);
  if (npoints == 1) {
    rule.points[0] = -(alpha - beta) / (ab + 2.0);
    rule.weights[0] = mu0;
    return rule;
  }

  Matrix J = Matrix::Zero(npoints, npoints);
  for (int i = 0; i <= n; ++i) {
    const Real h1 = 2.0 * i + ab;
    J(i, i) = (i == 0 && std::abs(ab) < 1e-14)
                  ? 0.0
                  : -(alpha * alpha - beta * beta) / (h1 + 2.0) / h1;
    if (i < n) {
      const Real k = i + 1.0;
      J(i, i + 1) = 2.0 / (h1 + 2.0) *
                    std::sqrt(k * (k + ab) * (k + alpha) * (k + beta) / (h1 + 1.0) / (h1 + 3.0));
      J(i + 1, i) = J(i, i + 1);
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(J);
  rule.points = eig.eigenvalues();
  for (int i = 0; i < npoints; ++i) {
    const Real v0 = eig.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0 * mu0;
  }
  return rule;
}

inline Rule1D gauss_legendre(int npoints) { return gauss_jacobi(0.0, 0.0, npoints); }

// Gauss-Lobatto points of order n (n+1 points including both endpoints).
inline Vector gauss_lobatto_points(int order) {
  if (order < 1) throw Error("gauss_lobatto_points: order must be >= 1");
  Vector x(order + 1);
  x[0] = -1.0;
  x[order] = 1.0;
  if (order > 1) {
    const Rule1D interior = gauss_jacobi(1.0, 1.0, order - 1);
    x.segment(1, order - 1) = interior.points;
  }
  return x;
}

struct TriangleRule {
  Vector r;
  Vector s;
  Vector w;
  int degree = 0;
};

// Quadrature on the reference triangle {r,s >= -1, r+s <= 0}, exact for all
// polynomials of total degree <= `degree`. Built as a tensor rule in collapsed
// coordinates: Gauss-Legendre in the first direction and Gauss-Jacobi(1,0) in
// the second, which absorbs the (1-b)/2 volume factor of the collapse map.
inline TriangleRule triangle_rule(int degree) {
  if (degree < 0) throw Error("triangle_rule: degree must be >= 0");
  const int n = std::max(1, (degree + 2) / 2);
  const Rule1D ga = gauss_legendre(n);
  const Rule1D gb = gauss_jacobi(1.0, 0.0, n);

  TriangleRule rule;
  rule.degree = degree;
  rule.r.resize(n * n);
  rule.s.resize(n * n);
  rule.w.resize(n * n);
  int q = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i, ++q) {
      const Real a = ga.points[i];
      const Real b = gb.points[j];
      rule.r[q] = 0.5 * (1.0 + a) * (1.0 - b) - 1.0;
      rule.s[q] = b;
      rule.w[q] = 0.5 * ga.weights[i] * gb.weights[j];
    }
  }
  return rule;
}

}  // namespace tedg
