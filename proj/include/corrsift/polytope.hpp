#ifndef CORRSIFT_POLYTOPE_HPP
#define CORRSIFT_POLYTOPE_HPP

#include <functional>
#include <vector>

#include "corrsift/cca.hpp"
#include "corrsift/linalg.hpp"

namespace corrsift {

// H-representation {lambda : L lambda <= g} of the conditioning set in the
// lambda-cube. Rows: one +/- pair per cross pair (i in group, j outside),
// then the ordering block lambda_1 <= 1, lambda_l - lambda_{l-1} <= 0,
// -lambda_r <= 0. No redundancy removal at this stage.
struct PolytopeH {
  Matrix L;  // m x r
  Vector g;  // m
  int r = 0;

  int rows() const { return static_cast<int>(g.size()); }

  bool contains(const Vector& lambda, double tol = 0.0) const {
    return ((L * lambda - g).array() <= tol).all();
  }
};

// r + 1 vertices of a non-degenerate r-simplex, one per row.
struct Simplex {
  Matrix vertices;  // (r+1) x r

  int dim() const { return static_cast<int>(vertices.cols()); }
  double volume() const;
  // Barycenter-weighted point: rows of `vertices` combined with `bary`.
  Vector point(const Vector& bary) const { return vertices.transpose() * bary; }
};

// Constraint matrix of the conditioning set for the selected group at
// threshold c. The coefficient of lambda_k in the (i, j) cross row is the
// (i, j) entry of the rank-one correlation perturbation direction.
PolytopeH build_constraints(const CovarianceMatrix& s,
                            const CcaDecomposition& cca, double c);

// Truncation point for the r = 1 beta closed form:
// min{1, (c * lambda_hat_1 / max cross |R|)^2}; 1 when the cross block of
// R(S) is exactly zero (the constraint never binds).
double g_u(const CovarianceMatrix& s, const CcaDecomposition& cca, double c);

// All extreme points of {lambda : L lambda <= g}, assuming the polytope is
// contained in the ordered cube (guaranteed by the ordering rows). Double
// description in floating point; feasibility tolerance `tol`.
std::vector<Vector> enumerate_vertices(const PolytopeH& poly,
                                       double tol = 1e-9);

// Interior-disjoint simplicial cover of the convex hull of `vertices`
// (pulling triangulation; not necessarily Delaunay). `alternate_apex`
// selects a different pulling order, giving a second valid triangulation.
// Throws DegenerateGeometryError when the points span less than r dims.
std::vector<Simplex> triangulate(const std::vector<Vector>& vertices,
                                 bool alternate_apex = false);

struct IntegrationResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  long evaluations = 0;
};

// Adaptive integration of f over a simplex with an embedded
// Grundmann-Moller degree 5/7 rule pair and longest-edge bisection.
// Stops when the error estimate <= rel_tol * |value| or after
// max_subdivisions splits (then returns with converged = false).
IntegrationResult integrate_simplex(
    const std::function<double(const Vector&)>& f, const Simplex& s,
    double rel_tol = 1e-6, int max_subdivisions = 10000);

}  // namespace corrsift

#endif  // CORRSIFT_POLYTOPE_HPP
