#pragma once

#include <vector>

#include "corecut/linalg.hpp"

namespace corecut {

// Ambient model space of constant sectional curvature -k^2 and dimension m.
// k > 0: hyperboloid model, points live in R^{m+1} with Minkowski product
//   <p,p> = -1/k^2 and p_0 > 0.
// k = 0: Euclidean limit, points are plain m-vectors.
struct CurvatureSpace {
    int dim = 2;     // m >= 1
    double k = 1.0;  // curvature scale >= 0

    bool euclidean() const { return k == 0.0; }
    int ambient_dim() const { return euclidean() ? dim : dim + 1; }
};

bool same_space(const CurvatureSpace& a, const CurvatureSpace& b);
void validate_space(const CurvatureSpace& s);

struct Point {
    Vec c;
};

struct TangentVector {
    Point base;
    Vec v;
};

struct GeodesicSegment {
    Point a;
    Point b;
};

// H(x,v): points q whose geodesic direction from x makes an angle <= pi/2
// with v. Closed on the boundary; H(x,v) and H(x,-v) share the geodesic
// hyperplane through x orthogonal to v.
struct HalfSpace {
    TangentVector n;  // unit tangent at the base point

    const Point& base() const { return n.base; }
    const Vec& normal() const { return n.v; }
};

// Metric on a tangent space: restriction of the Minkowski form (k>0, positive
// definite on tangent vectors) or the Euclidean dot product (k=0).
double metric_dot(const CurvatureSpace& s, const Vec& a, const Vec& b);
double metric_norm(const CurvatureSpace& s, const Vec& a);

Point origin(const CurvatureSpace& s);

// Validates coordinates (dimension, hyperboloid constraint within 1e-6) and
// renormalizes exactly onto the model surface.
Point make_point(const CurvatureSpace& s, Vec coords);

// Projects raw coordinates back onto the hyperboloid (no-op for k=0).
Point renormalized(const CurvatureSpace& s, Vec coords);

bool point_on_model(const CurvatureSpace& s, const Point& p, double tol = 1e-9);

// Removes the component of w normal to the model surface at x.
Vec project_to_tangent(const CurvatureSpace& s, const Point& x, Vec w);

// Unit tangent vector at x along the (projected) direction dir.
TangentVector make_unit_tangent(const CurvatureSpace& s, const Point& x, Vec dir);

HalfSpace make_half_space(const CurvatureSpace& s, const Point& x, Vec dir);

// Geodesic distance. k>0: (1/k) arccosh(-k^2 <p,q>), evaluated through the
// chord form 2/k asinh(k |p-q|_M / 2) which is stable at both ends of the
// range. Arguments whose arccosh argument falls below 1 - 1e-6 raise
// NumericalError; smaller defects are clamped.
double distance(const CurvatureSpace& s, const Point& p, const Point& q);

// Geodesic flow: follow the unit tangent v for arc length t.
Point exp_map(const CurvatureSpace& s, const TangentVector& v, double t);

// Unit tangent at x of the geodesic [x,q], pointing toward q.
TangentVector log_dir(const CurvatureSpace& s, const Point& x, const Point& q);

// Tangent vector at x with |log_map| = distance(x,q); zero vector if q == x.
TangentVector log_map(const CurvatureSpace& s, const Point& x, const Point& q);

// Parallel transport of u along the geodesic [base(u), y]. Identity when the
// endpoints coincide.
TangentVector parallel_transport(const CurvatureSpace& s, const TangentVector& u, const Point& y);

// Cosine of the angle at the half-space base point between the direction to q
// and the half-space normal; +1 when q is the base point itself.
double half_space_cosine(const CurvatureSpace& s, const HalfSpace& h, const Point& q);

// Membership with the closed-boundary convention: cosine >= -eps_angle.
bool half_space_contains(const CurvatureSpace& s, const HalfSpace& h, const Point& q,
                         double eps_angle = 0.0);

// Signed geodesic distance from q to the hyperplane bounding h; positive
// inside h, negative outside.
double half_space_margin(const CurvatureSpace& s, const HalfSpace& h, const Point& q);

// min_{t in [0,1]} distance(x, gamma(t)) for the geodesic gamma from a to b.
// Closed form: the distance along a geodesic is convex in nonpositive
// curvature, so the minimum is the perpendicular foot when it falls inside
// the segment (computed by projecting onto the endpoint 2-plane) and the
// nearer endpoint otherwise.
double dist_point_to_segment(const CurvatureSpace& s, const Point& x, const GeodesicSegment& seg);

// Sum of interior angles; < pi for k>0, == pi for k=0. Degenerate triangles
// (coincident or collinear vertices) raise DegenerateInputError.
double triangle_angle_sum(const CurvatureSpace& s, const Point& p, const Point& q, const Point& r);

// Universal blocking radius (1/k) log(1+sqrt(2)); diverges as k -> 0, so
// k <= 0 raises InvalidInputError.
double blocking_radius(double k);

// Deterministic orthonormal basis of the tangent space at x (m vectors).
std::vector<Vec> tangent_basis(const CurvatureSpace& s, const Point& x);

// Klein ball coordinates (straight-line geodesics); identity for k=0.
Vec to_klein(const CurvatureSpace& s, const Point& p);
Point from_klein(const CurvatureSpace& s, const Vec& u);

// Point at parameter t in [0,1] along the geodesic from a to b.
Point geodesic_point(const CurvatureSpace& s, const Point& a, const Point& b, double t);

}  // namespace corecut
