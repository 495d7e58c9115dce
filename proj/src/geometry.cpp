#include "corecut/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "corecut/errors.hpp"

namespace corecut {

namespace {

constexpr double kDegenerateDistance = 1e-12;

void check_coords(const CurvatureSpace& s, const Vec& c, const char* what) {
    if (static_cast<int>(c.size()) != s.ambient_dim())
        throw InvalidInputError(std::string(what) + ": coordinate dimension mismatch");
}

}  // namespace

bool same_space(const CurvatureSpace& a, const CurvatureSpace& b) {
    return a.dim == b.dim && a.k == b.k;
}

void validate_space(const CurvatureSpace& s) {
    if (s.dim < 1) throw InvalidInputError("space dimension must be >= 1");
    if (!(s.k >= 0.0) || !std::isfinite(s.k)) throw InvalidInputError("curvature scale k must be >= 0");
}

double metric_dot(const CurvatureSpace& s, const Vec& a, const Vec& b) {
    return s.euclidean() ? dot(a, b) : mink_dot(a, b);
}

double metric_norm(const CurvatureSpace& s, const Vec& a) {
    return std::sqrt(std::max(0.0, metric_dot(s, a, a)));
}

Point origin(const CurvatureSpace& s) {
    Vec c(s.ambient_dim(), 0.0);
    if (!s.euclidean()) c[0] = 1.0 / s.k;
    return Point{std::move(c)};
}

namespace {

// Timelike coordinate consistent with the spatial part. Enforcing the
// hyperboloid constraint this way stays exact at any radius, where the
// quadratic form itself loses all precision to cancellation.
double sheet_coord(const CurvatureSpace& s, const Vec& coords) {
    double sp = 0.0;
    for (std::size_t i = 1; i < coords.size(); ++i) sp += coords[i] * coords[i];
    return std::sqrt(1.0 / (s.k * s.k) + sp);
}

}  // namespace

Point renormalized(const CurvatureSpace& s, Vec coords) {
    if (s.euclidean()) return Point{std::move(coords)};
    const double p0 = sheet_coord(s, coords);
    if (!std::isfinite(p0)) throw NumericalError("point renormalization: non-finite coordinates");
    coords[0] = p0;
    return Point{std::move(coords)};
}

Point make_point(const CurvatureSpace& s, Vec coords) {
    check_coords(s, coords, "make_point");
    if (s.euclidean()) return Point{std::move(coords)};
    if (coords[0] <= 0.0) throw InvalidInputError("make_point: upper sheet required (p0 > 0)");
    const double p0 = sheet_coord(s, coords);
    if (std::abs(coords[0] - p0) > 1e-6 * p0)
        throw InvalidInputError("make_point: coordinates are not on the hyperboloid");
    return renormalized(s, std::move(coords));
}

bool point_on_model(const CurvatureSpace& s, const Point& p, double tol) {
    if (static_cast<int>(p.c.size()) != s.ambient_dim()) return false;
    if (s.euclidean()) return true;
    if (!(p.c[0] > 0.0)) return false;
    const double p0 = sheet_coord(s, p.c);
    return std::abs(p.c[0] - p0) <= tol * p0;
}

Vec project_to_tangent(const CurvatureSpace& s, const Point& x, Vec w) {
    if (s.euclidean()) return w;
    // Tangent space at x: { u : <u,x>_M = 0 }.
    const double c = s.k * s.k * mink_dot(w, x.c);
    axpy(w, c, x.c);
    return w;
}

TangentVector make_unit_tangent(const CurvatureSpace& s, const Point& x, Vec dir) {
    check_coords(s, dir, "make_unit_tangent");
    Vec v = project_to_tangent(s, x, std::move(dir));
    const double n = metric_norm(s, v);
    if (!(n > 1e-14)) throw DegenerateInputError("make_unit_tangent: zero direction");
    for (double& e : v) e /= n;
    return TangentVector{x, std::move(v)};
}

HalfSpace make_half_space(const CurvatureSpace& s, const Point& x, Vec dir) {
    return HalfSpace{make_unit_tangent(s, x, std::move(dir))};
}

double distance(const CurvatureSpace& s, const Point& p, const Point& q) {
    if (p.c.size() != q.c.size()) throw InvalidInputError("distance: dimension mismatch");
    if (s.euclidean()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < p.c.size(); ++i) {
            const double d = q.c[i] - p.c[i];
            acc += d * d;
        }
        return std::sqrt(acc);
    }
    // Chord form: <p-q,p-q>_M = (4/k^2) sinh^2(k d / 2); equivalent to
    // (1/k) arccosh(-k^2 <p,q>) but stable at both ends of the range.
    const double k2 = s.k * s.k;
    double chord2 = 0.0;
    {
        const double d0 = p.c[0] - q.c[0];
        chord2 = -d0 * d0;
        for (std::size_t i = 1; i < p.c.size(); ++i) {
            const double di = p.c[i] - q.c[i];
            chord2 += di * di;
        }
    }
    // arccosh-argument defect 1 - arg = -k^2 chord2 / 2; tolerance scales with
    // the products entering the form, which is what roundoff scales with.
    if (k2 * chord2 < -2e-6 * std::max(1.0, k2 * p.c[0] * q.c[0]))
        throw NumericalError("distance: arccosh argument below 1 beyond tolerance");
    chord2 = std::max(0.0, chord2);
    return 2.0 / s.k * std::asinh(0.5 * s.k * std::sqrt(chord2));
}

Point exp_map(const CurvatureSpace& s, const TangentVector& v, double t) {
    const double n = metric_norm(s, v.v);
    if (std::abs(n - 1.0) > 1e-6) throw InvalidInputError("exp_map: direction is not unit length");
    if (s.euclidean()) {
        Vec c = v.base.c;
        axpy(c, t, v.v);
        return Point{std::move(c)};
    }
    const double kt = s.k * t;
    Vec c = scaled(v.base.c, std::cosh(kt));
    axpy(c, std::sinh(kt) / s.k, v.v);
    return renormalized(s, std::move(c));
}

TangentVector log_dir(const CurvatureSpace& s, const Point& x, const Point& q) {
    if (x.c.size() != q.c.size()) throw InvalidInputError("log_dir: dimension mismatch");
    Vec w = subtracted(q.c, x.c);
    w = project_to_tangent(s, x, std::move(w));
    const double n = metric_norm(s, w);
    if (!(n > kDegenerateDistance))
        throw DegenerateInputError("log_dir: coincident points have no direction");
    for (double& e : w) e /= n;
    return TangentVector{x, std::move(w)};
}

TangentVector log_map(const CurvatureSpace& s, const Point& x, const Point& q) {
    Vec w = subtracted(q.c, x.c);
    w = project_to_tangent(s, x, std::move(w));
    const double n = metric_norm(s, w);
    if (n <= kDegenerateDistance) return TangentVector{x, Vec(x.c.size(), 0.0)};
    const double d = distance(s, x, q);
    for (double& e : w) e *= d / n;
    return TangentVector{x, std::move(w)};
}

TangentVector parallel_transport(const CurvatureSpace& s, const TangentVector& u, const Point& y) {
    const Point& x = u.base;
    if (s.euclidean()) return TangentVector{y, u.v};
    if (distance(s, x, y) <= kDegenerateDistance) return TangentVector{y, u.v};
    // Closed form along [x,y]; the component orthogonal to the plane of
    // motion is unchanged and the in-plane part rotates with the geodesic.
    const double k2 = s.k * s.k;
    const double denom = 1.0 - k2 * mink_dot(x.c, y.c);  // = 1 + cosh(k d) > 0
    const double coef = k2 * mink_dot(y.c, u.v) / denom;
    Vec v = u.v;
    axpy(v, coef, x.c);
    axpy(v, coef, y.c);
    v = project_to_tangent(s, y, std::move(v));  // absorb roundoff drift
    return TangentVector{y, std::move(v)};
}

double half_space_cosine(const CurvatureSpace& s, const HalfSpace& h, const Point& q) {
    Vec w = subtracted(q.c, h.base().c);
    w = project_to_tangent(s, h.base(), std::move(w));
    const double n = metric_norm(s, w);
    if (n <= kDegenerateDistance) return 1.0;  // base point belongs to both closed sides
    return metric_dot(s, w, h.normal()) / n;
}

bool half_space_contains(const CurvatureSpace& s, const HalfSpace& h, const Point& q,
                         double eps_angle) {
    if (eps_angle != 0.0) return half_space_cosine(s, h, q) >= -eps_angle;
    // eps = 0 fast path: the sign of <dir to q, v> equals the sign of a single
    // linear form (<q,v>_M for k>0 since <x,v>_M = 0; (q-x).v for k=0).
    if (s.euclidean()) {
        double acc = 0.0;
        const Vec& x = h.base().c;
        const Vec& v = h.normal();
        for (std::size_t i = 0; i < v.size(); ++i) acc += (q.c[i] - x[i]) * v[i];
        return acc >= 0.0;
    }
    return mink_dot(q.c, h.normal()) >= 0.0;
}

double half_space_margin(const CurvatureSpace& s, const HalfSpace& h, const Point& q) {
    if (s.euclidean()) {
        double acc = 0.0;
        const Vec& x = h.base().c;
        const Vec& v = h.normal();
        for (std::size_t i = 0; i < v.size(); ++i) acc += (q.c[i] - x[i]) * v[i];
        return acc;
    }
    return std::asinh(s.k * mink_dot(q.c, h.normal())) / s.k;
}

double dist_point_to_segment(const CurvatureSpace& s, const Point& x, const GeodesicSegment& seg) {
    const double len = distance(s, seg.a, seg.b);
    if (len <= kDegenerateDistance) return distance(s, x, seg.a);
    if (s.euclidean()) {
        const Vec ab = subtracted(seg.b.c, seg.a.c);
        const Vec ax = subtracted(x.c, seg.a.c);
        const double t = std::clamp(dot(ax, ab) / dot(ab, ab), 0.0, 1.0);
        Vec foot = seg.a.c;
        axpy(foot, t, ab);
        return distance(s, x, Point{std::move(foot)});
    }
    // Project x onto the 2-plane spanned by the endpoints. With
    //   p = cosh(k d(x,a)) - 1,  q = cosh(k d(x,b)) - 1,  chi = cosh(k L) - 1
    // (computed through chord forms) the foot of the perpendicular is
    // lam*a + mu*b, and it lies on the segment iff lam, mu >= 0. This stays
    // accurate at coordinate scales where a direct search along exp_map
    // collapses to cancellation.
    const double k2 = s.k * s.k;
    const auto cosh_m1 = [&](const Point& u, const Point& v) {
        double c2 = 0.0;
        const double d0 = u.c[0] - v.c[0];
        c2 = -d0 * d0;
        for (std::size_t i = 1; i < u.c.size(); ++i) {
            const double di = u.c[i] - v.c[i];
            c2 += di * di;
        }
        return 0.5 * k2 * std::max(0.0, c2);
    };
    const double p = cosh_m1(x, seg.a);
    const double q = cosh_m1(x, seg.b);
    const double chi = cosh_m1(seg.a, seg.b);
    const double lam_num = q + chi + q * chi - p;
    const double mu_num = p + chi + p * chi - q;
    if (lam_num < 0.0 || mu_num < 0.0)
        return std::min(distance(s, x, seg.a), distance(s, x, seg.b));
    const double denom = chi * (2.0 + chi);
    const double lam = lam_num / denom;
    const double mu = mu_num / denom;
    Vec perp = x.c;
    axpy(perp, -lam, seg.a.c);
    axpy(perp, -mu, seg.b.c);
    const double perp2 = std::max(0.0, mink_dot(perp, perp));
    return std::asinh(s.k * std::sqrt(perp2)) / s.k;
}

double triangle_angle_sum(const CurvatureSpace& s, const Point& p, const Point& q, const Point& r) {
    if (distance(s, p, q) <= kDegenerateDistance || distance(s, q, r) <= kDegenerateDistance ||
        distance(s, p, r) <= kDegenerateDistance)
        throw DegenerateInputError("triangle_angle_sum: coincident vertices");
    const auto angle = [&](const Point& a, const Point& b, const Point& c) {
        const TangentVector u = log_dir(s, a, b);
        const TangentVector w = log_dir(s, a, c);
        const double cosv = std::clamp(metric_dot(s, u.v, w.v), -1.0, 1.0);
        if (std::abs(cosv) >= 1.0 - 1e-12)
            throw DegenerateInputError("triangle_angle_sum: collinear vertices");
        return std::acos(cosv);
    };
    return angle(p, q, r) + angle(q, r, p) + angle(r, p, q);
}

double blocking_radius(double k) {
    if (!(k > 0.0)) throw InvalidInputError("blocking_radius: requires k > 0");
    return std::log(1.0 + std::sqrt(2.0)) / k;
}

std::vector<Vec> tangent_basis(const CurvatureSpace& s, const Point& x) {
    const int m = s.dim;
    std::vector<Vec> basis;
    basis.reserve(m);
    if (s.euclidean()) {
        for (int i = 0; i < m; ++i) {
            Vec e(m, 0.0);
            e[i] = 1.0;
            basis.push_back(std::move(e));
        }
        return basis;
    }
    const int amb = s.ambient_dim();
    for (int i = 1; i <= amb && static_cast<int>(basis.size()) < m; ++i) {
        const int axis = i % amb;  // spatial axes first, timelike axis last
        Vec e(amb, 0.0);
        e[axis] = 1.0;
        Vec u = project_to_tangent(s, x, std::move(e));
        for (const Vec& b : basis) axpy(u, -mink_dot(u, b), b);
        const double n = metric_norm(s, u);
        if (n > 1e-8) {
            for (double& v : u) v /= n;
            basis.push_back(std::move(u));
        }
    }
    if (static_cast<int>(basis.size()) != m)
        throw NumericalError("tangent_basis: failed to span the tangent space");
    return basis;
}

Vec to_klein(const CurvatureSpace& s, const Point& p) {
    if (s.euclidean()) return p.c;
    Vec u(s.dim);
    for (int i = 0; i < s.dim; ++i) u[i] = p.c[i + 1] / p.c[0];
    return u;
}

Point from_klein(const CurvatureSpace& s, const Vec& u) {
    if (static_cast<int>(u.size()) != s.dim) throw InvalidInputError("from_klein: dimension mismatch");
    if (s.euclidean()) return Point{u};
    const double r2 = dot(u, u);
    if (r2 >= 1.0) throw InvalidInputError("from_klein: coordinates outside the unit ball");
    const double p0 = 1.0 / (s.k * std::sqrt(1.0 - r2));
    Vec c(s.dim + 1);
    c[0] = p0;
    for (int i = 0; i < s.dim; ++i) c[i + 1] = p0 * u[i];
    return renormalized(s, std::move(c));
}

Point geodesic_point(const CurvatureSpace& s, const Point& a, const Point& b, double t) {
    const double len = distance(s, a, b);
    if (len <= kDegenerateDistance) return a;
    return exp_map(s, log_dir(s, a, b), t * len);
}

}  // namespace corecut
