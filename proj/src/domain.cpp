#include "corecut/domain.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "corecut/errors.hpp"
#include "corecut/json_util.hpp"

namespace corecut {

namespace {

double radial_weight(const CurvatureSpace& s, double r) {
    if (s.dim == 1) return 1.0;
    const double base = s.euclidean() ? r : std::sinh(s.k * r) / s.k;
    return std::pow(base, s.dim - 1);
}

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double fm, double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, fa, m, fm, flm, left, 0.5 * eps, depth - 1) +
           simpson_rec(f, m, fm, b, fb, frm, right, 0.5 * eps, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double eps) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, fa, b, fb, fm, whole, eps, 40);
}

// Exit parameter of the ray exp(c, u, t) from the membership region, found by
// doubling then 60 bisection steps. inside(0) must hold.
double ray_exit(const CurvatureSpace& s, const TangentVector& u, double cap,
                const std::function<bool(const Point&)>& inside) {
    double lo = 0.0, hi = std::min(1.0, cap);
    while (inside(exp_map(s, u, hi))) {
        lo = hi;
        hi *= 2.0;
        if (hi > cap)
            throw InvalidInputError("ray_exit: region not bounded within the search cap");
    }
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (inside(exp_map(s, u, mid)) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

VolumeEstimate make_estimate(std::int64_t hits, std::int64_t n, std::uint64_t seed) {
    VolumeEstimate e;
    e.fraction = n > 0 ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
    e.std_error = n > 0 ? std::sqrt(e.fraction * (1.0 - e.fraction) / static_cast<double>(n)) : 0.0;
    e.n_samples = n;
    e.seed = seed;
    return e;
}

bool ConvexDomain::contains(const Point& p) const {
    if (static_cast<int>(p.c.size()) != space_.ambient_dim())
        throw InvalidInputError("ConvexDomain::contains: dimension mismatch");
    if (const Ball* b = std::get_if<Ball>(&shape_))
        return distance(space_, b->center, p) <= b->radius;
    if (const Polytope* poly = std::get_if<Polytope>(&shape_)) {
        for (const HalfSpace& f : poly->faces)
            if (!half_space_contains(space_, f, p)) return false;
        return true;
    }
    // Simplex: barycentric test in Klein coordinates, where geodesic convexity
    // is Euclidean convexity.
    const Vec u = to_klein(space_, p);
    const int m = space_.dim;
    Vec rhs(m);
    for (int i = 0; i < m; ++i) rhs[i] = u[i] - klein_v0_[i];
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        double lam = 0.0;
        for (int j = 0; j < m; ++j) lam += bary_inv_[i * m + j] * rhs[j];
        if (lam < -1e-12) return false;
        sum += lam;
    }
    return sum <= 1.0 + 1e-12;
}

ConvexDomain make_ball(const CurvatureSpace& s, Point center, double radius) {
    validate_space(s);
    if (!(radius > 0.0)) throw InvalidInputError("make_ball: radius must be > 0");
    if (!point_on_model(s, center, 1e-6)) throw InvalidInputError("make_ball: invalid center");
    ConvexDomain d;
    d.space_ = s;
    d.bounding_ = Ball{center, radius};
    d.probe_center_ = center;
    d.shape_ = Ball{std::move(center), radius};
    return d;
}

ConvexDomain make_polytope(const CurvatureSpace& s, std::vector<HalfSpace> faces, Point witness,
                           double bounding_radius) {
    validate_space(s);
    if (faces.empty()) throw InvalidInputError("make_polytope: needs at least one face");
    for (const HalfSpace& f : faces) {
        if (!point_on_model(s, f.base(), 1e-6)) throw InvalidInputError("make_polytope: face base off model");
        if (std::abs(metric_norm(s, f.normal()) - 1.0) > 1e-6)
            throw InvalidInputError("make_polytope: face normal is not unit length");
    }
    ConvexDomain d;
    d.space_ = s;
    const auto member = [&](const Point& p) {
        for (const HalfSpace& f : faces)
            if (!half_space_contains(s, f, p)) return false;
        return true;
    };
    if (!member(witness)) throw InvalidInputError("make_polytope: witness point is not inside");
    if (bounding_radius <= 0.0) {
        // Circumradius around the witness by ray shooting over a deterministic
        // direction set, padded for the angular gaps between rays.
        const double cap = s.euclidean() ? 1e6 : 80.0 / s.k;
        const int n_dirs = s.dim == 2 ? 512 : (s.dim == 3 ? 2048 : 4096);
        const std::vector<Vec> basis = tangent_basis(s, witness);
        RngStream rng(derive_seed(0x9d6f3b1c0a5e417dULL, "polytope-bounding"));
        double max_t = 0.0;
        for (int i = 0; i < n_dirs; ++i) {
            Vec dir(witness.c.size(), 0.0);
            if (s.dim == 2) {
                const double th = 6.283185307179586 * i / n_dirs;
                axpy(dir, std::cos(th), basis[0]);
                axpy(dir, std::sin(th), basis[1]);
            } else {
                double g2 = 0.0;
                Vec g(s.dim);
                do {
                    g2 = 0.0;
                    for (int a = 0; a < s.dim; ++a) {
                        g[a] = rng.gaussian();
                        g2 += g[a] * g[a];
                    }
                } while (g2 < 1e-12);
                for (int a = 0; a < s.dim; ++a) axpy(dir, g[a] / std::sqrt(g2), basis[a]);
            }
            const TangentVector u{witness, std::move(dir)};
            try {
                max_t = std::max(max_t, ray_exit(s, u, cap, member));
            } catch (const InvalidInputError&) {
                throw InvalidInputError(
                    "make_polytope: the face intersection is unbounded along some direction "
                    "(hyperbolic half-spaces beyond the blocking radius leave ideal gaps); add "
                    "faces or pass an explicit bounding_radius");
            }
        }
        bounding_radius = 1.2 * max_t + 0.5 / (s.euclidean() ? 1.0 : s.k);
    }
    d.bounding_ = Ball{witness, bounding_radius};
    d.probe_center_ = witness;
    d.shape_ = Polytope{std::move(faces), std::move(witness)};
    return d;
}

ConvexDomain make_simplex(const CurvatureSpace& s, std::vector<Point> vertices) {
    validate_space(s);
    const int m = s.dim;
    if (static_cast<int>(vertices.size()) != m + 1)
        throw InvalidInputError("make_simplex: needs dim+1 vertices");
    for (const Point& p : vertices)
        if (!point_on_model(s, p, 1e-6)) throw InvalidInputError("make_simplex: vertex off model");

    std::vector<Vec> klein(vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i) klein[i] = to_klein(s, vertices[i]);

    // Edge matrix (columns v_i - v_0); its inverse yields barycentric weights.
    std::vector<double> a(m * m);
    for (int col = 0; col < m; ++col)
        for (int row = 0; row < m; ++row) a[row * m + col] = klein[col + 1][row] - klein[0][row];
    std::vector<double> inv(m * m);
    for (int col = 0; col < m; ++col) {
        std::vector<double> e(m, 0.0), x;
        e[col] = 1.0;
        if (!solve_linear(a, m, e, x))
            throw DegenerateInputError("make_simplex: vertices are affinely dependent");
        for (int row = 0; row < m; ++row) inv[row * m + col] = x[row];
    }

    Vec bary(m, 0.0);
    for (const Vec& u : klein)
        for (int i = 0; i < m; ++i) bary[i] += u[i] / (m + 1);
    Point center = from_klein(s, bary);
    double radius = 0.0;
    for (const Point& p : vertices) radius = std::max(radius, distance(s, center, p));
    radius = radius * (1.0 + 1e-9) + 1e-12;

    ConvexDomain d;
    d.space_ = s;
    d.bounding_ = Ball{center, radius};
    d.probe_center_ = std::move(center);
    d.klein_v0_ = klein[0];
    d.bary_inv_ = std::move(inv);
    d.shape_ = Simplex{std::move(vertices)};
    if (!d.contains(d.probe_center_))
        throw NumericalError("make_simplex: barycenter failed the membership oracle");
    return d;
}

// ---------------------------------------------------------------------------
// JSON

ConvexDomain domain_from_json(const nlohmann::json& j) {
    check_allowed_keys(j, {"dim", "k", "shape"}, "domain");
    require_key(j, "dim", "domain");
    require_key(j, "k", "domain");
    require_key(j, "shape", "domain");
    CurvatureSpace s;
    s.dim = j.at("dim").get<int>();
    s.k = j.at("k").get<double>();
    validate_space(s);
    const nlohmann::json& sh = j.at("shape");
    require_key(sh, "type", "domain.shape");
    const std::string type = sh.at("type").get<std::string>();
    if (type == "ball") {
        check_allowed_keys(sh, {"type", "center", "radius"}, "domain.shape");
        require_key(sh, "center", "domain.shape");
        require_key(sh, "radius", "domain.shape");
        return make_ball(s, make_point(s, vec_from_json(sh.at("center"), "ball.center")),
                         sh.at("radius").get<double>());
    }
    if (type == "simplex") {
        check_allowed_keys(sh, {"type", "vertices"}, "domain.shape");
        require_key(sh, "vertices", "domain.shape");
        std::vector<Point> verts;
        for (const auto& v : sh.at("vertices"))
            verts.push_back(make_point(s, vec_from_json(v, "simplex.vertex")));
        return make_simplex(s, std::move(verts));
    }
    if (type == "polytope") {
        check_allowed_keys(sh, {"type", "faces", "witness", "bounding_radius"}, "domain.shape");
        require_key(sh, "faces", "domain.shape");
        require_key(sh, "witness", "domain.shape");
        std::vector<HalfSpace> faces;
        for (const auto& f : sh.at("faces")) {
            check_allowed_keys(f, {"base", "normal"}, "polytope.face");
            require_key(f, "base", "polytope.face");
            require_key(f, "normal", "polytope.face");
            const Point base = make_point(s, vec_from_json(f.at("base"), "face.base"));
            faces.push_back(make_half_space(s, base, vec_from_json(f.at("normal"), "face.normal")));
        }
        const Point witness = make_point(s, vec_from_json(sh.at("witness"), "polytope.witness"));
        const double br = sh.value("bounding_radius", 0.0);
        return make_polytope(s, std::move(faces), witness, br);
    }
    throw ParseError("domain.shape: unknown type \"" + type + "\"");
}

nlohmann::json domain_to_json(const ConvexDomain& d) {
    nlohmann::json j;
    j["dim"] = d.space().dim;
    j["k"] = d.space().k;
    nlohmann::json sh;
    if (const Ball* b = std::get_if<Ball>(&d.shape())) {
        sh["type"] = "ball";
        sh["center"] = b->center.c;
        sh["radius"] = b->radius;
    } else if (const Polytope* p = std::get_if<Polytope>(&d.shape())) {
        sh["type"] = "polytope";
        nlohmann::json faces = nlohmann::json::array();
        for (const HalfSpace& f : p->faces)
            faces.push_back({{"base", f.base().c}, {"normal", f.normal()}});
        sh["faces"] = std::move(faces);
        sh["witness"] = p->witness.c;
        sh["bounding_radius"] = d.bounding_radius();
    } else {
        const Simplex& sx = std::get<Simplex>(d.shape());
        sh["type"] = "simplex";
        nlohmann::json verts = nlohmann::json::array();
        for (const Point& v : sx.vertices) verts.push_back(v.c);
        sh["vertices"] = std::move(verts);
    }
    j["shape"] = std::move(sh);
    return j;
}

// ---------------------------------------------------------------------------
// Sampling

UniformSampler::UniformSampler(const ConvexDomain& domain)
    : domain_(domain),
      center_(domain.bounding_ball().center),
      radius_(domain.bounding_ball().radius),
      basis_(tangent_basis(domain.space(), center_)) {
    const CurvatureSpace& s = domain_.space();
    const int knots = 4096;
    cdf_.resize(knots + 1);
    dens_.resize(knots + 1);
    const double h = radius_ / knots;
    cdf_[0] = 0.0;
    dens_[0] = radial_weight(s, 0.0);
    for (int i = 0; i < knots; ++i) {
        const double a = i * h, b = a + h;
        const double fm = radial_weight(s, 0.5 * (a + b));
        dens_[i + 1] = radial_weight(s, b);
        cdf_[i + 1] = cdf_[i] + h / 6.0 * (dens_[i] + 4.0 * fm + dens_[i + 1]);
    }
    const double total = cdf_.back();
    if (!(total > 0.0)) throw NumericalError("UniformSampler: degenerate radial measure");
    for (double& c : cdf_) c /= total;
    for (double& w : dens_) w /= total;
}

double UniformSampler::radial_cdf(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= radius_) return 1.0;
    const double pos = s / radius_ * (cdf_.size() - 1);
    const int i = std::min<int>(static_cast<int>(pos), cdf_.size() - 2);
    const double h = radius_ / (cdf_.size() - 1);
    const double si = i * h;
    // trapezoid within the knot interval
    const double w = radial_weight(domain_.space(), s) / radial_weight(domain_.space(), radius_) *
                     dens_.back();
    return cdf_[i] + 0.5 * (dens_[i] + w) * (s - si);
}

double UniformSampler::invert_radial(double u) const {
    const int knots = cdf_.size() - 1;
    const double h = radius_ / knots;
    int lo = 0, hi = knots;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (cdf_[mid] <= u ? lo : hi) = mid;
    }
    const double span = cdf_[hi] - cdf_[lo];
    double s = lo * h + (span > 0.0 ? (u - cdf_[lo]) / span * h : 0.5 * h);
    // two Newton corrections against the trapezoid CDF within the interval
    const CurvatureSpace& sp = domain_.space();
    const double zfac = dens_.back() / radial_weight(sp, radius_);
    for (int it = 0; it < 2; ++it) {
        const double w = radial_weight(sp, s) * zfac;
        if (w < 1e-300) break;
        const double f = cdf_[lo] + 0.5 * (dens_[lo] + w) * (s - lo * h);
        s -= (f - u) / w;
        s = std::clamp(s, lo * h, hi * h);
    }
    return std::clamp(s, 0.0, radius_);
}

Point UniformSampler::propose(RngStream& rng) const {
    const CurvatureSpace& s = domain_.space();
    const double r = invert_radial(rng.uniform());
    const int m = s.dim;
    Vec dir(center_.c.size(), 0.0);
    double g2 = 0.0;
    do {
        std::fill(dir.begin(), dir.end(), 0.0);
        g2 = 0.0;
        for (int a = 0; a < m; ++a) {
            const double g = rng.gaussian();
            g2 += g * g;
            axpy(dir, g, basis_[a]);
        }
    } while (g2 < 1e-12);
    const double inv = 1.0 / std::sqrt(g2);
    for (double& e : dir) e *= inv;
    return exp_map(s, TangentVector{center_, std::move(dir)}, r);
}

Point UniformSampler::sample(RngStream& rng) const {
    for (std::int64_t tries = 1; tries <= 10'000'000; ++tries) {
        Point p = propose(rng);
        if (domain_.contains(p)) return p;
        if (tries % 1'000'000 == 0)
            throw SamplingError("sample_uniform: acceptance rate below 1e-4 over 1e6 proposals; "
                                "domain too thin relative to its bounding ball");
    }
    throw SamplingError("sample_uniform: domain too thin");
}

std::vector<Point> UniformSampler::sample_cloud(std::int64_t n, std::uint64_t seed) const {
    if (n < 0) throw InvalidInputError("sample_cloud: negative sample count");
    std::vector<Point> cloud(n);
    const std::int64_t n_chunks = (n + kSampleChunk - 1) / kSampleChunk;
    const auto run_chunk = [&](std::int64_t ci) {
        RngStream rng(derive_seed(seed, static_cast<std::uint64_t>(ci)));
        const std::int64_t begin = ci * kSampleChunk;
        const std::int64_t end = std::min(n, begin + kSampleChunk);
        std::int64_t proposals = 0, accepted = 0;
        for (std::int64_t i = begin; i < end;) {
            Point p = propose(rng);
            ++proposals;
            if (domain_.contains(p)) {
                cloud[i++] = std::move(p);
                ++accepted;
            } else if (proposals >= 1'000'000 &&
                       accepted < static_cast<std::int64_t>(1e-4 * proposals)) {
                throw SamplingError("sample_cloud: acceptance rate below 1e-4 over 1e6 proposals; "
                                    "domain too thin relative to its bounding ball");
            }
        }
    };
    const int threads = std::min<std::int64_t>(thread_count(), n_chunks);
    if (threads <= 1) {
        for (std::int64_t ci = 0; ci < n_chunks; ++ci) run_chunk(ci);
        return cloud;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            try {
                for (std::int64_t ci = next.fetch_add(1); ci < n_chunks; ci = next.fetch_add(1))
                    run_chunk(ci);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (err) std::rethrow_exception(err);
    return cloud;
}

Point sample_uniform(const ConvexDomain& domain, RngStream& rng) {
    return UniformSampler(domain).sample(rng);
}

VolumeEstimate volume_fraction(const ConvexDomain& domain,
                               const std::function<bool(const Point&)>& predicate, std::int64_t n,
                               std::uint64_t seed) {
    if (n < 100) throw InvalidInputError("volume_fraction: needs n >= 100");
    const UniformSampler sampler(domain);
    const std::vector<Point> cloud = sampler.sample_cloud(n, seed);
    std::int64_t hits = 0;
    for (const Point& p : cloud)
        if (predicate(p)) ++hits;
    return make_estimate(hits, n, seed);
}

// ---------------------------------------------------------------------------
// Exact planar cuts

namespace {

double shoelace_area(const std::vector<std::array<double, 2>>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        s += a[0] * b[1] - b[0] * a[1];
    }
    return 0.5 * std::abs(s);
}

}  // namespace

double exact_cut_fraction_2d(const std::vector<std::array<double, 2>>& polygon,
                             const std::array<double, 2>& x, const std::array<double, 2>& v) {
    if (polygon.size() < 3) throw DegenerateInputError("exact_cut_fraction_2d: not a polygon");
    const double vn = std::hypot(v[0], v[1]);
    if (!(vn > 0.0)) throw DegenerateInputError("exact_cut_fraction_2d: zero direction");
    const double total = shoelace_area(polygon);
    if (!(total > 1e-300)) throw DegenerateInputError("exact_cut_fraction_2d: degenerate polygon");
    const auto side = [&](const std::array<double, 2>& p) {
        return (p[0] - x[0]) * v[0] + (p[1] - x[1]) * v[1];
    };
    std::vector<std::array<double, 2>> kept;
    kept.reserve(polygon.size() + 2);
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const auto& a = polygon[i];
        const auto& b = polygon[(i + 1) % polygon.size()];
        const double sa = side(a), sb = side(b);
        if (sa >= 0.0) kept.push_back(a);
        if ((sa < 0.0) != (sb < 0.0)) {
            const double t = sa / (sa - sb);
            kept.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
        }
    }
    if (kept.size() < 3) return 0.0;
    return shoelace_area(kept) / total;
}

double exact_cut_fraction_2d(const ConvexDomain& domain, const Point& x, const Vec& v) {
    if (!domain.space().euclidean() || domain.space().dim != 2)
        throw InvalidInputError("exact_cut_fraction_2d: requires k=0, m=2");
    const Simplex* sx = std::get_if<Simplex>(&domain.shape());
    if (!sx) throw InvalidInputError("exact_cut_fraction_2d: requires a simplex domain");
    std::vector<std::array<double, 2>> poly;
    for (const Point& p : sx->vertices) poly.push_back({p.c[0], p.c[1]});
    return exact_cut_fraction_2d(poly, {x.c[0], x.c[1]}, {v[0], v[1]});
}

// ---------------------------------------------------------------------------
// Ball volumes

double unit_sphere_area(int m) {
    if (m < 1) throw InvalidInputError("unit_sphere_area: dimension must be >= 1");
    return 2.0 * std::pow(3.14159265358979323846, 0.5 * m) / std::tgamma(0.5 * m);
}

double ball_volume(const CurvatureSpace& s, double R) {
    validate_space(s);
    if (!(R > 0.0)) throw InvalidInputError("ball_volume: radius must be > 0");
    if (s.euclidean())
        return std::pow(3.14159265358979323846, 0.5 * s.dim) / std::tgamma(0.5 * s.dim + 1.0) *
               std::pow(R, s.dim);
    const auto w = [&](double r) { return radial_weight(s, r); };
    const double shell = adaptive_simpson(w, 0.0, R, 1e-13 * std::max(1.0, radial_weight(s, R) * R));
    return unit_sphere_area(s.dim) * shell;
}

}  // namespace corecut
