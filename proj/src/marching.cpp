#include "corecut/marching.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "corecut/errors.hpp"

namespace corecut {

namespace {

// Acklam's rational approximation of the standard normal quantile,
// |error| < 1.15e-9; plenty for spreading probe directions.
double inv_norm_cdf(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    p = std::clamp(p, 1e-12, 1.0 - 1e-12);
    if (p < 0.02425) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - 0.02425) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Evenly spread unit directions in basis coordinates: equally spaced angles
// for m=2, a Kronecker low-discrepancy sequence mapped through the normal
// quantile for m>=3.
std::vector<Vec> spread_directions(int m, int count) {
    std::vector<Vec> dirs;
    dirs.reserve(count);
    if (m == 2) {
        for (int i = 0; i < count; ++i) {
            const double th = 6.283185307179586 * i / count;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
        return dirs;
    }
    // generalized golden ratio: root > 1 of x^(m+1) = x + 1
    double phi = 1.5;
    for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (m + 1));
    std::vector<double> alpha(m);
    for (int a = 0; a < m; ++a) alpha[a] = std::pow(1.0 / phi, a + 1);
    for (int i = 0; i < count; ++i) {
        Vec g(m);
        double g2 = 0.0;
        for (int a = 0; a < m; ++a) {
            double u = 0.5 + alpha[a] * (i + 1);
            u -= std::floor(u);
            g[a] = inv_norm_cdf(u);
            g2 += g[a] * g[a];
        }
        if (g2 < 1e-12) {
            g.assign(m, 0.0);
            g[0] = 1.0;
            g2 = 1.0;
        }
        const double inv = 1.0 / std::sqrt(g2);
        for (double& e : g) e *= inv;
        dirs.push_back(std::move(g));
    }
    return dirs;
}

struct MarchFrame {
    Point pos;
    Vec tangent;  // unit tangent of the marching geodesic at pos
};

// Frame of the marching geodesic exp(x1, v1, t); the transported direction is
// the geodesic's own tangent.
MarchFrame frame_at(const CurvatureSpace& s, const Point& x1, const TangentVector& v1, double t) {
    if (s.euclidean()) {
        Vec c = x1.c;
        axpy(c, t, v1.v);
        return {Point{std::move(c)}, v1.v};
    }
    const double kt = s.k * t;
    Vec c = scaled(x1.c, std::cosh(kt));
    axpy(c, std::sinh(kt) / s.k, v1.v);
    Point pos = renormalized(s, std::move(c));
    Vec w = scaled(x1.c, s.k * std::sinh(kt));
    axpy(w, std::cosh(kt), v1.v);
    w = project_to_tangent(s, pos, std::move(w));
    const double n = metric_norm(s, w);
    for (double& e : w) e /= n;
    return {std::move(pos), std::move(w)};
}

// Count of cloud points in the trailing half-space H(pos, -tangent).
std::int64_t trailing_count(const CurvatureSpace& s, const MarchFrame& f,
                            const std::vector<Point>& cloud) {
    std::int64_t hits = 0;
    if (s.euclidean()) {
        const std::size_t d = f.tangent.size();
        for (const Point& q : cloud) {
            double acc = 0.0;
            for (std::size_t i = 0; i < d; ++i) acc += (q.c[i] - f.pos.c[i]) * (-f.tangent[i]);
            if (acc >= 0.0) ++hits;
        }
        return hits;
    }
    for (const Point& q : cloud)
        if (-mink_dot(q.c, f.tangent) >= 0.0) ++hits;
    return hits;
}

MarchedHalfSpace march_once_on_cloud(const ConvexDomain& domain, const Point& x1,
                                     const TangentVector& v1, double threshold,
                                     const std::vector<Point>& cloud, std::uint64_t seed) {
    const CurvatureSpace& s = domain.space();
    if (!(threshold > 0.0 && threshold < 1.0))
        throw InvalidInputError("march_once: threshold must lie in (0,1)");
    if (std::abs(metric_norm(s, v1.v) - 1.0) > 1e-6)
        throw InvalidInputError("march_once: direction is not unit length");
    const double eps_in = std::min(1e-4, 1e-4 * domain.bounding_radius());
    if (!domain.contains(exp_map(s, v1, eps_in)))
        throw InvalidInputError("march_once: direction does not point inward");

    const std::int64_t n = static_cast<std::int64_t>(cloud.size());
    const double chord = boundary_exit(domain, v1);
    const auto frac = [&](double t) {
        return static_cast<double>(trailing_count(s, frame_at(s, x1, v1, t), cloud)) / n;
    };

    bool saturated = false;
    double lo = 0.0, hi = chord;
    if (frac(chord) < threshold) {
        saturated = true;
        lo = hi = chord;
    } else if (frac(0.0) >= threshold) {
        lo = hi = 0.0;
    } else {
        for (int i = 0; i < 40; ++i) {
            const double mid = 0.5 * (lo + hi);
            (frac(mid) >= threshold ? hi : lo) = mid;
        }
    }
    const double t_star = 0.5 * (lo + hi);
    MarchFrame f = frame_at(s, x1, v1, t_star);
    const std::int64_t hits = trailing_count(s, f, cloud);
    Vec trailing = scaled(f.tangent, -1.0);
    MarchedHalfSpace out;
    out.hs = make_half_space(s, f.pos, std::move(trailing));
    out.fraction = make_estimate(hits, n, seed);
    out.t_star = t_star;
    out.saturated = saturated;
    return out;
}

}  // namespace

bool MarchRegion::contains(const Point& p) const {
    for (const MarchedHalfSpace& m : excluded)
        if (half_space_contains(space, m.hs, p)) return false;
    return true;
}

double boundary_exit(const ConvexDomain& domain, const TangentVector& ray) {
    const CurvatureSpace& s = domain.space();
    if (!domain.contains(ray.base)) throw InvalidInputError("boundary_exit: base point outside domain");
    const double cap = 4.0 * domain.bounding_radius() + 1.0;
    double lo = 0.0, hi = std::min(0.25 * domain.bounding_radius() + 1e-6, cap);
    while (domain.contains(exp_map(s, ray, hi))) {
        lo = hi;
        hi *= 2.0;
        if (hi > cap) {
            hi = cap;
            if (domain.contains(exp_map(s, ray, hi)))
                throw NumericalError("boundary_exit: ray did not leave the bounding region");
            break;
        }
    }
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (domain.contains(exp_map(s, ray, mid)) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

MarchedHalfSpace march_once(const ConvexDomain& domain, const Point& x1, const TangentVector& v1,
                            double threshold, std::int64_t n, std::uint64_t seed) {
    if (n < 100) throw InvalidInputError("march_once: needs n >= 100");
    const UniformSampler sampler(domain);
    const std::vector<Point> cloud = sampler.sample_cloud(n, derive_seed(seed, "march-cloud"));
    return march_once_on_cloud(domain, x1, v1, threshold, cloud, seed);
}

MarchRegion march_region(const ConvexDomain& domain, int n_probes, double threshold,
                         std::int64_t n, std::uint64_t seed) {
    const CurvatureSpace& s = domain.space();
    if (n_probes < 1) throw InvalidInputError("march_region: needs at least one probe");
    if (n < 100) throw InvalidInputError("march_region: needs n >= 100");

    const Point& c = domain.probe_center();
    const std::vector<Vec> basis = tangent_basis(s, c);
    const std::vector<Vec> dirs = spread_directions(s.dim, n_probes);

    const UniformSampler sampler(domain);
    const std::vector<Point> cloud = sampler.sample_cloud(n, derive_seed(seed, "march-cloud"));

    MarchRegion region;
    region.space = s;
    region.threshold = threshold;
    for (const Vec& d : dirs) {
        Vec dir(c.c.size(), 0.0);
        for (int a = 0; a < s.dim; ++a) axpy(dir, d[a], basis[a]);
        const TangentVector ray{c, std::move(dir)};
        const double t_exit = boundary_exit(domain, ray);
        // step back inside the membership oracle
        double t1 = std::max(0.0, t_exit - 1e-6);
        while (t1 > 0.0 && !domain.contains(exp_map(s, ray, t1))) t1 = std::max(0.0, t1 - 1e-6);
        const Point x1 = exp_map(s, ray, t1);
        if (distance(s, x1, c) <= 1e-9) continue;  // degenerate probe, domain too small
        const TangentVector inward = log_dir(s, x1, c);
        region.excluded.push_back(march_once_on_cloud(domain, x1, inward, threshold, cloud, seed));
    }

    std::int64_t inside = 0;
    for (const Point& q : cloud)
        if (region.contains(q)) ++inside;
    if (inside == 0)
        throw SamplingError("march_region: empty region; use threshold 1/(m+1) and more samples");
    return region;
}

RegionSummary region_summary(const MarchRegion& region, const ConvexDomain& domain, std::int64_t n,
                             std::uint64_t seed) {
    const CurvatureSpace& s = domain.space();
    if (n < 100) throw InvalidInputError("region_summary: needs n >= 100");
    const UniformSampler sampler(domain);
    const std::vector<Point> cloud = sampler.sample_cloud(n, derive_seed(seed, "region-summary"));
    std::vector<const Point*> accepted;
    for (const Point& q : cloud)
        if (region.contains(q)) accepted.push_back(&q);
    if (accepted.empty())
        throw SamplingError("region_summary: no accepted samples; region appears empty");

    RegionSummary out;
    out.volume_fraction = make_estimate(static_cast<std::int64_t>(accepted.size()), n, seed);
    out.n_accepted = static_cast<std::int64_t>(accepted.size());

    // Riemannian mean: incremental midpoints, then a few fixed-point steps.
    Point mean = *accepted[0];
    for (std::size_t i = 1; i < accepted.size(); ++i)
        mean = geodesic_point(s, mean, *accepted[i], 1.0 / static_cast<double>(i + 1));
    const std::size_t n_polish = std::min<std::size_t>(accepted.size(), 4096);
    for (int it = 0; it < 32; ++it) {
        Vec g(mean.c.size(), 0.0);
        for (std::size_t i = 0; i < n_polish; ++i)
            axpy(g, 1.0 / static_cast<double>(n_polish), log_map(s, mean, *accepted[i]).v);
        const double gn = metric_norm(s, g);
        if (gn < 1e-9 * (1.0 + domain.bounding_radius())) break;
        for (double& e : g) e /= gn;
        mean = exp_map(s, TangentVector{mean, std::move(g)}, gn);
    }
    out.sample_centroid = std::move(mean);

    const std::size_t cap = std::min<std::size_t>(accepted.size(), 512);
    double diam = 0.0;
    for (std::size_t i = 0; i < cap; ++i)
        for (std::size_t j = i + 1; j < cap; ++j)
            diam = std::max(diam, distance(s, *accepted[i], *accepted[j]));
    out.diameter_estimate = diam;
    return out;
}

nlohmann::json region_report_json(const MarchRegion& region, const RegionSummary& summary) {
    nlohmann::json j;
    j["threshold"] = region.threshold;
    nlohmann::json ex = nlohmann::json::array();
    for (const MarchedHalfSpace& m : region.excluded) {
        ex.push_back({{"base", m.hs.base().c},
                      {"normal", m.hs.normal()},
                      {"fraction", m.fraction.fraction},
                      {"std_error", m.fraction.std_error},
                      {"t_star", m.t_star},
                      {"saturated", m.saturated}});
    }
    j["excluded_half_spaces"] = std::move(ex);
    j["volume_fraction"] = summary.volume_fraction.fraction;
    j["volume_fraction_std_error"] = summary.volume_fraction.std_error;
    j["n_accepted"] = summary.n_accepted;
    j["sample_centroid"] = summary.sample_centroid.c;
    j["diameter_estimate"] = summary.diameter_estimate;
    return j;
}

}  // namespace corecut
