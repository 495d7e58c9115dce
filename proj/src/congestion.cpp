#include "corecut/congestion.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "corecut/errors.hpp"

namespace corecut {

bool is_blocked(const CurvatureSpace& s, const Point& p, const Point& q, const Point& x,
                double r) {
    if (!(r > 0.0)) throw InvalidInputError("is_blocked: radius must be > 0");
    return dist_point_to_segment(s, x, GeodesicSegment{p, q}) <= r;
}

namespace {

// Distances from x to the geodesic of each sampled endpoint pair; reused by
// every radius so profiles are exactly monotone.
std::vector<double> pair_distances(const ConvexDomain& domain, const Point& x,
                                   std::int64_t n_pairs, std::uint64_t seed) {
    const CurvatureSpace& s = domain.space();
    if (!domain.contains(x)) throw InvalidInputError("traffic_density: x is outside the domain");
    if (n_pairs < 100) throw InvalidInputError("traffic_density: needs n_pairs >= 100");
    const UniformSampler sampler(domain);
    const std::vector<Point> cloud = sampler.sample_cloud(2 * n_pairs, seed);
    std::vector<double> dists(n_pairs);
    for (std::int64_t i = 0; i < n_pairs; ++i)
        dists[i] = dist_point_to_segment(s, x, GeodesicSegment{cloud[2 * i], cloud[2 * i + 1]});
    return dists;
}

}  // namespace

TrafficReport traffic_density(const ConvexDomain& domain, const Point& x, double r,
                              std::int64_t n_pairs, std::uint64_t seed) {
    if (!(r > 0.0)) throw InvalidInputError("traffic_density: radius must be > 0");
    const std::vector<double> dists = pair_distances(domain, x, n_pairs, seed);
    std::int64_t hits = 0;
    for (double d : dists)
        if (d <= r) ++hits;
    TrafficReport rep;
    rep.x = x;
    rep.r = r;
    rep.density = make_estimate(hits, n_pairs, seed);
    rep.n_pairs = n_pairs;
    rep.seed = seed;
    return rep;
}

std::vector<TrafficReport> traffic_profile(const ConvexDomain& domain, const Point& x,
                                           const std::vector<double>& radii, std::int64_t n_pairs,
                                           std::uint64_t seed) {
    for (double r : radii)
        if (!(r > 0.0)) throw InvalidInputError("traffic_profile: radii must be > 0");
    const std::vector<double> dists = pair_distances(domain, x, n_pairs, seed);
    std::vector<TrafficReport> out;
    out.reserve(radii.size());
    for (double r : radii) {
        std::int64_t hits = 0;
        for (double d : dists)
            if (d <= r) ++hits;
        TrafficReport rep;
        rep.x = x;
        rep.r = r;
        rep.density = make_estimate(hits, n_pairs, seed);
        rep.n_pairs = n_pairs;
        rep.seed = seed;
        out.push_back(std::move(rep));
    }
    return out;
}

double blocked_view_check(const ConvexDomain& domain, const Point& x, const Point& p,
                          std::int64_t n, std::uint64_t seed, double r) {
    const CurvatureSpace& s = domain.space();
    if (distance(s, x, p) <= 1e-12)
        throw DegenerateInputError("blocked_view_check: p coincides with x");
    if (n < 1) throw InvalidInputError("blocked_view_check: needs n >= 1");
    const double r_eff = r < 0.0 ? blocking_radius(s.k) : r;

    // v_p: tangent of [p,x] at x, i.e. the direction opposite to p.
    const TangentVector to_p = log_dir(s, x, p);
    const HalfSpace h = make_half_space(s, x, scaled(to_p.v, -1.0));

    const UniformSampler sampler(domain);
    RngStream rng(derive_seed(seed, "blocked-view"));
    std::int64_t accepted = 0, violating = 0, proposals = 0;
    while (accepted < n) {
        const Point q = sampler.sample(rng);
        ++proposals;
        if (!half_space_contains(s, h, q)) {
            if (proposals > 1'000'000 && accepted < proposals / 10'000)
                throw SamplingError("blocked_view_check: half-space acceptance rate too low");
            continue;
        }
        ++accepted;
        if (dist_point_to_segment(s, x, GeodesicSegment{p, q}) > r_eff + 1e-6) ++violating;
    }
    return static_cast<double>(violating) / static_cast<double>(n);
}

CongestionCore congestion_core(const ConvexDomain& domain, const FairCutOptions& opts,
                               std::int64_t n_pairs) {
    const CurvatureSpace& s = domain.space();
    if (s.euclidean())
        throw UnsupportedError(
            "congestion_core: requires k > 0 (the blocking radius diverges as curvature "
            "approaches 0)");
    CongestionCore core;
    core.faircut = fair_cut_search(domain, opts);
    core.center = core.faircut.center;
    core.radius = blocking_radius(s.k);
    core.report =
        traffic_density(domain, core.center, core.radius, n_pairs, derive_seed(opts.seed, "core-pairs"));
    core.bound_ok = core.report.density.fraction >=
                    1.0 / (s.dim + 1) - 4.0 * core.report.density.std_error;
    return core;
}

nlohmann::json traffic_report_json(const TrafficReport& rep) {
    nlohmann::json j;
    j["x"] = rep.x.c;
    j["r"] = rep.r;
    j["density"] = {{"fraction", rep.density.fraction},
                    {"std_error", rep.density.std_error},
                    {"n_samples", rep.density.n_samples},
                    {"seed", rep.density.seed}};
    j["n_pairs"] = rep.n_pairs;
    j["seed"] = rep.seed;
    return j;
}

}  // namespace corecut
