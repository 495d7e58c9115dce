#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "corecut/domain.hpp"
#include "corecut/faircut.hpp"

namespace corecut {

// Monte Carlo estimate of the geodesic traffic density D(x,r): the fraction
// of endpoint pairs (p,q), drawn from the Riemannian volume, whose geodesic
// meets the closed ball B(x,r).
struct TrafficReport {
    Point x;
    double r = 0.0;
    VolumeEstimate density;
    std::int64_t n_pairs = 0;
    std::uint64_t seed = 0;
};

// Closed-ball convention: boundary tangency counts as blocked.
bool is_blocked(const CurvatureSpace& s, const Point& p, const Point& q, const Point& x, double r);

TrafficReport traffic_density(const ConvexDomain& domain, const Point& x, double r,
                              std::int64_t n_pairs, std::uint64_t seed);

// Densities over a radius grid from one shared pair sample, so the profile is
// exactly nondecreasing in r.
std::vector<TrafficReport> traffic_profile(const ConvexDomain& domain, const Point& x,
                                           const std::vector<double>& radii, std::int64_t n_pairs,
                                           std::uint64_t seed);

// Samples q uniformly in H(x, v_p) within the domain (v_p the tangent of
// [p,x] at x) and returns the fraction with d(x,[p,q]) > r + 1e-6. The
// Blocked View Theorem predicts 0 at r = blocking_radius(k).
// r < 0 selects the blocking radius.
double blocked_view_check(const ConvexDomain& domain, const Point& x, const Point& p,
                          std::int64_t n, std::uint64_t seed, double r = -1.0);

struct CongestionCore {
    FairCutResult faircut;
    Point center;
    double radius = 0.0;  // blocking radius of the space
    TrafficReport report;
    bool bound_ok = false;  // density >= 1/(m+1) - 4 std errors
};

// Fair-cut center + blocking radius + measured traffic density through the
// resulting ball. Requires k > 0.
CongestionCore congestion_core(const ConvexDomain& domain, const FairCutOptions& opts = {},
                               std::int64_t n_pairs = kDefaultSamples);

nlohmann::json traffic_report_json(const TrafficReport& rep);

}  // namespace corecut
