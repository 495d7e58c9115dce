#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "corecut/domain.hpp"

namespace corecut {

struct MarchedHalfSpace {
    HalfSpace hs;
    VolumeEstimate fraction;  // measured cut fraction of hs within the domain
    double t_star = 0.0;      // arc length marched from the boundary start
    bool saturated = false;   // fraction never reached the threshold along the chord
};

// Implicit region left after excluding every marched-over half-space. Any
// fair-cut center lies inside (half-spaces below the 1/(m+1) fraction cannot
// contain one).
struct MarchRegion {
    CurvatureSpace space;
    double threshold = 0.0;
    std::vector<MarchedHalfSpace> excluded;

    bool contains(const Point& p) const;
};

inline double default_march_threshold(int dim) { return 1.0 / (dim + 1); }

// Exit arc length of the ray exp(base, ray, t) from the domain; base must be
// inside.
double boundary_exit(const ConvexDomain& domain, const TangentVector& ray);

// Marches from the boundary point x1 along the inward unit direction v1 until
// the trailing half-space H(g(t), -v(t)) reaches the target volume fraction
// (bisection over one shared sample set, which makes the fraction exactly
// monotone in t). Saturates at the far end of the chord if the fraction never
// reaches the threshold.
MarchedHalfSpace march_once(const ConvexDomain& domain, const Point& x1, const TangentVector& v1,
                            double threshold, std::int64_t n, std::uint64_t seed);

// Runs march_once from n_probes boundary points (found by geodesic ray
// shooting from the probe center along an evenly spread direction set) and
// returns the region excluding all marched half-spaces.
MarchRegion march_region(const ConvexDomain& domain, int n_probes, double threshold,
                         std::int64_t n, std::uint64_t seed);

struct RegionSummary {
    VolumeEstimate volume_fraction;  // share of the domain volume inside the region
    Point sample_centroid;           // Riemannian mean of accepted samples
    double diameter_estimate = 0.0;
    std::int64_t n_accepted = 0;
};

RegionSummary region_summary(const MarchRegion& region, const ConvexDomain& domain, std::int64_t n,
                             std::uint64_t seed);

nlohmann::json region_report_json(const MarchRegion& region, const RegionSummary& summary);

}  // namespace corecut
