#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "corecut/geometry.hpp"
#include "corecut/rng.hpp"

namespace corecut {

inline constexpr std::int64_t kDefaultSamples = 100000;
inline constexpr std::int64_t kSampleChunk = 4096;

// Bernoulli Monte Carlo estimate. std_error = sqrt(f (1-f) / n).
struct VolumeEstimate {
    double fraction = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
};

VolumeEstimate make_estimate(std::int64_t hits, std::int64_t n, std::uint64_t seed);

struct Ball {
    Point center;
    double radius = 0.0;
};

struct Polytope {
    std::vector<HalfSpace> faces;
    Point witness;  // interior point, required (emptiness testing is otherwise hard)
};

struct Simplex {
    std::vector<Point> vertices;  // m+1 points, affinely independent in Klein coordinates
};

// Compact convex region with a membership oracle, a bounding ball, and a
// probe point known to be inside.
class ConvexDomain {
public:
    using Shape = std::variant<Ball, Polytope, Simplex>;

    const CurvatureSpace& space() const { return space_; }
    const Shape& shape() const { return shape_; }
    const Ball& bounding_ball() const { return bounding_; }
    double bounding_radius() const { return bounding_.radius; }
    const Point& probe_center() const { return probe_center_; }

    bool contains(const Point& p) const;

    friend ConvexDomain make_ball(const CurvatureSpace&, Point, double);
    friend ConvexDomain make_polytope(const CurvatureSpace&, std::vector<HalfSpace>, Point, double);
    friend ConvexDomain make_simplex(const CurvatureSpace&, std::vector<Point>);

private:
    CurvatureSpace space_;
    Shape shape_{Ball{}};
    Ball bounding_;
    Point probe_center_;
    // Simplex membership cache: Klein vertex 0 and the inverse edge matrix.
    Vec klein_v0_;
    std::vector<double> bary_inv_;  // row-major dim x dim
};

ConvexDomain make_ball(const CurvatureSpace& s, Point center, double radius);

// bounding_radius <= 0 requests automatic bounding via ray shooting from the
// witness (padded); pass an explicit radius to override.
ConvexDomain make_polytope(const CurvatureSpace& s, std::vector<HalfSpace> faces, Point witness,
                           double bounding_radius = 0.0);

ConvexDomain make_simplex(const CurvatureSpace& s, std::vector<Point> vertices);

ConvexDomain domain_from_json(const nlohmann::json& j);
nlohmann::json domain_to_json(const ConvexDomain& d);

// Draws uniformly w.r.t. the Riemannian volume form: radial inverse-CDF with
// density sinh^{m-1}(k s) (s^{m-1} for k=0) inside the bounding ball, uniform
// tangent direction, rejection on membership.
class UniformSampler {
public:
    explicit UniformSampler(const ConvexDomain& domain);

    const ConvexDomain& domain() const { return domain_; }

    // One accepted sample from the caller's stream.
    Point sample(RngStream& rng) const;

    // n accepted samples in fixed-size chunks with per-chunk derived seeds;
    // bit-identical for a given seed regardless of thread count.
    std::vector<Point> sample_cloud(std::int64_t n, std::uint64_t seed) const;

    double radial_cdf(double s) const;  // oracle-facing: normalized CDF on [0, R]

private:
    Point propose(RngStream& rng) const;
    double invert_radial(double u) const;

    ConvexDomain domain_;
    Point center_;
    double radius_ = 0.0;
    std::vector<Vec> basis_;
    std::vector<double> cdf_;   // 4097 knots on [0, R]
    std::vector<double> dens_;  // normalized density at knots
};

// One uniform draw; builds a throwaway sampler, so loops should hold a
// UniformSampler instead.
Point sample_uniform(const ConvexDomain& domain, RngStream& rng);

// Fraction of n uniform domain samples satisfying the predicate.
VolumeEstimate volume_fraction(const ConvexDomain& domain,
                               const std::function<bool(const Point&)>& predicate, std::int64_t n,
                               std::uint64_t seed);

// Exact area fraction of a planar polygon on the v-side of the line through x
// (Sutherland-Hodgman clipping + shoelace).
double exact_cut_fraction_2d(const std::vector<std::array<double, 2>>& polygon,
                             const std::array<double, 2>& x, const std::array<double, 2>& v);

// Overload for k=0, m=2 simplex domains.
double exact_cut_fraction_2d(const ConvexDomain& domain, const Point& x, const Vec& v);

// Surface area of the unit (m-1)-sphere.
double unit_sphere_area(int m);

// Volume of a geodesic ball of radius R in the model space.
double ball_volume(const CurvatureSpace& s, double R);

}  // namespace corecut
