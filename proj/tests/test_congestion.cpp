#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "corecut/congestion.hpp"
#include "corecut/errors.hpp"
#include "test_support.hpp"

using namespace corecut;

namespace {

const CurvatureSpace kH2{2, 1.0};
const CurvatureSpace kE2{2, 0.0};

TangentVector dir2(const CurvatureSpace& s, const Point& x, double theta) {
    const auto basis = tangent_basis(s, x);
    Vec v(x.c.size(), 0.0);
    axpy(v, std::cos(theta), basis[0]);
    axpy(v, std::sin(theta), basis[1]);
    return make_unit_tangent(s, x, std::move(v));
}

}  // namespace

TEST_CASE("is_blocked") {
    const Point o = origin(kH2);
    const Point p = exp_map(kH2, dir2(kH2, o, 0.0), 1.5);
    const Point q = exp_map(kH2, dir2(kH2, o, 2.0), 1.5);

    CHECK(is_blocked(kH2, p, q, p, 0.3));  // endpoint at the ball center
    CHECK(is_blocked(kH2, p, q, q, 0.01));

    // orthogonal legs of length 5: the frozen closed-form distance is
    // 0.881245194..., just below the blocking radius
    const Point y = make_point(kH2, {std::cosh(5.0), std::sinh(5.0), 0.0});
    const Point z = make_point(kH2, {std::cosh(5.0), 0.0, std::sinh(5.0)});
    const double d = dist_point_to_segment(kH2, o, {y, z});
    CHECK(d == doctest::Approx(0.8812451941).epsilon(1e-9));
    CHECK(is_blocked(kH2, y, z, o, 0.89));
    CHECK_FALSE(is_blocked(kH2, y, z, o, 0.5));

    CHECK_THROWS_AS(is_blocked(kH2, y, z, o, 0.0), InvalidInputError);
}

TEST_CASE("traffic density") {
    const ConvexDomain ball = make_ball(kH2, origin(kH2), 1.0);

    SUBCASE("a ball-filling radius catches every geodesic") {
        const TrafficReport rep = traffic_density(ball, origin(kH2), 2.1, 2000, 1);
        CHECK(rep.density.fraction == 1.0);
    }
    SUBCASE("density vanishes with the radius") {
        const ConvexDomain big = make_ball(kH2, origin(kH2), 2.0);
        const TrafficReport rep = traffic_density(big, origin(kH2), 0.01, 5000, 2);
        CHECK(rep.density.fraction < 0.05);
    }
    SUBCASE("profile is exactly monotone on shared pairs") {
        const ConvexDomain big = make_ball(kH2, origin(kH2), 2.0);
        std::vector<double> radii;
        for (int i = 1; i <= 10; ++i) radii.push_back(0.2 * i);
        const auto profile = traffic_profile(big, origin(kH2), radii, 4000, 3);
        for (std::size_t i = 1; i < profile.size(); ++i)
            CHECK(profile[i].density.fraction >= profile[i - 1].density.fraction);
        CHECK(profile.back().density.fraction <= 1.0);
    }
    SUBCASE("center density at the blocking radius clears the dimension bound") {
        const ConvexDomain big = make_ball(kH2, origin(kH2), 2.0);
        const TrafficReport rep =
            traffic_density(big, origin(kH2), blocking_radius(1.0), 20000, 4);
        CHECK(rep.density.fraction >= 1.0 / 3.0 - 4 * rep.density.std_error);
    }
    SUBCASE("scale covariance: halving the scale with doubled curvature") {
        const ConvexDomain a = make_ball(kH2, origin(kH2), 2.0);
        const CurvatureSpace k2{2, 2.0};
        const ConvexDomain b = make_ball(k2, origin(k2), 1.0);
        const TrafficReport ra = traffic_density(a, origin(kH2), blocking_radius(1.0), 20000, 5);
        const TrafficReport rb = traffic_density(b, origin(k2), blocking_radius(2.0), 20000, 5);
        CHECK(std::abs(ra.density.fraction - rb.density.fraction) <=
              4 * (ra.density.std_error + rb.density.std_error));
    }
}

TEST_CASE("blocked view") {
    const ConvexDomain ball = make_ball(kH2, origin(kH2), 3.0);
    RngStream rng(11);
    const UniformSampler sampler(ball);

    SUBCASE("no violations at the blocking radius") {
        // keep x away from the boundary: the half-space beyond a near-boundary
        // point is an exponentially thin cap and starves rejection sampling
        for (int c = 0; c < 4; ++c) {
            Point x = sampler.sample(rng);
            while (distance(kH2, x, origin(kH2)) > 2.2) x = sampler.sample(rng);
            Point p = sampler.sample(rng);
            while (distance(kH2, x, p) < 1e-3) p = sampler.sample(rng);
            CHECK(blocked_view_check(ball, x, p, 2000, 100 + c) == 0.0);
        }
    }
    SUBCASE("violations appear at half the blocking radius") {
        const ConvexDomain big = make_ball(kH2, origin(kH2), 5.0);
        const Point x = origin(kH2);
        const Point p = exp_map(kH2, dir2(kH2, x, 0.0), 4.5);
        const double frac =
            blocked_view_check(big, x, p, 4000, 12, 0.5 * blocking_radius(1.0));
        CHECK(frac > 0.0);
    }
    SUBCASE("boundary-hyperplane points with legs of length 5 are all blocked") {
        const ConvexDomain big = make_ball(kH2, origin(kH2), 5.5);
        const Point x = origin(kH2);
        const Point p = exp_map(kH2, dir2(kH2, x, 0.0), 5.0);
        const double r0 = blocking_radius(1.0);
        // q on the hyperplane orthogonal to v_p at x, at distance 5
        for (int i = 0; i < 50; ++i) {
            const double sign = i % 2 ? 1.0 : -1.0;
            const Point q = exp_map(kH2, dir2(kH2, x, sign * 3.14159265358979323846 / 2), 5.0);
            CHECK(dist_point_to_segment(kH2, x, {p, q}) <= r0 + 1e-6);
        }
    }
    SUBCASE("degenerate p = x") {
        CHECK_THROWS_AS(blocked_view_check(ball, origin(kH2), origin(kH2), 100, 1),
                        DegenerateInputError);
    }
}

TEST_CASE("blocked view drives the density bound (lower-bound chain)") {
    const ConvexDomain ball = make_ball(kH2, origin(kH2), 2.0);
    const Point x0 = origin(kH2);  // fair-cut center of a ball
    const double r0 = blocking_radius(1.0);
    const UniformSampler sampler(ball);
    RngStream rng(21);
    for (int i = 0; i < 20; ++i) {
        Point p = sampler.sample(rng);
        while (distance(kH2, x0, p) < 1e-3) p = sampler.sample(rng);
        // the half-space H(x0, v_p) holds at least phi of the volume...
        const TangentVector v_p = make_unit_tangent(kH2, x0, scaled(log_dir(kH2, x0, p).v, -1.0));
        const auto frac = cut_fraction(ball, x0, v_p, 10000, 300 + i);
        CHECK(frac.fraction >= 0.5 - 3 * frac.std_error);
        // ...and every sampled q inside it is blocked at the blocking radius
        CHECK(blocked_view_check(ball, x0, p, 1000, 400 + i) == 0.0);
    }
}

TEST_CASE("congestion core") {
    SUBCASE("m=2 ball") {
        const ConvexDomain ball = make_ball(kH2, origin(kH2), 2.0);
        FairCutOptions opts;
        opts.samples = 20000;
        opts.seed = 31;
        opts.budget = 150;
        const CongestionCore core = congestion_core(ball, opts, 20000);
        CHECK(core.radius == doctest::Approx(blocking_radius(1.0)));
        CHECK(core.report.density.fraction >= 1.0 / 3.0 - 4 * core.report.density.std_error);
        CHECK(core.bound_ok);
        // the chosen center is at least as busy as random probes
        RngStream rng(32);
        const UniformSampler sampler(ball);
        for (int i = 0; i < 10; ++i) {
            const Point probe = sampler.sample(rng);
            const TrafficReport other =
                traffic_density(ball, probe, core.radius, 20000, 500 + i);
            CHECK(core.report.density.fraction >=
                  other.density.fraction -
                      4 * (core.report.density.std_error + other.density.std_error));
        }
    }
    SUBCASE("curvature zero is rejected") {
        const ConvexDomain disk = make_ball(kE2, Point{{0.0, 0.0}}, 1.0);
        CHECK_THROWS_AS(congestion_core(disk, {}, 1000), UnsupportedError);
    }
}
