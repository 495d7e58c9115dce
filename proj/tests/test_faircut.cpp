#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <iostream>

#include "corecut/errors.hpp"
#include "corecut/faircut.hpp"
#include "corecut/marching.hpp"
#include "test_support.hpp"

using namespace corecut;

namespace {

const CurvatureSpace kH2{2, 1.0};
const CurvatureSpace kE2{2, 0.0};

ConvexDomain unit_triangle() {
    return make_simplex(kE2, {Point{{0.0, 0.0}}, Point{{1.0, 0.0}}, Point{{0.0, 1.0}}});
}

TangentVector dir2(const CurvatureSpace& s, const Point& x, double theta) {
    const auto basis = tangent_basis(s, x);
    Vec v(x.c.size(), 0.0);
    axpy(v, std::cos(theta), basis[0]);
    axpy(v, std::sin(theta), basis[1]);
    return make_unit_tangent(s, x, std::move(v));
}

}  // namespace

TEST_CASE("cut_fraction") {
    const ConvexDomain ball = make_ball(kH2, origin(kH2), 2.0);

    SUBCASE("any direction halves a ball at its center") {
        for (int i = 0; i < 4; ++i) {
            const auto e = cut_fraction(ball, origin(kH2), dir2(kH2, origin(kH2), 1.1 * i), 20000,
                                        40 + i);
            CHECK(std::abs(e.fraction - 0.5) <= 3 * e.std_error);
        }
    }
    SUBCASE("f(v) + f(-v) = 1 exactly on shared samples") {
        RngStream rng(3);
        for (int i = 0; i < 5; ++i) {
            const double th = rng.uniform(0.0, 6.28);
            const auto f = cut_fraction(ball, origin(kH2), dir2(kH2, origin(kH2), th), 5000, 7);
            const auto g = cut_fraction(ball, origin(kH2), dir2(kH2, origin(kH2), th + 3.14159265358979323846),
                                        5000, 7);
            CHECK(f.fraction + g.fraction == 1.0);
        }
    }
    SUBCASE("triangle centroid cut toward a vertex") {
        const ConvexDomain tri = unit_triangle();
        const Point centroid = tri.probe_center();
        // toward the right-angle vertex (0,0): the small similar triangle, 4/9
        const TangentVector v = make_unit_tangent(kE2, centroid, {-1.0, -1.0});
        const auto e = cut_fraction(tri, centroid, v, 40000, 8);
        CHECK(std::abs(e.fraction - 4.0 / 9.0) <= 3 * e.std_error);
    }
    SUBCASE("x outside the domain is rejected") {
        const Point far = exp_map(kH2, dir2(kH2, origin(kH2), 0.3), 2.5);
        CHECK_THROWS_AS(cut_fraction(ball, far, dir2(kH2, far, 0.0), 1000, 1), InvalidInputError);
    }
}

TEST_CASE("phi at a probe point") {
    SUBCASE("ball center") {
        const ConvexDomain ball = make_ball(kH2, origin(kH2), 2.0);
        const PhiResult r = phi(ball, origin(kH2), 20000, 21);
        CHECK(std::abs(r.value.fraction - 0.5) <= 3 * r.value.std_error);
    }
    SUBCASE("triangle centroid: exact scan hits 4/9, Monte Carlo stays in band") {
        const ConvexDomain tri = unit_triangle();
        const Point centroid = tri.probe_center();
        CHECK(phi_exact_2d(tri, centroid) == doctest::Approx(4.0 / 9.0).epsilon(1e-9));
        const PhiResult r = phi(tri, centroid, 40000, 22);
        CHECK(std::abs(r.value.fraction - 4.0 / 9.0) <= 4 * r.value.std_error);
        // the minimizing cut leaves the centroid-side fraction at the minimum
        const auto check_dir = cut_fraction(tri, centroid, r.argmin, 40000, 23);
        CHECK(std::abs(check_dir.fraction - 4.0 / 9.0) <= 4 * check_dir.std_error);
    }
    SUBCASE("points near a vertex score strictly below the centroid") {
        const ConvexDomain tri = unit_triangle();
        const Point near_vertex{{0.05, 0.05}};
        CHECK(phi_exact_2d(tri, near_vertex) < 4.0 / 9.0 - 0.05);
    }
    SUBCASE("m=3 sanity: simplex barycenter is near the conjectured value") {
        const CurvatureSpace e3{3, 0.0};
        std::vector<Point> verts{Point{{0.0, 0.0, 0.0}}, Point{{1.0, 0.0, 0.0}},
                                 Point{{0.0, 1.0, 0.0}}, Point{{0.0, 0.0, 1.0}}};
        const ConvexDomain sx = make_simplex(e3, std::move(verts));
        const PhiResult r = phi(sx, sx.probe_center(), 40000, 24);
        CHECK(std::abs(r.value.fraction - 27.0 / 64.0) <= 4 * r.value.std_error);
    }
}

TEST_CASE("covering_check") {
    const Point o = origin(kH2);
    const TangentVector v = dir2(kH2, o, 0.7);
    const TangentVector nv = dir2(kH2, o, 0.7 + 3.14159265358979323846);

    CHECK(covering_check(kH2, o, {v, nv}));
    CHECK_FALSE(covering_check(kH2, o, {v}));
    CHECK_FALSE(covering_check(kH2, o, {}));

    const double deg = 3.14159265358979323846 / 180.0;
    CHECK(covering_check(kH2, o, {dir2(kH2, o, 0.0), dir2(kH2, o, 120 * deg),
                                  dir2(kH2, o, 240 * deg)}));
    CHECK_FALSE(covering_check(kH2, o, {dir2(kH2, o, 0.0), dir2(kH2, o, 10 * deg),
                                        dir2(kH2, o, 20 * deg)}));
}

TEST_CASE("caratheodory_select") {
    const Point o = origin(kH2);
    RngStream rng(31);

    SUBCASE("hundred spanning directions reduce to at most three") {
        std::vector<TangentVector> V;
        for (int i = 0; i < 100; ++i) V.push_back(dir2(kH2, o, rng.uniform(0.0, 6.283185307)));
        if (!covering_check(kH2, o, V)) return;  // astronomically unlikely
        const auto sel = caratheodory_select(kH2, o, V);
        CHECK(sel.size() <= 3);
        CHECK(covering_check(kH2, o, sel));
    }
    SUBCASE("antipodal pair survives unchanged") {
        const TangentVector v = dir2(kH2, o, 1.2);
        const TangentVector nv = dir2(kH2, o, 1.2 + 3.14159265358979323846);
        const auto sel = caratheodory_select(kH2, o, {v, nv});
        CHECK(sel.size() == 2);
        CHECK(covering_check(kH2, o, sel));
    }
    SUBCASE("precondition enforced") {
        CHECK_THROWS_AS(caratheodory_select(kH2, o, {dir2(kH2, o, 0.1)}), InvalidInputError);
    }
}

TEST_CASE("nested_half_space") {
    SUBCASE("Euclidean translation case") {
        const HalfSpace h0 = make_half_space(kE2, Point{{0.0, 0.0}}, {0.0, 1.0});
        const Point x{{0.0, 1.0}};
        const HalfSpace h = nested_half_space(make_ball(kE2, Point{{0.0, 0.0}}, 10.0), h0, x);
        CHECK(h.base().c[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(h.base().c[1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(h.normal()[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(h.normal()[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("sampled containment and strict volume decrease") {
        const ConvexDomain ball = make_ball(kH2, origin(kH2), 2.5);
        const Point base = exp_map(kH2, dir2(kH2, origin(kH2), 2.0), 0.9);
        const HalfSpace h0 = make_half_space(kH2, base, log_dir(kH2, base, origin(kH2)).v);
        const Point x = exp_map(kH2, h0.n, 0.8);  // strictly inside h0
        const HalfSpace h = nested_half_space(ball, h0, x);

        const UniformSampler sampler(ball);
        const auto cloud = sampler.sample_cloud(10000, 91);
        std::int64_t in_h = 0, in_h0 = 0, violations = 0;
        for (const Point& q : cloud) {
            const bool a = half_space_contains(kH2, h, q);
            const bool b = half_space_contains(kH2, h0, q);
            in_h += a;
            in_h0 += b;
            if (a && !b) ++violations;
        }
        CHECK(violations == 0);
        CHECK(in_h < in_h0);  // strict volume decrease, same sample set
    }
    SUBCASE("limit case: x approaching the boundary reproduces the fraction") {
        const ConvexDomain ball = make_ball(kH2, origin(kH2), 2.5);
        const Point base = exp_map(kH2, dir2(kH2, origin(kH2), 0.4), 0.7);
        const HalfSpace h0 = make_half_space(kH2, base, log_dir(kH2, base, origin(kH2)).v);
        const Point x = exp_map(kH2, h0.n, 1e-4);
        const HalfSpace h = nested_half_space(ball, h0, x);
        const auto f0 = volume_fraction(
            ball, [&](const Point& q) { return half_space_contains(kH2, h0, q); }, 20000, 92);
        const auto f1 = volume_fraction(
            ball, [&](const Point& q) { return half_space_contains(kH2, h, q); }, 20000, 92);
        CHECK(std::abs(f0.fraction - f1.fraction) <= 3 * (f0.std_error + f1.std_error) + 1e-3);
    }
    SUBCASE("x outside or on the boundary rejected") {
        const ConvexDomain ball = make_ball(kH2, origin(kH2), 2.5);
        const HalfSpace h0 = make_half_space(kH2, origin(kH2), {0.0, 1.0, 0.0});
        CHECK_THROWS_AS(nested_half_space(ball, h0, origin(kH2)), InvalidInputError);
        const Point outside = exp_map(kH2, make_half_space(kH2, origin(kH2), {0.0, -1.0, 0.0}).n, 0.5);
        CHECK_THROWS_AS(nested_half_space(ball, h0, outside), InvalidInputError);
    }
}

TEST_CASE("fair_cut_search on a ball") {
    const ConvexDomain ball = make_ball(kH2, origin(kH2), 2.0);
    FairCutOptions opts;
    opts.samples = 20000;
    opts.seed = 5;
    opts.budget = 200;
    const FairCutResult res = fair_cut_search(ball, opts);

    CHECK(res.converged);
    CHECK(res.within_bounds);
    CHECK(std::abs(res.phi.fraction - 0.5) <= 0.02);
    CHECK(distance(kH2, res.center, origin(kH2)) <= 0.1);  // 0.05 * R
    CHECK(res.covering);
    CHECK(res.selected.size() <= 3);
    CHECK(covering_check(kH2, res.center, res.selected));
    CHECK_FALSE(res.on_boundary);
    CHECK(res.trace.size() >= 2);

    SUBCASE("minimax sandwich") {
        RngStream rng(61);
        // phi elsewhere never beats the reported maximum by more than noise
        for (int i = 0; i < 5; ++i) {
            const Point x = exp_map(kH2, dir2(kH2, origin(kH2), rng.uniform(0.0, 6.28)),
                                    rng.uniform(0.0, 1.8));
            const PhiResult pr = phi(ball, x, 20000, 600 + i);
            CHECK(pr.value.fraction <=
                  res.phi.fraction + 3 * (pr.value.std_error + res.phi.std_error));
        }
        // every collected minimizing direction sits at the minimum level
        for (std::size_t i = 0; i < std::min<std::size_t>(res.minimizing_directions.size(), 8); ++i) {
            const auto f = cut_fraction(ball, res.center, res.minimizing_directions[i], 20000, 700 + i);
            CHECK(f.fraction >= res.phi.fraction - 3 * (f.std_error + res.phi.std_error));
        }
    }
    SUBCASE("covering at the center holds pointwise") {
        const UniformSampler sampler(ball);
        const auto cloud = sampler.sample_cloud(10000, 62);
        for (const Point& q : cloud) {
            bool covered = false;
            for (const TangentVector& v : res.selected)
                if (half_space_contains(kH2, HalfSpace{v}, q)) {
                    covered = true;
                    break;
                }
            CHECK(covered);
        }
    }
    SUBCASE("fair-cut centers form a near-convex plateau") {
        // midpoint of two near-optimal probes scores within noise of the max
        const Point a = exp_map(kH2, dir2(kH2, origin(kH2), 0.3), 0.05);
        const Point b = exp_map(kH2, dir2(kH2, origin(kH2), 0.3 + 3.14159), 0.05);
        const Point mid = geodesic_point(kH2, a, b, 0.5);
        const PhiResult pm = phi(ball, mid, 20000, 63);
        CHECK(pm.value.fraction >= res.phi.fraction - 4 * (pm.value.std_error + res.phi.std_error));
    }
}

TEST_CASE("fair_cut_search on the unit triangle") {
    const ConvexDomain tri = unit_triangle();
    FairCutOptions opts;
    opts.samples = 40000;
    opts.seed = 6;
    opts.budget = 250;
    const FairCutResult res = fair_cut_search(tri, opts);

    CHECK(res.converged);
    CHECK(std::abs(res.phi.fraction - 4.0 / 9.0) <= 0.02);
    const Point centroid = tri.probe_center();
    const double diam = std::sqrt(2.0);
    CHECK(distance(kE2, res.center, centroid) <= 0.05 * diam);
    CHECK(res.covering);
    CHECK(res.selected.size() <= 3);
    CHECK(res.within_bounds);
}

TEST_CASE("monotone pruning: a thin cut excludes the maximizer") {
    const ConvexDomain tri = unit_triangle();
    // a half-plane near the right-angle vertex pointing away from the centroid
    const Point x1{{0.12, 0.12}};
    const TangentVector v1 = make_unit_tangent(kE2, x1, {-1.0, -1.0});
    const auto f = cut_fraction(tri, x1, v1, 40000, 71);
    REQUIRE(f.fraction < 1.0 / 3.0 - 4 * f.std_error);

    const FairCutResult res = [&] {
        FairCutOptions opts;
        opts.samples = 40000;
        opts.seed = 72;
        opts.budget = 250;
        return fair_cut_search(tri, opts);
    }();
    const HalfSpace h1{v1};
    RngStream rng(73);
    int tried = 0;
    while (tried < 10) {
        const Point probe{{rng.uniform(0.0, 0.3), rng.uniform(0.0, 0.3)}};
        if (!tri.contains(probe) || !half_space_contains(kE2, h1, probe)) continue;
        ++tried;
        const double val = phi_exact_2d(tri, probe);
        CHECK(val < res.phi.fraction - res.phi.std_error);
    }
    // and the found center itself is outside the thin half-plane
    CHECK_FALSE(half_space_contains(kE2, h1, res.center));
}

TEST_CASE("curvature scale does not leak into the search") {
    // the same experiment at k = 0.5 with doubled lengths and at k = 2 with
    // halved lengths; the index is scale-invariant
    for (const auto& [k, R] : {std::pair<double, double>{0.5, 4.0}, {2.0, 1.0}}) {
        const CurvatureSpace s{2, k};
        const ConvexDomain ball = make_ball(s, origin(s), R);
        FairCutOptions opts;
        opts.samples = 20000;
        opts.seed = 55;
        opts.budget = 150;
        const FairCutResult res = fair_cut_search(ball, opts);
        CHECK(res.converged);
        CHECK(std::abs(res.phi.fraction - 0.5) <= 0.02);
        CHECK(distance(s, res.center, origin(s)) <= 0.05 * R);
        CHECK(res.covering);
    }
}

TEST_CASE("empirical Lipschitz constant of the cut-fraction field") {
    const ConvexDomain ball = make_ball(kH2, origin(kH2), 2.0);
    RngStream rng(81);
    double c_emp_small = 0.0, c_emp_large = 0.0;
    for (const auto [n, c_emp] :
         {std::pair<std::int64_t, double*>{20000, &c_emp_small}, {50000, &c_emp_large}}) {
        CutEvaluator eval(ball, n, 82);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const Point x = exp_map(kH2, dir2(kH2, origin(kH2), rng.uniform(0.0, 6.28)),
                                    rng.uniform(0.0, 1.5));
            const double th = rng.uniform(0.0, 6.28);
            const double dth = rng.uniform(-0.05, 0.05);
            const double dx = rng.uniform(0.0, 0.05);
            const Point x2 = exp_map(kH2, dir2(kH2, x, rng.uniform(0.0, 6.28)), dx);
            if (!ball.contains(x2)) continue;
            eval.set_probe(x);
            const double f1 = eval.fraction({std::cos(th), std::sin(th)});
            eval.set_probe(x2);
            const double f2 = eval.fraction({std::cos(th + dth), std::sin(th + dth)});
            const double dist_tb = std::sqrt(dx * dx + dth * dth);
            if (dist_tb > 1e-6) worst = std::max(worst, std::abs(f1 - f2) / dist_tb);
        }
        *c_emp = worst;
        CHECK(std::isfinite(worst));
        CHECK(worst > 0.0);
    }
    MESSAGE("empirical Lipschitz constant: n=20000 -> ", c_emp_small, ", n=50000 -> ",
            c_emp_large);
}
