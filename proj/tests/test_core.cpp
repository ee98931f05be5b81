#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "shadowlab/core.hpp"
#include "shadowlab/kernels.hpp"
#include "shadowlab/maps.hpp"

using namespace shadowlab;

namespace {

DynMap line_lift(const DynMap& f) {
    DynMap g;
    g.space = Space::Line;
    g.evaluate = f.lift_evaluate;
    return g;
}

}  // namespace

TEST_SUITE("core") {
    TEST_CASE("circle distance examples") {
        CHECK(circle_dist(0.1, 0.9) == doctest::Approx(0.2).epsilon(1e-15));
        CHECK(circle_dist(0.25, 0.25) == 0.0);
        CHECK(circle_dist(0.0, 0.5) == 0.5);
    }

    TEST_CASE("circle distance is a metric") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 10000; ++i) {
            const double a = u(rng), b = u(rng), c = u(rng);
            CHECK(std::fabs(circle_dist(a, b) - circle_dist(b, a)) <= 1e-12);
            CHECK(circle_dist(a, c) <= circle_dist(a, b) + circle_dist(b, c) + 1e-12);
            CHECK(circle_dist(a, b) <= 0.5);
        }
    }

    TEST_CASE("annulus metric is the max of the circle and radial parts") {
        CHECK(distance(Space::Annulus, {0.05, 0.1}, {0.95, 0.4}) == doctest::Approx(0.3));
        CHECK(distance(Space::Annulus, {0.0, 0.0}, {0.4, 0.1}) == doctest::Approx(0.4));
        CHECK(wrap01(-0.25) == 0.75);
        CHECK(wrap01(1.0) == 0.0);
    }

    TEST_CASE("matrix norms") {
        const Mat2 m{1.0, -2.0, 3.0, 4.0};
        CHECK(m.norm_inf() == 7.0);
        // spectral norm: sqrt of the largest eigenvalue of m^T m = [[10, 10], [10, 20]]
        CHECK(m.norm2() == doctest::Approx(std::sqrt(15.0 + std::sqrt(125.0))));
        CHECK(Mat2::identity().norm2() == doctest::Approx(1.0));
    }

    TEST_CASE("zero noise gives the exact orbit") {
        const DynMap e2 = linear_expanding_map(2);
        const PseudoOrbit p = generate_pseudo_orbit(e2, {0.1234, 0.0}, 0.0, 50, 3);
        CHECK(p.delta == 0.0);
        CHECK(max_jump(p, e2) == 0.0);
    }

    TEST_CASE("generated jumps respect delta") {
        const DynMap e2 = linear_expanding_map(2);
        const PseudoOrbit p = generate_pseudo_orbit(e2, {0.0, 0.0}, 1e-3, 100, 7);
        CHECK(p.points.size() == 101);
        CHECK(max_jump(p, e2) <= 1e-3);
        CHECK(max_jump(p, e2) == p.delta);

        const DynMap rot = rotation_map(0.3);
        const PseudoOrbit q = generate_pseudo_orbit(rot, {0.0, 0.0}, 0.01, 10, 1);
        CHECK(max_jump(q, rot) <= 0.01);

        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const PseudoOrbit r = generate_pseudo_orbit(e2, {0.3, 0.0}, 1e-4, 200, seed);
            CHECK(max_jump(r, e2) <= 1e-4);
        }
    }

    TEST_CASE("generation is deterministic per seed and rejects non-finite start") {
        const DynMap e2 = linear_expanding_map(2);
        const PseudoOrbit a = generate_pseudo_orbit(e2, {0.2, 0.0}, 1e-3, 30, 5);
        const PseudoOrbit b = generate_pseudo_orbit(e2, {0.2, 0.0}, 1e-3, 30, 5);
        for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].x == b.points[i].x);
        CHECK_THROWS_AS(generate_pseudo_orbit(e2, {NAN, 0.0}, 1e-3, 5, 1), PreconditionError);
    }

    TEST_CASE("max jump examples") {
        const DynMap rot = rotation_map(0.3);
        PseudoOrbit exact{Space::Circle, {{0.0, 0}, {0.3, 0}, {0.6, 0}, {0.9, 0}, {0.2, 0}}, 0.0};
        CHECK(max_jump(exact, rot) == doctest::Approx(0.0).epsilon(1e-15));

        const DynMap e2 = linear_expanding_map(2);
        PseudoOrbit displaced{Space::Circle, {{0.1, 0}, {0.204, 0}, {0.408, 0}}, 0.0};
        CHECK(jumps(displaced, e2)[0] == doctest::Approx(0.004));
        CHECK(max_jump(displaced, e2) == doctest::Approx(0.004));

        PseudoOrbit single{Space::Circle, {{0.1, 0}}, 0.0};
        CHECK_THROWS(max_jump(single, e2));
    }

    TEST_CASE("lift of a rotation orbit") {
        const DynMap rot = rotation_map(0.3);
        PseudoOrbit exact{Space::Circle, {{0.0, 0}, {0.3, 0}, {0.6, 0}, {0.9, 0}, {0.2, 0}}, 0.0};
        LiftContext ctx;
        const LiftedOrbit l = lift_pseudo_orbit(exact, ctx, line_lift(rot), {0.0, 0.0});
        const double expect[] = {0.0, 0.3, 0.6, 0.9, 1.2};
        for (int i = 0; i < 5; ++i) CHECK(l.points[i].x == doctest::Approx(expect[i]).epsilon(1e-14));

        const LiftedOrbit s = lift_pseudo_orbit(exact, ctx, line_lift(rot), {1.0, 0.0});
        for (int i = 0; i < 5; ++i) CHECK(s.points[i].x == doctest::Approx(l.points[i].x + 1.0).epsilon(1e-14));
    }

    TEST_CASE("lift round trip, jump preservation and uniqueness") {
        const DynMap rot = rotation_map(0.3);
        LiftContext ctx;
        ctx.eps0 = 0.25;
        std::mt19937_64 rng(2);
        for (int trial = 0; trial < 100; ++trial) {
            const PseudoOrbit p = generate_pseudo_orbit(rot, {0.5, 0.0}, 0.01, 40, rng());
            const LiftedOrbit l = lift_pseudo_orbit(p, ctx, line_lift(rot), {0.5, 0.0});
            const std::vector<double> base = jumps(p, rot);
            for (std::size_t k = 0; k < p.points.size(); ++k)
                CHECK(circle_dist(project(ctx, l.points[k]).x, p.points[k].x) <= 1e-12);
            for (std::size_t k = 0; k < base.size(); ++k) CHECK(std::fabs(l.jumps[k] - base[k]) <= 1e-12);
            // Any other deck translate of a lifted point is at least 1 - delta away from the image.
            const std::size_t k = 1 + trial % (p.points.size() - 1);
            const double image = l.points[k - 1].x + 0.3;
            CHECK(std::fabs(l.points[k].x + 1.0 - image) >= ctx.eps0);
            CHECK(std::fabs(l.points[k].x - 1.0 - image) >= ctx.eps0);
        }
    }

    TEST_CASE("lift refuses delta at or above eps0") {
        const DynMap rot = rotation_map(0.3);
        LiftContext ctx;
        ctx.eps0 = 0.01;
        const PseudoOrbit p = generate_pseudo_orbit(rot, {0.0, 0.0}, 0.02, 10, 9);
        if (p.delta >= ctx.eps0) CHECK_THROWS_AS(lift_pseudo_orbit(p, ctx, line_lift(rot), {0.0, 0.0}), PreconditionError);
        ctx.eps0 = 0.6;
        CHECK_THROWS_AS(validate(ctx), PreconditionError);
    }

    TEST_CASE("trace witness examples") {
        CHECK(trace_growth_witness({1, 1, 0, 1}, 10) == 1);
        CHECK(trace_growth_witness({0, -1, 1, 0}, 10) == 4);
        CHECK(trace_growth_witness({2, 1, 1, 1}, 10) == 1);
        CHECK_FALSE(trace_growth_witness({0, -1, 1, 0}, 3).has_value());
        CHECK_THROWS_AS(trace_growth_witness({2, 0, 0, 1}, 5), PreconditionError);
    }

    TEST_CASE("trace witness agrees with brute-force powering") {
        // Order-3 and order-6 elliptic elements and a few hyperbolic ones; all entries stay small.
        const IntegerMatrix2 ms[] = {{0, -1, 1, -1}, {1, -1, 1, 0}, {-1, 1, -1, 0}, {3, 2, 1, 1}, {1, 2, 0, 1}, {-1, 0, 0, -1}};
        for (const auto& m : ms) {
            long long pa = 1, pb = 0, pc = 0, pd = 1;
            int brute = -1;
            for (int n = 1; n <= 12 && brute < 0; ++n) {
                const long long na = pa * m.a + pb * m.c, nb = pa * m.b + pb * m.d;
                const long long nc = pc * m.a + pd * m.c, nd = pc * m.b + pd * m.d;
                pa = na, pb = nb, pc = nc, pd = nd;
                if (pa + pd >= 2) brute = n;
            }
            const auto w = trace_growth_witness(m, 12);
            if (brute < 0) CHECK_FALSE(w.has_value());
            else CHECK(w == brute);
        }
    }

    TEST_CASE("pseudo-orbit serialization") {
        const DynMap e2 = linear_expanding_map(2);
        const PseudoOrbit p = generate_pseudo_orbit(e2, {0.3, 0.0}, 1e-3, 5, 4);
        const std::string csv = pseudo_orbit_csv(p, e2);
        CHECK(csv.rfind("index,coord_1,jump\n", 0) == 0);
        const PseudoOrbit back = pseudo_orbit_from_json(pseudo_orbit_json(p));
        REQUIRE(back.points.size() == p.points.size());
        for (std::size_t i = 0; i < p.points.size(); ++i) CHECK(back.points[i].x == p.points[i].x);
        CHECK(back.delta == p.delta);
    }

    TEST_CASE("analytic Jacobians match finite differences") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (const DynMap& f : {trig_map(0.0, 2.0, 0.05), north_south_map(), linear_expanding_map(3)}) {
            for (int i = 0; i < 200; ++i) {
                const Vec2 p{u(rng), 0.0};
                const double a = f.jacobian(p).a, n = numeric_jacobian(f, p).a;
                CHECK(std::fabs(a - n) <= 1e-5 * std::max(1.0, std::fabs(a)));
            }
        }
    }

    TEST_CASE("map spec parsing") {
        CHECK(parse_map_spec("E3").evaluate({0.4, 0}).x == doctest::Approx(0.2));
        CHECK(parse_map_spec("E3").lift_evaluate({0.5, 0}).x == doctest::Approx(1.5));
        CHECK(parse_map_spec("rot:0.25")({0.9, 0}).x == doctest::Approx(0.15));
        CHECK_THROWS_AS(parse_map_spec("nonsense"), PreconditionError);
    }
}

TEST_SUITE("kernels") {
    TEST_CASE("scalar and AVX2 kernels agree bit for bit") {
        if (!kernels::avx2_available()) return;
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u, 1023u}) {
            std::vector<double> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) a[i] = u(rng), b[i] = u(rng);
            CHECK(kernels::scalar::max_circle_dist(a.data(), b.data(), n) ==
                  kernels::avx2::max_circle_dist(a.data(), b.data(), n));
            CHECK(kernels::scalar::max_abs_diff(a.data(), b.data(), n) == kernels::avx2::max_abs_diff(a.data(), b.data(), n));
            for (bool periodic : {true, false}) {
                std::vector<std::int32_t> s(n), v(n);
                kernels::scalar::box_indices(a.data(), n, -1.0, 64.0, 256, periodic, s.data());
                kernels::avx2::box_indices(a.data(), n, -1.0, 64.0, 256, periodic, v.data());
                CHECK(s == v);
            }
        }
    }

    TEST_CASE("kernel reference values") {
        const double a[] = {0.1, 0.0, 0.7};
        const double b[] = {0.9, 0.5, 0.6};
        CHECK(kernels::max_circle_dist(a, b, 3) == 0.5);
        CHECK(kernels::max_abs_diff(a, b, 3) == doctest::Approx(0.8));
        const double x[] = {0.0, 0.49, 1.0, 1.2, -0.1};
        std::int32_t out[5];
        kernels::box_indices(x, 5, 0.0, 2.0, 2, false, out);
        CHECK(out[0] == 0);
        CHECK(out[1] == 0);
        CHECK(out[2] == 1);
        CHECK(out[3] == -1);
        CHECK(out[4] == -1);
    }
}
