#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shadowlab/example_b.hpp"

using namespace shadowlab;

namespace {

double zeta3() {
    double s = 0.0;
    for (int n = 200000; n >= 1; --n) s += 1.0 / (double(n) * n * n);
    return s;
}

}  // namespace

TEST_SUITE("example_b") {
    TEST_CASE("schedule closed form") {
        const AnnuliSchedule s = build_schedule(6, 0.5);
        const double w = (1.0 - 0.5 * std::numbers::pi * std::numbers::pi / 6.0) / zeta3();
        CHECK(s.w == doctest::Approx(w).epsilon(1e-9));
        CHECK(s.w == doctest::Approx(0.1477).epsilon(1e-3));
        CHECK(s.b[0] == 1.0);
        CHECK(s.a[0] == doctest::Approx(1.0 - w).epsilon(1e-9));
        CHECK(s.b[1] == doctest::Approx(0.5 - w).epsilon(1e-9));
        for (int n = 1; n <= s.depth; ++n) {
            CHECK(s.width(n) == doctest::Approx(w / (n * n * n)).epsilon(1e-9));
            CHECK(s.gap(n) == doctest::Approx(0.5 / (n * n)).epsilon(1e-9));
            CHECK(s.b[n - 1] > s.a[n - 1]);
            CHECK(s.a[n - 1] > s.b[n]);
            CHECK(s.b[n] > 0.0);
            if (n > 1) CHECK(s.width(n) < s.width(n - 1));
            CHECK((s.multiplier[n - 1] > 1.0) == (n % 2 == 1));
        }
        // sums close exactly for every truncation
        for (int N = 1; N <= s.depth; ++N) {
            double total = s.b[N];
            for (int n = 1; n <= N; ++n) total += s.width(n) + s.gap(n);
            CHECK(std::fabs(total - 1.0) <= 1e-12);
        }
    }

    TEST_CASE("schedule refusals") {
        CHECK_THROWS_AS(build_schedule(4, 1.0), PreconditionError);
        CHECK_THROWS_AS(build_schedule(4, 6.0 / (std::numbers::pi * std::numbers::pi)), PreconditionError);
        CHECK_THROWS_AS(build_schedule(1, 0.5), PreconditionError);
        const AnnuliSchedule two = build_schedule(2, 0.5);
        CHECK(two.width(1) > two.width(2));
    }

    TEST_CASE("glue profile") {
        CHECK(glue_profile(-0.5) == 0.0);
        CHECK(glue_profile(0.0) == 0.0);
        CHECK(glue_profile(1.0) == 1.0);
        CHECK(glue_profile(2.0) == 1.0);
        CHECK(glue_profile(0.5) == doctest::Approx(0.5));
        double prev = 0.0;
        for (int i = 1; i < 1000; ++i) {
            const double t = i / 1000.0;
            const double v = glue_profile(t);
            CHECK(v >= prev);
            if (t > 0.01 && t < 0.9) CHECK(v > prev);  // saturates in double near the ends
            prev = v;
            const double fd = (glue_profile(t + 1e-7) - glue_profile(t - 1e-7)) / 2e-7;
            CHECK(glue_profile_d(t) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
        }
        CHECK(glue_profile_k(0) >= 2.0);
        CHECK(glue_profile_k(2) >= glue_profile_cn_norm(2));
    }

    TEST_CASE("glued map structure") {
        const GluedMap g = build_glued_map(build_schedule(4, 0.5), {});
        const AnnuliSchedule& s = g.schedule;
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> ux(0.0, 1.0), uy(-1.0, 1.0);
        double odd = 0.0, core = 0.0, circles = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const double x = ux(rng), y = uy(rng);
            const Vec2 up = g({x, y}), down = g({x, -y});
            odd = std::max({odd, circle_dist(up.x, down.x), std::fabs(up.y + down.y)});
            const Vec2 c = g({x, 0.0});
            core = std::max({core, circle_dist(c.x, wrap01(x + g.alpha)), std::fabs(c.y)});
            for (int n = 1; n <= s.depth; ++n)
                for (double h : {s.a[n - 1], s.b[n - 1], s.b[n]})
                    for (double sign : {1.0, -1.0}) circles = std::max(circles, std::fabs(g({x, sign * h}).y - sign * h));
        }
        CHECK(odd == 0.0);
        CHECK(core <= 1e-12);
        CHECK(circles <= 1e-10);
        CHECK(gluing_continuity_gap(g) <= 1e-12);
    }

    TEST_CASE("boundary forms at the gap ends") {
        const GluedMap g = build_glued_map(build_schedule(4, 0.5), {});
        const AnnuliSchedule& s = g.schedule;
        for (int n = 1; n < s.depth; ++n) {
            for (double x : {0.05, 0.3, 0.77}) {
                const double dy = 1e-3 * s.gap(n);
                // just inside the gap, the blend matches the lower boundary form to first order
                const Vec2 lo = g.lift_in({x, s.a[n - 1] - dy}, GluedRegion::Gap, n);
                CHECK(lo.x == doctest::Approx(g.x_map(x)).epsilon(1e-15));
                CHECK(lo.y == doctest::Approx(s.a[n - 1] - s.multiplier[n - 1] * dy).epsilon(1e-9));
                const Vec2 at = g.lift_in({x, s.b[n]}, GluedRegion::Gap, n);
                CHECK(at.y == doctest::Approx(s.b[n]).epsilon(1e-15));
            }
        }
    }

    TEST_CASE("Jacobian against finite differences") {
        const GluedMap g = build_glued_map(build_schedule(4, 0.5), {});
        const AnnuliSchedule& s = g.schedule;
        const double h = 1e-7;
        for (double y : {0.5 * (s.a[0] + s.b[0]), 0.5 * (s.a[0] + s.b[1]), -0.5 * (s.a[1] + s.b[2]), 0.05}) {
            for (double x : {0.013, 0.41, 0.63, 0.71}) {  // q x away from the strip edges
                const Mat2 J = g.jacobian({x, y});
                const Vec2 fx1 = g.lift({x + h, y}), fx0 = g.lift({x - h, y});
                const Vec2 fy1 = g.lift({x, y + h}), fy0 = g.lift({x, y - h});
                CHECK(J.a == doctest::Approx((fx1.x - fx0.x) / (2 * h)).epsilon(1e-5));
                CHECK(J.c == doctest::Approx((fx1.y - fx0.y) / (2 * h)).epsilon(1e-5).scale(1.0));
                CHECK(J.b == doctest::Approx((fy1.x - fy0.x) / (2 * h)).epsilon(1e-5).scale(1.0));
                CHECK(J.d == doctest::Approx((fy1.y - fy0.y) / (2 * h)).epsilon(1e-5));
            }
        }
    }

    TEST_CASE("band distances are reported for every gap") {
        const GluedMap g = build_glued_map(build_schedule(4, 0.5), {});
        const auto rows = band_distances(g, 100);
        REQUIRE(rows.size() == 4);
        for (const auto& r : rows) {
            CHECK(r.reference == doctest::Approx(2.0 * (r.n + 1) / std::pow(4.0, r.n)));
            CHECK(std::isfinite(r.c0));
            CHECK(r.c1 >= r.c0);
        }
    }

    TEST_CASE("conditions at k = 1") {
        const GluedMap g = build_glued_map(build_schedule(4, 0.5), {});
        ConditionOptions o;
        o.rho = 1.0 / 256;
        o.trials = 3;
        o.blocks = 20;
        const ConditionReport r = check_conditions(g, 1, 1.0, o);
        for (const auto& c : r.checks) {
            INFO(c.name << ": " << c.detail);
            CHECK(c.passed);
        }
        CHECK(r.trap.kind == TrapKind::Full);
        CHECK(r.trap.delta > 0.0);
        CHECK(r.to_json().find("c_gap") != std::string::npos);
        CHECK_THROWS_AS(check_conditions(g, 3, 1.0, o), PreconditionError);
    }
}
