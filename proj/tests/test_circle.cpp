#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shadowlab/circle.hpp"
#include "shadowlab/maps.hpp"

using namespace shadowlab;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

CircleEndomorphism trig(double a0, double a1, double b) { return circle_endomorphism(trig_map(a0, a1, b)); }

// Sink over the turning point: a0 puts the maximum of x + b sin(2 pi x) on itself.
CircleEndomorphism critical_sink(double b) {
    const double c = std::acos(-1.0 / (two_pi * b)) / two_pi;
    return trig(-b * std::sin(two_pi * c), 1.0, b);
}

// First j >= 1 at which the lifted interval f^j(I) contains a turning point, by endpoint iteration.
// f(I) folds onto [F(c), F(z)]; before the hit every image is a monotone piece.
std::pair<int, double> brute_hit(const CircleEndomorphism& f, const std::vector<double>& cs, double c, double z,
                                 int j_max) {
    double lo = std::min(f.lift(c), f.lift(z)), hi = std::max(f.lift(c), f.lift(z));
    for (int j = 1; j <= j_max; ++j) {
        if (hi - lo >= 1.0) return {-1, hi - lo};
        for (double t : cs)
            for (double k = std::floor(lo) - 1; k <= std::ceil(hi) + 1; ++k)
                if (t + k > lo && t + k < hi) return {j, hi - lo};
        const double a = f.lift(lo), b = f.lift(hi);
        lo = std::min(a, b);
        hi = std::max(a, b);
    }
    return {-1, hi - lo};
}

}  // namespace

TEST_SUITE("circle") {
    TEST_CASE("degree") {
        CHECK(degree(linear_expanding_map(2)) == 2);
        CHECK(degree(rotation_map(0.3)) == 1);
        CHECK(degree(linear_expanding_map(-2)) == -2);
        CHECK_THROWS_AS(circle_from_lift("half", [](double x) { return 1.5 * x; }, [](double) { return 1.5; }),
                        PreconditionError);
        DynMap bad = linear_expanding_map(2);
        bad.lift_evaluate = [](Vec2 p) { return Vec2{1.5 * p.x, 0.0}; };
        CHECK_THROWS_AS(degree(bad), PreconditionError);

        const CircleEndomorphism g = trig(0.1, 2.0, 0.2);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < 10; ++k) {
            const double s = u(rng);
            const auto conj = circle_from_lift(
                "conj", [&g, s](double x) { return g.lift(x + s) - s; }, [&g, s](double x) { return g.derivative(x + s); });
            CHECK(degree(to_dynmap(conj)) == 2);
        }
    }

    TEST_CASE("lift consistency") {
        const CircleEndomorphism g = trig(0.1, 2.0, 0.5);
        for (double x : {0.0, 0.17, 0.5, 0.93}) {
            CHECK(std::fabs(g.lift(x + 1.0) - g.lift(x) - 2.0) < 1e-12);
            const double fd = (g.lift(x + 1e-6) - g.lift(x - 1e-6)) / 2e-6;
            CHECK(std::fabs(g.derivative(x) - fd) < 1e-6);
        }
    }

    TEST_CASE("turning points") {
        CHECK(turning_points(circle_endomorphism(linear_expanding_map(2))).points.empty());

        const TurningScan a = turning_points(trig(0.0, 1.0, 3.0 / (4.0 * std::numbers::pi)));
        REQUIRE(a.points.size() == 2);
        const double ca = std::acos(-2.0 / 3.0) / two_pi;
        CHECK(a.points[0].location == doctest::Approx(ca).epsilon(1e-10));
        CHECK(a.points[1].location == doctest::Approx(1.0 - ca).epsilon(1e-10));
        CHECK(a.points[0].location == doctest::Approx(0.3662).epsilon(1e-4));
        CHECK(a.points[0].kind == TurningKind::Max);
        CHECK(a.points[1].kind == TurningKind::Min);

        const CircleEndomorphism h = trig(0.0, 2.0, 0.5);
        const TurningScan b = turning_points(h);
        REQUIRE(b.points.size() == 2);
        const double cb = std::acos(-2.0 / std::numbers::pi) / two_pi;
        CHECK(b.points[0].location == doctest::Approx(cb).epsilon(1e-10));
        CHECK(b.points[1].location == doctest::Approx(1.0 - cb).epsilon(1e-10));
        for (const auto& p : b.points) {
            CHECK(std::fabs(h.derivative(p.location)) < 1e-9);
            CHECK(h.derivative(p.location - 1e-4) * h.derivative(p.location + 1e-4) < 0.0);
        }
        CHECK_FALSE(b.grid_too_coarse);
    }

    TEST_CASE("expanding estimate") {
        const ExpandingEstimate e3 = expanding_estimate(circle_endomorphism(linear_expanding_map(3)), 8);
        CHECK(std::fabs(e3.lambda - 3.0) < 1e-9);
        CHECK(e3.constant == doctest::Approx(1.0));
        const ExpandingEstimate e2 = expanding_estimate(circle_endomorphism(linear_expanding_map(2)), 8);
        CHECK(std::fabs(e2.lambda - 2.0) < 1e-9);

        const CircleEndomorphism g = trig(0.0, 2.0, 0.05);
        const ExpandingEstimate eg = expanding_estimate(g, 8, 4096);
        CHECK(eg.lambda >= 1.68);
        CHECK(eg.lambda <= 2.32);
        // grid oracle for the 8-step products
        double worst = 1e300;
        for (int i = 0; i < 4096; ++i) {
            double x = i / 4096.0, prod = 1.0;
            for (int k = 0; k < 8; ++k) {
                prod *= std::fabs(g.derivative(x));
                x = g(x);
            }
            worst = std::min(worst, prod);
        }
        CHECK(eg.lambda <= std::pow(worst, 1.0 / 8.0) + 1e-9);

        CHECK(expanding_estimate(circle_endomorphism(rotation_map(0.3)), 8).lambda == doctest::Approx(1.0));
        CHECK_THROWS_AS(expanding_estimate(trig(0.0, 2.0, 0.5), 8), PreconditionError);
    }

    TEST_CASE("semiconjugacy to the linear model") {
        const SemiconjugacyTable id = semiconjugacy(circle_endomorphism(linear_expanding_map(2)), 52);
        CHECK(id.defect < 1e-12);
        CHECK(id.anchor == 0.0);
        for (std::size_t i = 0; i < id.x.size(); i += 97) CHECK(std::fabs(id.h[i] - id.x[i]) < 1e-12);

        const CircleEndomorphism g = trig(0.0, 2.0, 0.05);
        const SemiconjugacyTable s20 = semiconjugacy(g, 20);
        const SemiconjugacyTable s10 = semiconjugacy(g, 10);
        CHECK(s20.defect < 1e-6);
        CHECK(s20.defect <= s10.defect);
        CHECK(s20.monotone);
        CHECK(s20.interval_fibers == 0);
        CHECK(s20.transitivity_asserted);
        CHECK(s20.anchor == doctest::Approx(smallest_fixed_point(g)));
        // cut points are the preimages of the anchor
        for (double c : s20.cuts) CHECK(circle_dist(g(c), s20.anchor) < 1e-12);

        // attracting fixed point: an interval collapses
        const SemiconjugacyTable sink = semiconjugacy(trig(0.0, 2.0, -0.25), 20);
        CHECK(sink.interval_fibers > 0);
        CHECK(sink.defect < 1e-5);
    }

    TEST_CASE("turning interval escape against endpoint iteration") {
        const CircleEndomorphism h = trig(0.0, 2.0, 0.5);
        const TurningScan tp = turning_points(h);
        std::vector<double> cs;
        for (const auto& p : tp.points) cs.push_back(p.location);
        for (int i = 0; i < 2; ++i) {
            const TurningEscape e = turning_interval_escape(h, tp, i, 1e-3, 200);
            const double c = cs[static_cast<std::size_t>(i)];
            CHECK(std::fabs(circle_dist(e.start, c) - 1e-3) < 1e-12);
            CHECK(std::fabs(h.lift(e.sibling) - h.lift(e.start)) < 1e-12);
            CHECK((e.sibling - c) * (e.start - c) < 0.0);
            CHECK(e.jump == doctest::Approx(circle_dist(h(e.start), h(c))));
            CHECK(e.jump < 1e-4);  // quadratic in eps
            const auto [j, diam] = brute_hit(h, cs, c, e.start, 200);
            CHECK(e.hit_step == j);
            CHECK(e.hit_diameter == doctest::Approx(diam).epsilon(1e-6));
        }
    }

    TEST_CASE("turning interval escape edge cases") {
        const CircleEndomorphism sink = critical_sink(0.3);
        const TurningScan tp = turning_points(sink);
        REQUIRE(tp.points.size() == 2);
        const TurningEscape e = turning_interval_escape(sink, tp, 0, 1e-3, 50);
        CHECK(e.containment_step == 1);
        CHECK(e.cycle_certified);
        CHECK(e.cycle == std::vector<int>{0});

        const CircleEndomorphism h = trig(0.0, 2.0, 0.5);
        const TurningScan th = turning_points(h);
        CHECK_THROWS_AS(turning_interval_escape(h, th, 0, 0.4, 50), PreconditionError);
        CHECK_THROWS_AS(turning_interval_escape(h, th, 5, 1e-3, 50), PreconditionError);
    }

    TEST_CASE("periodic parameter") {
        const CircleEndomorphism e2 = circle_endomorphism(linear_expanding_map(2));
        const PeriodicParameter a = periodic_parameter(e2, 0.0, 0.01);
        CHECK(a.n == 7);
        CHECK(a.t == doctest::Approx(1.0 / 127.0).epsilon(1e-12));
        const PeriodicParameter b = periodic_parameter(e2, 0.0, 0.5);
        CHECK(b.n == 2);
        CHECK(b.t == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

        const CircleEndomorphism g = trig(0.0, 2.0, 0.05);
        const PeriodicParameter p = periodic_parameter(g, 0.3, 0.01);
        CHECK(p.t > 0.0);
        CHECK(p.t < 0.01);
        CHECK(p.audit_failures == 0);
        // residual in extended precision
        long double y = 0.3L;
        for (int k = 0; k < p.n; ++k) {
            const double yd = static_cast<double>(y);
            y = static_cast<long double>(g.lift(yd)) + (y - yd) * g.derivative(yd) + p.t;
        }
        CHECK(std::fabs(static_cast<double>(y - 0.3L - p.m)) < 1e-10);
        // F_t^n(z) >= F^n(z) + t
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> uz(0.0, 1.0), ut(0.0, 0.01);
        std::uniform_int_distribution<int> un(1, 8);
        int fails = 0;
        for (int k = 0; k < 1000; ++k) {
            const double z = uz(rng), t = ut(rng) + 1e-9;
            const int n = un(rng);
            double with = z, without = z;
            for (int i = 0; i < n; ++i) {
                with = g.shifted_lift(with, t);
                without = g.lift(without);
            }
            if (with < without + t) ++fails;
        }
        CHECK(fails == 0);
        CHECK_THROWS_AS(periodic_parameter(circle_endomorphism(rotation_map(0.3)), 0.0, 0.01), PreconditionError);
    }

    TEST_CASE("json exports") {
        const CircleEndomorphism g = trig(0.0, 2.0, 0.05);
        CHECK(semiconjugacy_json(semiconjugacy(g, 10, 6)).find("\"defect\"") != std::string::npos);
        CHECK(periodic_parameter_json(periodic_parameter(g, 0.0, 0.1)).find("\"t\"") != std::string::npos);
    }
}
