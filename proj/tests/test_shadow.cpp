#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "shadowlab/maps.hpp"
#include "shadowlab/shadow.hpp"

using namespace shadowlab;

namespace {

PseudoOrbit exact_orbit(const DynMap& f, Vec2 x, int n) {
    PseudoOrbit p;
    p.space = f.space;
    p.points.push_back(x);
    for (int i = 0; i < n; ++i) p.points.push_back(f(p.points.back()));
    return p;
}

}  // namespace

TEST_SUITE("shadow") {
    TEST_CASE("exact orbits shadow themselves") {
        const DynMap e2 = linear_expanding_map(2);
        const PseudoOrbit p = exact_orbit(e2, {0.1234, 0.0}, 30);
        const ShadowReport r = verify_shadowing(e2, p, p.points[0], 1e-9);
        CHECK(r.max_deviation == 0.0);
        CHECK(r.shadowed);
        CHECK(r.window == 31);
        const Vec2 z = expanding_shadow_oracle(e2, p);
        CHECK(circle_dist(z.x, 0.1234) < 1e-12);
    }

    TEST_CASE("rotation preserves a uniform displacement") {
        const DynMap rot = rotation_map(0.3);
        PseudoOrbit p = exact_orbit(rot, {0.2, 0.0}, 20);
        for (auto& q : p.points) q.x = wrap01(q.x + 0.01);
        const ShadowReport r = verify_shadowing(rot, p, {0.2, 0.0}, 0.02);
        CHECK(r.max_deviation == doctest::Approx(0.01).epsilon(1e-10));
        CHECK(r.shadowed == (r.max_deviation < r.epsilon_used));
        const ShadowReport tight = verify_shadowing(rot, p, {0.2, 0.0}, 0.005);
        CHECK_FALSE(tight.shadowed);
    }

    TEST_CASE("deviation is invariant under conjugation by a rotation") {
        const DynMap rot = rotation_map(0.3);
        const PseudoOrbit p = generate_pseudo_orbit(rot, {0.2, 0.0}, 0.01, 50, 4);
        PseudoOrbit shifted = p;
        for (auto& q : shifted.points) q.x = wrap01(q.x + 0.37);
        const double a = verify_shadowing(rot, p, {0.2, 0.0}, 1.0).max_deviation;
        const double b = verify_shadowing(rot, shifted, {wrap01(0.2 + 0.37), 0.0}, 1.0).max_deviation;
        CHECK(std::fabs(a - b) <= 1e-12);
    }

    TEST_CASE("single jump on E2 is shadowed within twice the jump") {
        const DynMap e2 = linear_expanding_map(2);
        const double delta = 1e-4;
        PseudoOrbit p = exact_orbit(e2, {0.3, 0.0}, 12);
        p.points[6].x = wrap01(p.points[6].x + delta);
        for (int k = 7; k <= 12; ++k) p.points[k] = e2(p.points[k - 1]);
        p.delta = delta;
        const Vec2 z = expanding_shadow_oracle(e2, p);
        const ShadowReport r = verify_shadowing(e2, p, z, 2.0 * delta);
        CHECK(r.max_deviation <= 2.0 * delta);
    }

    TEST_CASE("oracle bound lambda/(lambda - 1) on seeded trials") {
        for (int d : {2, 3}) {
            const DynMap f = linear_expanding_map(d);
            const double delta = d == 2 ? 1e-4 : 1e-5;
            const double bound = delta * d / (d - 1.0);
            std::mt19937_64 rng(d);
            for (int trial = 0; trial < 100; ++trial) {
                // Forward iteration from the returned point loses about log2(d) bits per step, so
                // the point itself is checked on a short window and the orbit on a long one.
                const PseudoOrbit p = generate_pseudo_orbit(f, {0.5, 0.0}, delta, 20, rng());
                const Vec2 z = expanding_shadow_oracle(f, p);
                CHECK(verify_shadowing(f, p, z, 1.0).max_deviation <= bound * (1.0 + 1e-6));
                const PseudoOrbit q = generate_pseudo_orbit(f, {0.5, 0.0}, delta, 400, rng());
                const auto orbit = expanding_shadow_orbit(f, q);
                CHECK(compare_orbit(f.space, orbit, q, 1.0).max_deviation <= bound * (1.0 + 1e-9));
                for (std::size_t k = 0; k + 1 < orbit.size(); ++k)
                    CHECK(circle_dist(f(orbit[k]).x, orbit[k + 1].x) < 1e-12);
            }
        }
    }

    TEST_CASE("newton on a linear hyperbolic map") {
        const DynMap f = linear_plane_map(2.0, 0.5);
        const double delta = 1e-3;
        const PseudoOrbit p = generate_pseudo_orbit(f, {0.3, -0.2}, delta, 40, 12);
        const NewtonShadowResult r = newton_shadow(f, p);
        REQUIRE(r.converged);
        for (std::size_t k = 0; k + 1 < r.orbit.size(); ++k) {
            const Vec2 fz = f.evaluate(r.orbit[k]);
            CHECK(std::max(std::fabs(fz.x - r.orbit[k + 1].x), std::fabs(fz.y - r.orbit[k + 1].y)) < 1e-12);
        }
        // Expanding direction: errors sum to delta (1/2 + 1/4 + ...); contracting direction: delta (1 + 1/2 + ...).
        CHECK(r.report.max_deviation <= 2.0 * delta * (1.0 + 1e-9));

        // Closed-form orbit: expanding coordinate solved backward from the last point, contracting
        // coordinate forward from the first.
        const std::size_t n = p.points.size();
        std::vector<double> xs(n), ys(n);
        xs[n - 1] = p.points[n - 1].x;
        for (std::size_t k = n - 1; k-- > 0;) xs[k] = xs[k + 1] / 2.0;
        ys[0] = p.points[0].y;
        for (std::size_t k = 1; k < n; ++k) ys[k] = ys[k - 1] / 2.0;
        double dev_x = 0.0, dev_y = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            dev_x = std::max(dev_x, std::fabs(xs[k] - p.points[k].x));
            dev_y = std::max(dev_y, std::fabs(ys[k] - p.points[k].y));
        }
        CHECK(dev_x <= delta * (1.0 + 1e-9));
        CHECK(dev_y <= 2.0 * delta * (1.0 + 1e-9));
        CHECK(r.report.max_deviation <= std::max(dev_x, dev_y) * (1.0 + 1e-6));
    }

    TEST_CASE("newton on an exact orbit") {
        const DynMap f = linear_plane_map(2.0, 0.5);
        const PseudoOrbit p = generate_pseudo_orbit(f, {0.01, 0.5}, 0.0, 10, 1);
        const NewtonShadowResult r = newton_shadow(f, p);
        CHECK(r.converged);
        CHECK(r.iterations == 0);
        CHECK(r.report.max_deviation == 0.0);
    }

    TEST_CASE("holder exponent of E2") {
        const DynMap e2 = linear_expanding_map(2);
        const HolderFit fit = holder_exponent(e2, {1e-3, 1e-4, 1e-5, 1e-6}, 20, 200, 1);
        CHECK(fit.alpha >= 0.9);
        CHECK(fit.alpha <= 1.1);
        CHECK(fit.residual < 0.1);
        for (std::size_t i = 1; i < fit.rows.size(); ++i) CHECK(fit.rows[i].delta < fit.rows[i - 1].delta);
        CHECK(holder_csv(fit).rfind("delta,epsilon_min,flagged", 0) == 0);
        CHECK(holder_svg(fit).find("<svg") != std::string::npos);
    }

    TEST_CASE("holder exponent of a linear hyperbolic map") {
        HolderOptions o;
        o.method = ShadowMethod::Newton;
        const HolderFit fit = holder_exponent(linear_plane_map(2.0, 0.5), {1e-3, 1e-4, 1e-5}, 5, 60, 3, o);
        CHECK(fit.alpha >= 0.9);
        CHECK(fit.alpha <= 1.1);
    }

    TEST_CASE("drifting pseudo-orbits of a rotation are flagged") {
        HolderOptions o;
        o.noise = NoiseModel::Drift;
        o.method = ShadowMethod::Newton;
        const HolderFit fit = holder_exponent(rotation_map(0.3), {1e-3, 1e-4}, 3, 200, 2, o);
        for (const auto& row : fit.rows) CHECK(row.flagged);
    }
}
