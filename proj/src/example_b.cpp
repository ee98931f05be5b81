#include "shadowlab/example_b.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "shadowlab/maps.hpp"

namespace shadowlab {

AnnuliSchedule build_schedule(int n_max, double c_gap, double strength) {
    if (n_max < 2) throw PreconditionError("schedule depth must be >= 2");
    const double gap_total = std::numbers::pi * std::numbers::pi / 6.0;
    if (!(c_gap > 0.0) || c_gap * gap_total >= 1.0)
        throw PreconditionError("c_gap must lie in (0, 6/pi^2): the gaps alone would exceed the total length");
    if (!(strength > 0.0 && strength <= 0.5)) throw PreconditionError("strength must lie in (0, 0.5]");
    constexpr double zeta3 = 1.2020569031595942853997;
    AnnuliSchedule s;
    s.depth = n_max;
    s.c_gap = c_gap;
    s.strength = strength;
    // Widths w/n^3 and gaps c_gap/n^2 sum to 1 over all n, so b_n -> 0.
    s.w = (1.0 - c_gap * gap_total) / zeta3;
    s.b.push_back(1.0);
    for (int n = 1; n <= n_max; ++n) {
        const double nn = n;
        s.a.push_back(s.b.back() - s.w / (nn * nn * nn));
        s.b.push_back(s.a.back() - c_gap / (nn * nn));
        const double sign = n % 2 == 1 ? 1.0 : -1.0;
        s.multiplier.push_back(1.0 + sign * strength / std::pow(4.0, n - 1));
    }
    return s;
}

double glue_profile(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

double glue_profile_d(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    const double s = a + b;
    if (a == 0.0 || b == 0.0) return 0.0;
    return a * b * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / (s * s);
}

double glue_profile_cn_norm(int order) {
    if (order < 0 || order > 2) throw PreconditionError("profile norms are computed for orders 0..2");
    double sup = 1.0;
    const int n = 20000;
    const double h = 1.0 / n;
    for (int i = 1; i < n; ++i) {
        const double t = i * h;
        if (order >= 1) sup = std::max(sup, std::fabs(glue_profile_d(t)));
        if (order >= 2) sup = std::max(sup, std::fabs((glue_profile_d(t + 1e-6) - glue_profile_d(t - 1e-6)) / 2e-6));
    }
    return sup;
}

double glue_profile_k(int order) { return std::max(2.0, std::ceil(glue_profile_cn_norm(order) * 1.01)); }

std::pair<GluedRegion, int> GluedMap::region(double y) const {
    const double v = std::fabs(y);
    const auto& s = schedule;
    for (int n = 1; n <= s.depth; ++n) {
        if (v >= s.a[n - 1]) return {GluedRegion::Annulus, n};
        if (v > s.b[n]) return {GluedRegion::Gap, n};
    }
    return {GluedRegion::Core, 0};
}

double GluedMap::x_map(double x) const {
    const auto& m = models.front();
    return (m.lift_x(params.q * x) + params.p) / params.q;
}

Vec2 GluedMap::lift_in(Vec2 pt, GluedRegion r, int n) const {
    const double sign = pt.y < 0.0 ? -1.0 : 1.0;
    const double y = std::fabs(pt.y);
    const auto& s = schedule;
    double X = 0.0, Y = 0.0;
    switch (r) {
        case GluedRegion::Annulus: {
            const double lo = s.a[n - 1], h = s.width(n);
            X = x_map(pt.x);
            Y = lo + h * models[n - 1].map_y(params.q * pt.x, (y - lo) / h);
            break;
        }
        case GluedRegion::Gap: {
            const double an = s.a[n - 1], bn1 = s.b[n];
            const double t = (y - an) / (bn1 - an);
            const double ph = glue_profile(t);
            const double lower = s.multiplier[n - 1] * (y - an) + an;  // boundary form at a_n
            const double gx = x_map(pt.x);
            if (n < s.depth) {
                const double upper = s.multiplier[n] * (y - bn1) + bn1;  // boundary form at b_{n+1}
                X = gx;
                Y = lower + ph * (upper - lower);
            } else {
                // Last gap: blend into the rotation on the core.
                X = gx + ph * (pt.x + alpha - gx);
                Y = lower + ph * (y - lower);
            }
            break;
        }
        case GluedRegion::Core:
            X = pt.x + alpha;
            Y = y;
            break;
    }
    return {X, sign * Y};
}

Vec2 GluedMap::lift(Vec2 p) const {
    const auto [r, n] = region(p.y);
    return lift_in(p, r, n);
}

Vec2 GluedMap::operator()(Vec2 p) const {
    const Vec2 w = lift(p);
    return {wrap01(w.x), w.y};
}

Mat2 GluedMap::jacobian(Vec2 pt) const {
    const double sign = pt.y < 0.0 ? -1.0 : 1.0;
    const double y = std::fabs(pt.y);
    const auto [r, n] = region(pt.y);
    const auto& s = schedule;
    const int q = params.q;
    Mat2 J = Mat2::identity();
    switch (r) {
        case GluedRegion::Annulus: {
            const double lo = s.a[n - 1], h = s.width(n);
            const auto& m = models[n - 1];
            const Vec2 g = m.map_y_grad(q * pt.x, (y - lo) / h);
            J = {m.lift_dx(q * pt.x), 0.0, h * q * g.x, g.y};
            break;
        }
        case GluedRegion::Gap: {
            const double an = s.a[n - 1], bn1 = s.b[n];
            const double delta = bn1 - an;
            const double t = (y - an) / delta;
            const double ph = glue_profile(t), dph = glue_profile_d(t) / delta;
            const double ln = s.multiplier[n - 1];
            const double lower = ln * (y - an) + an;
            const double gdx = models.front().lift_dx(q * pt.x);
            if (n < s.depth) {
                const double ln1 = s.multiplier[n];
                const double upper = ln1 * (y - bn1) + bn1;
                J = {gdx, 0.0, 0.0, ln + dph * (upper - lower) + ph * (ln1 - ln)};
            } else {
                const double gx = x_map(pt.x);
                J = {(1.0 - ph) * gdx + ph, dph * (pt.x + alpha - gx), 0.0, ln + dph * (y - lower) + ph * (1.0 - ln)};
            }
            break;
        }
        case GluedRegion::Core:
            break;
    }
    // f(x, -y) = (X(x, y), -Y(x, y))
    if (sign < 0.0) {
        J.b = -J.b;
        J.c = -J.c;
    }
    return J;
}

GluedMap build_glued_map(const AnnuliSchedule& schedule, const GluedParams& params) {
    if (schedule.depth < 2 || schedule.a.size() != static_cast<std::size_t>(schedule.depth) ||
        schedule.b.size() != static_cast<std::size_t>(schedule.depth) + 1)
        throw PreconditionError("malformed schedule");
    for (int n = 1; n <= schedule.depth; ++n)
        if (!(schedule.b[n - 1] > schedule.a[n - 1] && schedule.a[n - 1] > schedule.b[n] && schedule.b[n] > 0.0))
            throw PreconditionError("schedule violates b_n > a_n > b_{n+1} > 0 at n = " + std::to_string(n));
    if (params.q < 2) throw PreconditionError("q must be >= 2");
    const LiouvilleApproximant approx = check_approximant(params.alpha, 0, params.r);
    if (!(approx.p == params.p && approx.q == params.q) || !approx.liouville_ok)
        throw PreconditionError("p/q must be the leading approximant of alpha with |alpha - p/q| < 1/q^(r+2)");
    GluedMap g;
    g.schedule = schedule;
    g.params = params;
    g.alpha = params.alpha.value();
    for (int n = 1; n <= schedule.depth; ++n) {
        const double band_height = schedule.width(n) * 0.4;
        if (!(band_height > 1e-9)) throw PreconditionError("annulus " + std::to_string(n) + " too thin for the horseshoe band");
        g.models.push_back(build_crooked_model(params.mu, params.kappa, schedule.multiplier[n - 1]));
    }
    g.cover = finite_cover_map(g.models.front(), params.q, params.p, params.r);
    return g;
}

DynMap glued_dynmap(const GluedMap& map) {
    DynMap f;
    f.space = Space::Annulus;
    f.name = "example-b";
    f.evaluate = [map](Vec2 p) { return map(p); };
    f.lift_evaluate = [map](Vec2 p) { return map.lift(p); };
    f.jacobian = [map](Vec2 p) { return map.jacobian(p); };
    std::vector<double> xb;
    for (const auto& s : map.models.front().strips) {
        xb.push_back(s.lo / map.params.q);
        xb.push_back(s.hi / map.params.q);
    }
    std::vector<double> yb{0.0};
    const auto& s = map.schedule;
    const auto& m = map.models.front();
    for (int n = 1; n <= s.depth; ++n) {
        const double lo = s.a[n - 1], h = s.width(n);
        for (double v : {0.0, m.outer, m.band_lo, m.band_hi, 1.0 - m.outer, 1.0}) {
            yb.push_back(lo + h * v);
            yb.push_back(-(lo + h * v));
        }
    }
    yb.push_back(s.b[s.depth]);
    yb.push_back(-s.b[s.depth]);
    f.derivative_bound = sampled_derivative_bound(f.jacobian, xb, 1.0 / map.params.q, yb);
    return f;
}

double gluing_continuity_gap(const GluedMap& map, int samples) {
    if (samples < 1) throw PreconditionError("samples must be >= 1");
    const auto& s = map.schedule;
    double worst = 0.0;
    auto compare = [&](double y, GluedRegion r1, int n1, GluedRegion r2, int n2) {
        for (int i = 0; i < samples; ++i) {
            const double x = (i + 0.5) / samples;
            for (double sy : {y, -y}) {
                const Vec2 u = map.lift_in({x, sy}, r1, n1), v = map.lift_in({x, sy}, r2, n2);
                worst = std::max({worst, std::fabs(u.x - v.x), std::fabs(u.y - v.y)});
            }
        }
    };
    for (int n = 1; n <= s.depth; ++n) {
        compare(s.a[n - 1], GluedRegion::Annulus, n, GluedRegion::Gap, n);
        if (n < s.depth)
            compare(s.b[n], GluedRegion::Gap, n, GluedRegion::Annulus, n + 1);
        else
            compare(s.b[n], GluedRegion::Gap, n, GluedRegion::Core, 0);
    }
    return worst;
}

std::vector<BandDistance> band_distances(const GluedMap& map, int grid) {
    if (grid < 2) throw PreconditionError("grid must be >= 2");
    const auto& s = map.schedule;
    std::vector<BandDistance> out;
    for (int n = 1; n <= s.depth; ++n) {
        BandDistance d;
        d.n = n;
        d.reference = 2.0 * (n + 1) / std::pow(4.0, n);
        const double y0 = s.b[n], y1 = s.a[n - 1];
        for (int j = 0; j <= grid; ++j) {
            const double y = y0 + (y1 - y0) * j / grid;
            for (int i = 0; i < grid; ++i) {
                const double x = static_cast<double>(i) / grid;
                const Vec2 w = map.lift_in({x, y}, GluedRegion::Gap, n);
                const double c0 = std::max(circle_dist(wrap01(w.x), wrap01(x + map.alpha)), std::fabs(w.y - y));
                const Mat2 J = map.jacobian({x, std::clamp(y, y0 + 1e-15, y1 - 1e-15)});
                const double c1 = std::max({std::fabs(J.a - 1.0), std::fabs(J.b), std::fabs(J.c), std::fabs(J.d - 1.0)});
                d.c0 = std::max(d.c0, c0);
                d.c1 = std::max(d.c1, std::max(c0, c1));
            }
        }
        out.push_back(d);
    }
    return out;
}

std::vector<int> cylinder_boxes(const BoxCover& cover, double half_height) {
    std::vector<int> out;
    for (int b = 0; b < static_cast<int>(cover.size()); ++b) {
        const Vec2 lo = cover.lo(b), hi = cover.hi(b);
        if (lo.y >= -half_height - 1e-12 && hi.y <= half_height + 1e-12) out.push_back(b);
    }
    return out;
}

bool ConditionReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.passed; });
}

std::string ConditionReport::to_json() const {
    nlohmann::ordered_json j;
    j["k"] = k;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json e;
        e["name"] = c.name;
        e["passed"] = c.passed;
        e["value"] = c.value;
        e["detail"] = c.detail;
        arr.push_back(e);
    }
    j["checks"] = arr;
    nlohmann::ordered_json t;
    t["kind"] = trap_kind_name(trap.kind);
    t["delta"] = trap.delta;
    t["effective_eps"] = trap.effective_eps;
    t["k_boxes"] = trap.k_boxes.size();
    t["u_boxes"] = trap.u_boxes.size();
    auto tested = nlohmann::ordered_json::array();
    for (auto [d, ok] : trap.tested) tested.push_back({{"delta", d}, {"certified", ok}});
    t["tested"] = tested;
    j["trap"] = t;
    j["notes"] = {"gaps between annuli are c_gap/n^2 rather than at least 1/n^2, so the schedule fits in [0, 1]",
                  "closeness to the rotation is measured in C0 and C1 only",
                  "the trap and horseshoe checks are box-scale computations, not proofs"};
    j["all_passed"] = all_passed();
    return j.dump(2) + "\n";
}

ConditionReport check_conditions(const GluedMap& map, int k, double eps, const ConditionOptions& opts) {
    const auto& s = map.schedule;
    if (k < 1 || k + 2 > s.depth) throw PreconditionError("need 1 <= k and k + 2 <= schedule depth");
    if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
    ConditionReport rep;
    rep.k = k;
    const int samples = 1000;

    {  // (1) boundary circles of every C_n and A_n are invariant
        double worst = 0.0;
        for (int n = 1; n <= s.depth; ++n)
            for (double y : {s.b[n - 1], s.a[n - 1]})
                for (int i = 0; i < samples; ++i) {
                    const double x = (i + 0.5) / samples;
                    worst = std::max({worst, std::fabs(map({x, y}).y - y), std::fabs(map({x, -y}).y + y)});
                }
        rep.checks.push_back({"invariant_circles", worst <= 1e-10, worst, "max |f(x, y)_2 - y| on boundary circles"});
    }
    {  // (2) normal hyperbolicity with alternating type
        bool ok = true;
        double worst = 0.0;
        for (int n = 1; n <= s.depth; ++n) {
            const double l = s.multiplier[n - 1];
            ok = ok && (l != 1.0) && ((l > 1.0) == s.repelling(n));
            for (double y : {s.b[n - 1], s.a[n - 1]}) {
                const double h = 1e-7 * s.width(n);
                const double sgn = y == s.b[n - 1] ? -1.0 : 1.0;  // differentiate from inside A_n
                const double d = (map({0.3, y + sgn * h}).y - map({0.3, y}).y) / (sgn * h);
                worst = std::max(worst, std::fabs(d - l));
            }
        }
        rep.checks.push_back({"normal_hyperbolicity", ok && worst < 1e-5, worst,
                              "multipliers alternate (odd annuli repelling); max transverse derivative error"});
    }
    {  // (3) rotation on the central circle
        double worst = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double x = (i + 0.5) / samples;
            const Vec2 w = map({x, 0.0});
            worst = std::max({worst, circle_dist(w.x, wrap01(x + map.alpha)), std::fabs(w.y)});
        }
        rep.checks.push_back({"rotation_on_core_circle", worst <= 1e-12, worst, "sup d(f(x, 0), (x + alpha, 0))"});
    }
    {  // horseshoe proxy for every annulus
        bool ok = true;
        for (const auto& m : map.models) {
            ok = ok && m.kappa > 1.0 && m.mu < 1.0;
            for (int i = -1; i <= 1; ++i)
                for (int j = -1; j <= 1; ++j) ok = ok && markov_covers(m, i, j);
        }
        rep.checks.push_back({"horseshoe_markov", ok, static_cast<double>(map.models.size()),
                              "full 3-shift covering relations and hyperbolic branch slopes in every annulus"});
    }
    {
        const double gap = gluing_continuity_gap(map);
        rep.checks.push_back({"gluing_continuity", gap <= 1e-12, gap, "max two-sided gap at region boundaries"});
    }
    {  // trap: C_k is a full trap for C_{k+2}
        const DynMap f = glued_dynmap(map);
        const BoxCover cover = build_cover(Window::annulus(-1.0, 1.0), opts.rho);
        const auto K = cylinder_boxes(cover, s.b[k + 1]);
        const auto U = cylinder_boxes(cover, s.b[k - 1]);
        rep.trap = verify_trap(f, cover, K, U, TrapKind::Full, opts.delta_grid, opts.graph);
        rep.checks.push_back({"full_trap", rep.trap.kind == TrapKind::Full, rep.trap.delta,
                              "C_" + std::to_string(k) + " full trap for C_" + std::to_string(k + 2) + " at rho " +
                                  std::to_string(opts.rho)});
    }
    {  // (6) first-coordinate shadowing inside A_k
        const FiniteCoverMap& cover = map.cover;
        const int window = static_cast<int>(opts.blocks * cover.m);
        const DynMap rot = rotation_map(map.alpha);
        const double lo = s.a[k - 1], h = s.width(k);
        double worst = 0.0, residual = 0.0;
        bool ok = true;
        std::mt19937_64 rng(opts.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int t = 0; t < opts.trials; ++t) {
            const PseudoOrbit p = generate_pseudo_orbit(rot, {unit(rng), 0.0}, cover.delta_bound(), window, rng());
            const ShadowConstruction sc = shadow_first_coordinate(cover, p, window);
            // Replay the orbit with the glued map inside A_k.
            Vec2 z{sc.z.x, lo + h * sc.z.y};
            for (int n = 0; n <= window; ++n) {
                worst = std::max(worst, circle_dist(z.x, p.points[static_cast<std::size_t>(n)].x));
                if (n < window) {
                    const Vec2 next{sc.orbit_x[static_cast<std::size_t>(n) + 1], 0.0};
                    const Vec2 fz = map(z);
                    residual = std::max(residual, circle_dist(fz.x, next.x));
                    z = {next.x, fz.y};
                }
            }
            ok = ok && sc.coarse_ok;
        }
        ok = ok && worst < eps && residual < 1e-9;
        rep.checks.push_back({"first_coordinate_shadowing", ok, worst,
                              "max deviation over " + std::to_string(opts.trials) + " trials of " + std::to_string(window) +
                                  " steps in A_" + std::to_string(k) + " against eps " + std::to_string(eps) +
                                  "; replay residual " + std::to_string(residual)});
    }
    return rep;
}

}  // namespace shadowlab
