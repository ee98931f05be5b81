#include "shadowlab/maps.hpp"

#include <cmath>
#include <numbers>
#include <algorithm>
#include <regex>

#include "shadowlab/crooked.hpp"
#include "shadowlab/example_b.hpp"

namespace shadowlab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Solves F(x) = target on [lo, hi] for increasing F by safeguarded Newton.
double solve_increasing(const std::function<double(double)>& F, const std::function<double(double)>& dF,
                        double target, double lo, double hi) {
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double v = F(x) - target;
        if (v > 0.0)
            hi = x;
        else
            lo = x;
        const double d = dF(x);
        double nx = d > 0.0 ? x - v / d : 0.5 * (lo + hi);
        if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
        if (std::fabs(nx - x) < 1e-17 || hi - lo < 1e-16) return nx;
        x = nx;
    }
    return x;
}
}  // namespace

DynMap linear_expanding_map(int d) {
    if (d == 0) throw PreconditionError("degree 0 is not an expanding map");
    DynMap f;
    f.space = Space::Circle;
    f.name = "E" + std::to_string(d);
    const double dd = static_cast<double>(d);
    f.evaluate = [dd](Vec2 p) { return Vec2{wrap01(dd * p.x), 0.0}; };
    f.jacobian = [dd](Vec2) { return Mat2{dd, 0.0, 0.0, 0.0}; };
    f.lipschitz_bound = std::fabs(dd);
    f.lift_evaluate = [dd](Vec2 p) { return Vec2{dd * p.x, 0.0}; };
    const int ad = std::abs(d);
    for (int j = 0; j < ad; ++j) {
        f.inverse_branches.push_back([dd, j](Vec2 p) { return Vec2{wrap01((p.x + j) / dd), 0.0}; });
    }
    return f;
}

DynMap rotation_map(double alpha) {
    DynMap f;
    f.space = Space::Circle;
    f.name = "rot:" + std::to_string(alpha);
    f.evaluate = [alpha](Vec2 p) { return Vec2{wrap01(p.x + alpha), 0.0}; };
    f.jacobian = [](Vec2) { return Mat2{1.0, 0.0, 0.0, 0.0}; };
    f.lipschitz_bound = 1.0;
    f.lift_evaluate = [alpha](Vec2 p) { return Vec2{p.x + alpha, 0.0}; };
    f.inverse_branches.push_back([alpha](Vec2 p) { return Vec2{wrap01(p.x - alpha), 0.0}; });
    return f;
}

DynMap trig_map(double a0, double a1, double b) {
    if (std::fabs(a1 - std::round(a1)) > 1e-12) throw PreconditionError("trig map: coefficient of x must be an integer");
    DynMap f;
    f.space = Space::Circle;
    f.name = "trig";
    auto F = [a0, a1, b](double x) { return a0 + a1 * x + b * std::sin(kTwoPi * x); };
    auto dF = [a1, b](double x) { return a1 + kTwoPi * b * std::cos(kTwoPi * x); };
    f.evaluate = [F](Vec2 p) { return Vec2{wrap01(F(p.x)), 0.0}; };
    f.jacobian = [dF](Vec2 p) { return Mat2{dF(p.x), 0.0, 0.0, 0.0}; };
    f.lipschitz_bound = std::fabs(a1) + kTwoPi * std::fabs(b);
    f.lift_evaluate = [F](Vec2 p) { return Vec2{F(p.x), 0.0}; };
    const int d = static_cast<int>(std::lround(a1));
    // Inverse branches exist when F is a increasing covering of degree d >= 1.
    if (d >= 1 && a1 - kTwoPi * std::fabs(b) > 0.0) {
        for (int j = 0; j < d; ++j) {
            f.inverse_branches.push_back([F, dF, a0, j](Vec2 p) {
                const double target = a0 + wrap01(p.x - a0) + j;
                return Vec2{wrap01(solve_increasing(F, dF, target, 0.0, 1.0)), 0.0};
            });
        }
    }
    return f;
}

DynMap north_south_map() {
    DynMap f = trig_map(0.0, 1.0, 0.1);
    f.name = "northsouth";
    return f;
}

DynMap identity_map(Space s) {
    DynMap f;
    f.space = s;
    f.name = "identity";
    f.evaluate = [s](Vec2 p) { return normalize(s, p); };
    f.jacobian = [s](Vec2) { return dimension(s) == 1 ? Mat2{1.0, 0.0, 0.0, 0.0} : Mat2::identity(); };
    f.lipschitz_bound = 1.0;
    f.lift_evaluate = [](Vec2 p) { return p; };
    return f;
}

DynMap annulus_contraction(double alpha, double factor) {
    DynMap f;
    f.space = Space::Annulus;
    f.name = "contraction";
    f.evaluate = [alpha, factor](Vec2 p) { return Vec2{wrap01(p.x + alpha), factor * p.y}; };
    f.jacobian = [factor](Vec2) { return Mat2{1.0, 0.0, 0.0, factor}; };
    f.lipschitz_bound = std::max(1.0, std::fabs(factor));
    f.lift_evaluate = [alpha, factor](Vec2 p) { return Vec2{p.x + alpha, factor * p.y}; };
    return f;
}

DynMap linear_plane_map(double ex, double cy) {
    DynMap f;
    f.space = Space::Plane;
    f.name = "hyperbolic";
    f.evaluate = [ex, cy](Vec2 p) { return Vec2{ex * p.x, cy * p.y}; };
    f.jacobian = [ex, cy](Vec2) { return Mat2{ex, 0.0, 0.0, cy}; };
    f.lipschitz_bound = std::max(std::fabs(ex), std::fabs(cy));
    f.lift_evaluate = f.evaluate;
    return f;
}

std::function<Mat2(Vec2, Vec2)> sampled_derivative_bound(std::function<Mat2(Vec2)> jacobian,
                                                         std::vector<double> x_breaks, double x_period,
                                                         std::vector<double> y_breaks, int grid, double safety) {
    if (grid < 2) throw PreconditionError("derivative grid needs >= 2 points per side");
    return [jacobian = std::move(jacobian), x_breaks = std::move(x_breaks), x_period, y_breaks = std::move(y_breaks),
            grid, safety](Vec2 lo, Vec2 hi) {
        std::vector<double> xs, ys;
        for (int i = 0; i < grid; ++i) {
            xs.push_back(lo.x + (hi.x - lo.x) * i / (grid - 1));
            ys.push_back(lo.y + (hi.y - lo.y) * i / (grid - 1));
        }
        const double ex = 1e-9 * std::max(hi.x - lo.x, 1e-12), ey = 1e-9 * std::max(hi.y - lo.y, 1e-12);
        if (x_period > 0.0) {
            const long long k0 = static_cast<long long>(std::floor(lo.x / x_period));
            const long long k1 = static_cast<long long>(std::floor(hi.x / x_period));
            for (long long k = k0; k <= k1; ++k)
                for (double b : x_breaks) {
                    const double x = b + static_cast<double>(k) * x_period;
                    if (x > lo.x && x < hi.x) {
                        xs.push_back(std::max(lo.x, x - ex));
                        xs.push_back(std::min(hi.x, x + ex));
                    }
                }
        }
        for (double b : y_breaks)
            if (b > lo.y && b < hi.y) {
                ys.push_back(std::max(lo.y, b - ey));
                ys.push_back(std::min(hi.y, b + ey));
            }
        Mat2 m{};
        for (double y : ys)
            for (double x : xs) {
                const Mat2 j = jacobian({x, y});
                m.a = std::max(m.a, std::fabs(j.a));
                m.b = std::max(m.b, std::fabs(j.b));
                m.c = std::max(m.c, std::fabs(j.c));
                m.d = std::max(m.d, std::fabs(j.d));
            }
        return Mat2{m.a * safety, m.b * safety, m.c * safety, m.d * safety};
    };
}

DynMap parse_map_spec(const std::string& spec) {
    static const std::regex linear(R"(^E(-?[0-9]+)$)");
    static const std::regex rot(R"(^rot:([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)$)");
    static const std::string num = R"(([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?))";
    static const std::regex trig("^trig:" + num + R"(\+)" + num + R"(\*x(\+|-|\+-))" + R"(([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?))" +
                                 R"(\*sin\(2\*pi\*x\)$)");
    std::smatch m;
    if (std::regex_match(spec, m, linear)) return linear_expanding_map(std::stoi(m[1].str()));
    if (std::regex_match(spec, m, rot)) {
        DynMap f = rotation_map(std::stod(m[1].str()));
        f.name = spec;
        return f;
    }
    if (std::regex_match(spec, m, trig)) {
        const double a0 = std::stod(m[1].str());
        const double a1 = std::stod(m[2].str());
        double b = std::stod(m[4].str());
        if (m[3].str() != "+") b = -b;
        DynMap f = trig_map(a0, a1, b);
        f.name = spec;
        return f;
    }
    if (spec == "northsouth") return north_south_map();
    if (spec == "identity") return identity_map(Space::Circle);
    if (spec == "hyperbolic") return linear_plane_map(2.0, 0.5);
    if (spec == "contraction") return annulus_contraction(0.3, 0.5);
    if (spec == "crooked") return crooked_dynmap(build_crooked_model(0.15, 6.0));
    if (spec == "example-b") return glued_dynmap(build_glued_map(build_schedule(4, 0.5), GluedParams{}));
    throw PreconditionError("unknown map spec: " + spec);
}

}  // namespace shadowlab
