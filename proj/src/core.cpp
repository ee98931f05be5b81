#include "shadowlab/core.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <random>
#include <sstream>

#include "shadowlab/kernels.hpp"

namespace shadowlab {

const char* space_name(Space s) {
    switch (s) {
        case Space::Line: return "line";
        case Space::Circle: return "circle";
        case Space::Plane: return "plane";
        case Space::Annulus: return "annulus";
        case Space::Torus: return "torus";
    }
    return "unknown";
}

int dimension(Space s) { return (s == Space::Line || s == Space::Circle) ? 1 : 2; }

double Mat2::norm_inf() const { return std::max(std::fabs(a) + std::fabs(b), std::fabs(c) + std::fabs(d)); }

double Mat2::norm2() const {
    // Largest singular value from the eigenvalues of M^T M.
    const double p = a * a + c * c;
    const double q = a * b + c * d;
    const double r = b * b + d * d;
    const double tr = p + r;
    const double disc = std::sqrt(std::max(0.0, (p - r) * (p - r) + 4.0 * q * q));
    return std::sqrt(std::max(0.0, 0.5 * (tr + disc)));
}

double wrap01(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;  // x slightly below an integer can round up to exactly 1
    return r;
}

double circle_dist(double x, double y) {
    double d = std::fabs(x - y);
    d = d - std::floor(d);
    return std::min(d, 1.0 - d);
}

double distance(Space s, Vec2 p, Vec2 q) {
    switch (s) {
        case Space::Line: return std::fabs(p.x - q.x);
        case Space::Circle: return circle_dist(p.x, q.x);
        case Space::Plane: return std::max(std::fabs(p.x - q.x), std::fabs(p.y - q.y));
        case Space::Annulus: return std::max(circle_dist(p.x, q.x), std::fabs(p.y - q.y));
        case Space::Torus: return std::max(circle_dist(p.x, q.x), circle_dist(p.y, q.y));
    }
    return 0.0;
}

Vec2 normalize(Space s, Vec2 p) {
    switch (s) {
        case Space::Line: return {p.x, 0.0};
        case Space::Circle: return {wrap01(p.x), 0.0};
        case Space::Plane: return p;
        case Space::Annulus: return {wrap01(p.x), p.y};
        case Space::Torus: return {wrap01(p.x), wrap01(p.y)};
    }
    return p;
}

Mat2 numeric_jacobian(const DynMap& f, Vec2 p, double h) {
    // Differences of the raw evaluation; circle coordinates are unwrapped against the center value.
    auto diff = [&](Vec2 plus, Vec2 minus) {
        Vec2 a = f.evaluate(plus);
        Vec2 b = f.evaluate(minus);
        double dx = a.x - b.x;
        double dy = a.y - b.y;
        if (f.space == Space::Circle || f.space == Space::Annulus || f.space == Space::Torus) dx -= std::round(dx);
        if (f.space == Space::Torus) dy -= std::round(dy);
        return Vec2{dx / (2.0 * h), dy / (2.0 * h)};
    };
    const Vec2 cx = diff({p.x + h, p.y}, {p.x - h, p.y});
    if (dimension(f.space) == 1) return {cx.x, 0.0, 0.0, 0.0};
    const Vec2 cy = diff({p.x, p.y + h}, {p.x, p.y - h});
    return {cx.x, cy.x, cx.y, cy.y};
}

PseudoOrbit generate_pseudo_orbit(const DynMap& f, Vec2 x0, double delta, int n, std::uint64_t seed) {
    if (!std::isfinite(x0.x) || !std::isfinite(x0.y)) throw PreconditionError("x0 must be finite");
    if (!(delta >= 0.0)) throw PreconditionError("delta must be >= 0");
    if (n < 1) throw PreconditionError("n must be >= 1");
    const int dim = dimension(f.space);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    PseudoOrbit out;
    out.space = f.space;
    out.points.reserve(static_cast<std::size_t>(n) + 1);
    out.points.push_back(normalize(f.space, x0));
    double recorded = 0.0;
    for (int k = 0; k < n; ++k) {
        const Vec2 image = f(out.points.back());
        double nx = delta * unit(rng);
        double ny = dim == 2 ? delta * unit(rng) : 0.0;
        Vec2 next = normalize(f.space, {image.x + nx, image.y + ny});
        double jump = distance(f.space, image, next);
        // Rounding in the wrap can push the jump a few ulps past delta; shrink the noise until it fits.
        while (jump > delta) {
            nx *= 0.5;
            ny *= 0.5;
            next = normalize(f.space, {image.x + nx, image.y + ny});
            jump = distance(f.space, image, next);
        }
        recorded = std::max(recorded, jump);
        out.points.push_back(next);
    }
    out.delta = recorded;
    return out;
}

std::vector<double> jumps(const PseudoOrbit& pseudo, const DynMap& f) {
    if (pseudo.points.size() < 2) throw PreconditionError("pseudo-orbit needs at least 2 points");
    std::vector<double> out(pseudo.points.size() - 1);
    for (std::size_t k = 0; k + 1 < pseudo.points.size(); ++k)
        out[k] = distance(f.space, f(pseudo.points[k]), pseudo.points[k + 1]);
    return out;
}

double max_jump(const PseudoOrbit& pseudo, const DynMap& f) {
    if (pseudo.points.size() < 2) throw PreconditionError("pseudo-orbit needs at least 2 points");
    const std::size_t n = pseudo.points.size() - 1;
    std::vector<double> ix(n), iy(n), px(n), py(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 img = f(pseudo.points[k]);
        ix[k] = img.x;
        iy[k] = img.y;
        px[k] = pseudo.points[k + 1].x;
        py[k] = pseudo.points[k + 1].y;
    }
    switch (f.space) {
        case Space::Line: return kernels::max_abs_diff(ix.data(), px.data(), n);
        case Space::Circle: return kernels::max_circle_dist(ix.data(), px.data(), n);
        case Space::Plane:
            return std::max(kernels::max_abs_diff(ix.data(), px.data(), n), kernels::max_abs_diff(iy.data(), py.data(), n));
        case Space::Annulus:
            return std::max(kernels::max_circle_dist(ix.data(), px.data(), n),
                            kernels::max_abs_diff(iy.data(), py.data(), n));
        case Space::Torus:
            return std::max(kernels::max_circle_dist(ix.data(), px.data(), n),
                            kernels::max_circle_dist(iy.data(), py.data(), n));
    }
    return 0.0;
}

void validate(const LiftContext& ctx) {
    if (!(ctx.eps0 > 0.0) || !(ctx.eps0 < 0.5))
        throw PreconditionError("eps0 must lie in (0, 1/2): half the minimal deck translation");
    if (ctx.kind == CoverKind::FiniteCircle && ctx.sheets < 2) throw PreconditionError("finite cover needs q >= 2 sheets");
}

Space base_space(const LiftContext& ctx) {
    switch (ctx.kind) {
        case CoverKind::UniversalLine: return Space::Circle;
        case CoverKind::Strip: return Space::Annulus;
        case CoverKind::Plane: return Space::Torus;
        case CoverKind::FiniteCircle: return Space::Circle;
    }
    return Space::Circle;
}

Vec2 project(const LiftContext& ctx, Vec2 p) {
    switch (ctx.kind) {
        case CoverKind::UniversalLine: return {wrap01(p.x), 0.0};
        case CoverKind::Strip: return {wrap01(p.x), p.y};
        case CoverKind::Plane: return {wrap01(p.x), wrap01(p.y)};
        case CoverKind::FiniteCircle: return {wrap01(static_cast<double>(ctx.sheets) * p.x), 0.0};
    }
    return p;
}

double cover_distance(const LiftContext& ctx, Vec2 p, Vec2 q) {
    switch (ctx.kind) {
        case CoverKind::UniversalLine: return std::fabs(p.x - q.x);
        case CoverKind::Strip:
        case CoverKind::Plane: return std::max(std::fabs(p.x - q.x), std::fabs(p.y - q.y));
        case CoverKind::FiniteCircle: return static_cast<double>(ctx.sheets) * circle_dist(p.x, q.x);
    }
    return 0.0;
}

namespace {
// The lift of `target` nearest to `near` among all deck translates.
Vec2 nearest_lift(const LiftContext& ctx, Vec2 target, Vec2 near) {
    switch (ctx.kind) {
        case CoverKind::UniversalLine: return {target.x + std::round(near.x - target.x), 0.0};
        case CoverKind::Strip: return {target.x + std::round(near.x - target.x), target.y};
        case CoverKind::Plane:
            return {target.x + std::round(near.x - target.x), target.y + std::round(near.y - target.y)};
        case CoverKind::FiniteCircle: {
            const double q = static_cast<double>(ctx.sheets);
            const double j = std::round(q * near.x - target.x);
            return {wrap01((target.x + j) / q), 0.0};
        }
    }
    return target;
}
}  // namespace

LiftedOrbit lift_pseudo_orbit(const PseudoOrbit& pseudo, const LiftContext& ctx, const DynMap& lifted_map, Vec2 base) {
    validate(ctx);
    if (pseudo.points.empty()) throw PreconditionError("empty pseudo-orbit");
    if (!(pseudo.delta < ctx.eps0)) throw PreconditionError("pseudo-orbit delta must be below eps0 for a unique lift");
    const Space bs = base_space(ctx);
    if (distance(bs, project(ctx, base), pseudo.points[0]) > 1e-9)
        throw PreconditionError("base point does not project to the first pseudo-orbit point");

    LiftedOrbit out;
    out.points.reserve(pseudo.points.size());
    out.points.push_back(base);
    for (std::size_t k = 0; k + 1 < pseudo.points.size(); ++k) {
        const Vec2 image = lifted_map.evaluate(out.points.back());
        const Vec2 next = nearest_lift(ctx, pseudo.points[k + 1], image);
        const double jump = cover_distance(ctx, image, next);
        if (!(jump < ctx.eps0)) throw PreconditionError("lift step exceeds eps0; lifted map inconsistent with pseudo-orbit");
        out.jumps.push_back(jump);
        out.delta = std::max(out.delta, jump);
        out.points.push_back(next);
    }
    return out;
}

std::optional<int> trace_growth_witness(const IntegerMatrix2& m, int n_max) {
    using boost::multiprecision::cpp_int;
    if (static_cast<cpp_int>(m.a) * m.d - static_cast<cpp_int>(m.b) * m.c != 1)
        throw PreconditionError("trace witness requires det = 1");
    cpp_int a = m.a, b = m.b, c = m.c, d = m.d;
    cpp_int pa = 1, pb = 0, pc = 0, pd = 1;
    for (int n = 1; n <= n_max; ++n) {
        const cpp_int na = pa * a + pb * c, nb = pa * b + pb * d;
        const cpp_int nc = pc * a + pd * c, nd = pc * b + pd * d;
        pa = na;
        pb = nb;
        pc = nc;
        pd = nd;
        if (pa + pd >= 2) return n;
    }
    return std::nullopt;
}

std::string pseudo_orbit_csv(const PseudoOrbit& pseudo, const DynMap& f) {
    std::ostringstream os;
    os << std::setprecision(17);
    const bool two = dimension(pseudo.space) == 2;
    os << (two ? "index,coord_1,coord_2,jump\n" : "index,coord_1,jump\n");
    for (std::size_t k = 0; k < pseudo.points.size(); ++k) {
        const double jump = k == 0 ? 0.0 : distance(f.space, f(pseudo.points[k - 1]), pseudo.points[k]);
        os << k << ',' << pseudo.points[k].x;
        if (two) os << ',' << pseudo.points[k].y;
        os << ',' << jump << '\n';
    }
    return os.str();
}

std::string pseudo_orbit_json(const PseudoOrbit& pseudo) {
    nlohmann::ordered_json j;
    j["space"] = space_name(pseudo.space);
    j["delta"] = pseudo.delta;
    auto pts = nlohmann::ordered_json::array();
    const bool two = dimension(pseudo.space) == 2;
    for (const Vec2& p : pseudo.points) {
        if (two)
            pts.push_back({p.x, p.y});
        else
            pts.push_back({p.x});
    }
    j["points"] = std::move(pts);
    return j.dump(2);
}

PseudoOrbit pseudo_orbit_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    PseudoOrbit out;
    const std::string s = j.at("space").get<std::string>();
    const Space all[] = {Space::Line, Space::Circle, Space::Plane, Space::Annulus, Space::Torus};
    bool found = false;
    for (Space c : all)
        if (s == space_name(c)) {
            out.space = c;
            found = true;
        }
    if (!found) throw PreconditionError("unknown space tag: " + s);
    out.delta = j.at("delta").get<double>();
    for (const auto& p : j.at("points")) {
        Vec2 v;
        v.x = p.at(0).get<double>();
        if (p.size() > 1) v.y = p.at(1).get<double>();
        out.points.push_back(v);
    }
    return out;
}

}  // namespace shadowlab
