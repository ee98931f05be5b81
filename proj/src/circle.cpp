#include "shadowlab/circle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace shadowlab {

namespace {

// Root of an increasing function g on [lo, hi] with g(lo) <= 0 <= g(hi), to the last bit.
double bisect_increasing(const std::function<double(double)>& g, double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (g(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return std::fabs(g(lo)) <= std::fabs(g(hi)) ? lo : hi;
}

// Sign of the derivative on a grid: +1, -1, or 0 when it vanishes or changes sign.
int derivative_sign(const CircleEndomorphism& f, int grid) {
    bool pos = false, neg = false;
    for (int i = 0; i < grid; ++i) {
        const double d = f.derivative(static_cast<double>(i) / grid);
        if (d > 0.0)
            pos = true;
        else if (d < 0.0)
            neg = true;
        else
            return 0;
    }
    if (pos && neg) return 0;
    return pos ? 1 : -1;
}

struct Interval {
    double lo = 0.0, hi = 0.0;
};

// Hull of F over [lo, hi]: endpoints plus every lifted turning point inside.
Interval image(const CircleEndomorphism& f, const std::vector<TurningPoint>& turning, Interval in) {
    double lo = f.lift(in.lo), hi = lo;
    const double v = f.lift(in.hi);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    for (const auto& tp : turning) {
        for (double c = tp.location + std::ceil(in.lo - tp.location); c < in.hi; c += 1.0) {
            if (c <= in.lo) continue;
            const double w = f.lift(c);
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
    }
    return {lo, hi};
}

// Integer shift m with [j.lo - m, j.hi - m] strictly inside (i.lo, i.hi), if any.
bool strictly_inside(Interval j, Interval i) {
    const double m = std::floor(j.lo - i.lo);
    for (double s : {m, m + 1.0}) {
        if (j.lo - s > i.lo && j.hi - s < i.hi) return true;
    }
    return false;
}

// Turning locations are only known to the bisection tolerance, hence the slack.
int turning_hit(const std::vector<TurningPoint>& turning, Interval j) {
    const double slack = 1e-12;
    for (size_t k = 0; k < turning.size(); ++k) {
        const double c = turning[k].location + std::ceil(j.lo - slack - turning[k].location);
        if (c <= j.hi + slack) return static_cast<int>(k);
    }
    return -1;
}

// The interval I = (sibling, z) around turning point `index`.
Interval turning_interval(const CircleEndomorphism& f, const std::vector<TurningPoint>& turning, int index,
                          double eps, double* sibling_out) {
    const int n = static_cast<int>(turning.size());
    const double c = turning[index].location;
    const double next = index + 1 < n ? turning[index + 1].location : turning[0].location + 1.0;
    const double prev = index > 0 ? turning[index - 1].location : turning[n - 1].location - 1.0;
    if (!(eps > 0.0) || c + eps >= next) throw PreconditionError("turning escape: eps exceeds the injective neighbourhood");
    const double z = c + eps;
    const double target = f.lift(z);
    const double fc = f.lift(c), fp = f.lift(prev);
    // F is monotone on [prev, c]; the sibling lies there when target is between F(prev) and F(c).
    const double sgn = fc > fp ? 1.0 : -1.0;
    if (!(sgn * (target - fp) >= 0.0 && sgn * (fc - target) >= 0.0))
        throw PreconditionError("turning escape: eps exceeds the injective neighbourhood");
    const double s = bisect_increasing([&](double x) { return sgn * (f.lift(x) - target); }, prev, c);
    if (sibling_out) *sibling_out = s;
    return {s, z};
}

struct Walk {
    int hit_step = -1;
    int hit_turning = -1;
    double diameter = 0.0;
    bool wrapped = false;
    int containment_step = -1;
};

Walk walk_interval(const CircleEndomorphism& f, const std::vector<TurningPoint>& turning, Interval start,
                   int j_max) {
    Walk w;
    Interval cur = start;
    for (int j = 1; j <= j_max; ++j) {
        cur = image(f, turning, cur);
        if (cur.hi - cur.lo >= 1.0) {
            w.wrapped = true;
            w.diameter = cur.hi - cur.lo;
            return w;
        }
        if (w.containment_step < 0 && strictly_inside(cur, start)) w.containment_step = j;
        const int k = turning_hit(turning, cur);
        if (k >= 0) {
            w.hit_step = j;
            w.hit_turning = k;
            w.diameter = cur.hi - cur.lo;
            return w;
        }
    }
    w.diameter = cur.hi - cur.lo;
    return w;
}

std::pair<int, std::vector<double>> anchor_cuts(const CircleEndomorphism& f, double anchor) {
    const int d = f.degree;
    const long long k0 = std::llround(f.lift(anchor) - anchor);
    std::vector<double> cuts;
    for (int j = 1; j < d; ++j) {
        const double target = anchor + static_cast<double>(k0 + j);
        cuts.push_back(bisect_increasing([&](double x) { return f.lift(x) - target; }, anchor, anchor + 1.0));
    }
    return {static_cast<int>(k0), cuts};
}

double itinerary_value(const CircleEndomorphism& f, double anchor, long long k0, const std::vector<double>& cuts,
                       int depth, double x) {
    const double top = std::nextafter(anchor + 1.0, anchor);
    double y = anchor + wrap01(x - anchor);
    const double d = f.degree;
    double scale = 1.0 / d, value = 0.0;
    for (int k = 0; k < depth; ++k) {
        const int digit = static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), y) - cuts.begin());
        value += digit * scale;
        scale /= d;
        y = f.lift(y) - static_cast<double>(k0 + digit);
        y = std::clamp(y, anchor, top);
    }
    return value;
}

}  // namespace

int degree(const DynMap& f) {
    if (dimension(f.space) != 1 || !f.lift_evaluate) throw PreconditionError("degree needs a circle map with a lift");
    const double w = f.lift_evaluate({1.0, 0.0}).x - f.lift_evaluate({0.0, 0.0}).x;
    const double r = std::round(w);
    if (std::fabs(w - r) > 1e-6) throw PreconditionError("lift is inconsistent: F(1) - F(0) is not an integer");
    return static_cast<int>(r);
}

CircleEndomorphism circle_from_lift(std::string name, std::function<double(double)> lift,
                                    std::function<double(double)> derivative) {
    CircleEndomorphism f;
    f.name = std::move(name);
    f.lift = std::move(lift);
    f.derivative = std::move(derivative);
    const double w = f.lift(1.0) - f.lift(0.0);
    const double r = std::round(w);
    if (std::fabs(w - r) > 1e-6) throw PreconditionError("lift is inconsistent: F(1) - F(0) is not an integer");
    f.degree = static_cast<int>(r);
    return f;
}

CircleEndomorphism circle_endomorphism(const DynMap& f) {
    if (!f.jacobian) throw PreconditionError("circle map needs a derivative");
    const int d = degree(f);
    CircleEndomorphism g;
    g.name = f.name;
    auto lift = f.lift_evaluate;
    auto jac = f.jacobian;
    g.lift = [lift](double x) { return lift({x, 0.0}).x; };
    g.derivative = [jac](double x) { return jac({x, 0.0}).a; };
    g.degree = d;
    return g;
}

DynMap to_dynmap(const CircleEndomorphism& f) {
    DynMap m;
    m.space = Space::Circle;
    m.name = f.name;
    auto F = f.lift;
    auto dF = f.derivative;
    m.evaluate = [F](Vec2 p) { return Vec2{wrap01(F(p.x)), 0.0}; };
    m.jacobian = [dF](Vec2 p) { return Mat2{dF(p.x), 0.0, 0.0, 0.0}; };
    m.lift_evaluate = [F](Vec2 p) { return Vec2{F(p.x), 0.0}; };
    double lip = 0.0;
    for (int i = 0; i <= 4096; ++i) lip = std::max(lip, std::fabs(dF(i / 4096.0)));
    m.lipschitz_bound = 1.02 * lip;
    if (f.degree >= 1 && derivative_sign(f, 4096) > 0) {
        const double f0 = F(0.0);
        for (int j = 0; j < f.degree; ++j) {
            m.inverse_branches.push_back([F, f0, j](Vec2 p) {
                const double target = f0 + wrap01(p.x - f0) + j;
                return Vec2{wrap01(bisect_increasing([&](double x) { return F(x) - target; }, 0.0, 1.0)), 0.0};
            });
        }
    }
    return m;
}

TurningScan turning_points(const CircleEndomorphism& f, int grid, double tol) {
    if (grid < 4) throw PreconditionError("turning points: grid must have at least 4 cells");
    TurningScan scan;
    std::vector<double> d(grid + 1);
    for (int i = 0; i <= grid; ++i) d[i] = f.derivative(static_cast<double>(i) / grid);
    std::vector<int> cells;
    for (int i = 0; i < grid; ++i) {
        if ((d[i] < 0.0) == (d[i + 1] < 0.0)) continue;
        cells.push_back(i);
        double lo = static_cast<double>(i) / grid, hi = static_cast<double>(i + 1) / grid;
        const bool falling = d[i] >= 0.0;
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if ((f.derivative(mid) < 0.0) == falling)
                hi = mid;
            else
                lo = mid;
        }
        TurningPoint tp;
        tp.location = wrap01(0.5 * (lo + hi));
        tp.kind = falling ? TurningKind::Max : TurningKind::Min;
        const double h = 1e-5;
        tp.second_derivative = (f.derivative(tp.location + h) - f.derivative(tp.location - h)) / (2.0 * h);
        scan.points.push_back(tp);
    }
    for (size_t k = 0; k < cells.size() && cells.size() > 1; ++k) {
        const int a = cells[k], b = cells[(k + 1) % cells.size()];
        const int gap = ((b - a) % grid + grid) % grid;
        if (gap < 2) scan.grid_too_coarse = true;
    }
    std::sort(scan.points.begin(), scan.points.end(),
              [](const TurningPoint& a, const TurningPoint& b) { return a.location < b.location; });
    return scan;
}

ExpandingEstimate expanding_estimate(const CircleEndomorphism& f, int n, int grid) {
    if (n < 1 || grid < 1) throw PreconditionError("expanding estimate: n and grid must be positive");
    if (derivative_sign(f, grid) == 0) throw PreconditionError("not a local homeomorphism: derivative vanishes on the grid");
    std::vector<double> logs(static_cast<size_t>(grid) * n);
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
        double y = static_cast<double>(i) / grid, acc = 0.0;
        for (int k = 0; k < n; ++k) {
            const double d = std::fabs(f.derivative(y));
            if (!(d > 0.0)) throw PreconditionError("not a local homeomorphism: derivative vanishes along an orbit");
            acc += std::log(d);
            logs[static_cast<size_t>(i) * n + k] = acc;
            y = f(y);
        }
        worst = std::min(worst, acc);
    }
    ExpandingEstimate est;
    const double log_lambda = worst / n;
    est.lambda = std::exp(log_lambda);
    double c = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i)
        for (int k = 0; k < n; ++k) c = std::min(c, logs[static_cast<size_t>(i) * n + k] - (k + 1) * log_lambda);
    est.constant = std::exp(c);
    return est;
}

double smallest_fixed_point(const CircleEndomorphism& f, int grid) {
    auto g = [&](double x) { return f.lift(x) - x; };
    double ga = g(0.0);
    for (int i = 0; i < grid; ++i) {
        const double a = static_cast<double>(i) / grid, b = static_cast<double>(i + 1) / grid;
        const double gb = g(b);
        if (ga == std::floor(ga)) return a;
        if (std::floor(ga) != std::floor(gb)) {
            const double m = gb > ga ? std::floor(ga) + 1.0 : std::floor(ga);
            const double s = gb > ga ? 1.0 : -1.0;
            const double r = bisect_increasing([&](double x) { return s * (g(x) - m); }, a, b);
            return wrap01(r);
        }
        ga = gb;
    }
    throw PreconditionError("no fixed point found");
}

double SemiconjugacyTable::evaluate(const CircleEndomorphism& f, double x) const {
    const long long k0 = std::llround(f.lift(anchor) - anchor);
    return itinerary_value(f, anchor, k0, cuts, depth, x);
}

SemiconjugacyTable semiconjugacy(const CircleEndomorphism& f, int depth, int resolution_bits, int defect_samples) {
    if (f.degree < 2) throw PreconditionError("semiconjugacy needs an orientation-preserving map of degree >= 2");
    if (depth < 1 || resolution_bits < 1 || resolution_bits > 24 || defect_samples < 1)
        throw PreconditionError("semiconjugacy: bad depth or resolution");
    if (derivative_sign(f, 4096) <= 0) throw PreconditionError("semiconjugacy needs an increasing local homeomorphism");
    SemiconjugacyTable t;
    t.degree = f.degree;
    t.depth = depth;
    t.anchor = smallest_fixed_point(f);
    auto [k0, cuts] = anchor_cuts(f, t.anchor);
    t.cuts = cuts;
    const int size = 1 << resolution_bits;
    t.x.resize(size);
    t.h.resize(size);
    for (int i = 0; i < size; ++i) {
        t.x[i] = t.anchor + static_cast<double>(i) / size;
        t.h[i] = itinerary_value(f, t.anchor, k0, t.cuts, depth, t.x[i]);
    }
    t.monotone = true;
    for (int i = 0; i + 1 < size; ++i) {
        if (t.h[i + 1] < t.h[i]) t.monotone = false;
        if (t.h[i + 1] == t.h[i]) ++t.interval_fibers;
    }
    for (int i = 0; i < defect_samples; ++i) {
        const double x = (i + 0.5) / defect_samples;
        const double hx = itinerary_value(f, t.anchor, k0, t.cuts, depth, x);
        const double hfx = itinerary_value(f, t.anchor, k0, t.cuts, depth, f(x));
        t.defect = std::max(t.defect, circle_dist(hfx, wrap01(t.degree * hx)));
    }
    return t;
}

TurningEscape turning_interval_escape(const CircleEndomorphism& f, const TurningScan& turning, int index, double eps,
                                      int j_max) {
    const auto& tps = turning.points;
    if (index < 0 || index >= static_cast<int>(tps.size())) throw PreconditionError("turning escape: no such turning point");
    if (j_max < 1) throw PreconditionError("turning escape: j_max must be positive");
    TurningEscape r;
    r.turning_index = index;
    const double c = tps[index].location;
    const Interval start = turning_interval(f, tps, index, eps, &r.sibling);
    r.start = start.hi;
    r.jump = circle_dist(f(r.start), f(c));
    const Walk w = walk_interval(f, tps, start, j_max);
    r.hit_step = w.hit_step;
    r.hit_turning = w.hit_turning;
    r.hit_diameter = w.diameter;
    r.wrapped = w.wrapped;
    r.containment_step = w.containment_step;
    if (r.hit_turning < 0) return r;

    // Follow tau(i) = turning point hit from I_i until an index repeats.
    const int n = static_cast<int>(tps.size());
    std::vector<int> tau(n, -2), steps(n, 0);
    auto step_of = [&](int i) {
        if (tau[i] == -2) {
            try {
                const Walk wi = walk_interval(f, tps, turning_interval(f, tps, i, eps, nullptr), j_max);
                tau[i] = wi.hit_turning;
                steps[i] = wi.hit_step;
            } catch (const PreconditionError&) {
                tau[i] = -1;
            }
        }
        return tau[i];
    };
    std::vector<int> path{index};
    std::vector<int> seen(n, -1);
    seen[index] = 0;
    int cur = index;
    while (true) {
        const int next = step_of(cur);
        if (next < 0) return r;
        if (seen[next] >= 0) {
            r.cycle.assign(path.begin() + seen[next], path.end());
            break;
        }
        seen[next] = static_cast<int>(path.size());
        path.push_back(next);
        cur = next;
    }
    for (int i : r.cycle) r.cycle_period += steps[i];
    const Interval first = turning_interval(f, tps, r.cycle.front(), eps, nullptr);
    Interval img = first;
    bool wrapped = false;
    for (int j = 0; j < r.cycle_period; ++j) {
        img = image(f, tps, img);
        if (img.hi - img.lo >= 1.0) {
            wrapped = true;
            break;
        }
    }
    r.cycle_certified = !wrapped && strictly_inside(img, first);
    return r;
}

PeriodicParameter periodic_parameter(const CircleEndomorphism& f, double x, double eps, int n_max) {
    if (!(eps > 0.0)) throw PreconditionError("periodic parameter: eps must be positive");
    if (f.degree < 2 || derivative_sign(f, 4096) <= 0)
        throw PreconditionError("periodic parameter needs an increasing local homeomorphism of degree >= 2");
    auto orbit = [&](double t, int n) {
        double y = x;
        for (int k = 0; k < n; ++k) y = f.shifted_lift(y, t);
        return y - x;
    };
    for (int n = 1; n <= n_max; ++n) {
        const double g0 = orbit(0.0, n), g1 = orbit(eps, n);
        const double m = std::floor(g0) + 1.0;
        if (!(m < g1)) continue;
        PeriodicParameter r;
        r.n = n;
        r.m = static_cast<long long>(m);
        r.t = bisect_increasing([&](double t) { return orbit(t, n) - m; }, 0.0, eps);
        r.residual = std::fabs(orbit(r.t, n) - m);
        for (int i = 0; i < 1000; ++i) {
            const double z = (i + 0.5) / 1000.0;
            const double t = r.t * ((i % 10) + 1) / 10.0;
            const int k = 1 + i % n;
            double a = z, b = z;
            for (int s = 0; s < k; ++s) {
                a = f.shifted_lift(a, t);
                b = f.lift(b);
            }
            ++r.audit_samples;
            if (a < b + t) ++r.audit_failures;
        }
        return r;
    }
    throw std::runtime_error("periodic parameter: no covering within the iteration budget");
}

std::string semiconjugacy_json(const SemiconjugacyTable& s) {
    nlohmann::json j;
    j["degree"] = s.degree;
    j["depth"] = s.depth;
    j["anchor"] = s.anchor;
    j["cuts"] = s.cuts;
    j["defect"] = s.defect;
    j["monotone"] = s.monotone;
    j["interval_fibers"] = s.interval_fibers;
    j["injective_on_samples"] = s.interval_fibers == 0;
    j["transitivity_asserted"] = s.transitivity_asserted;
    j["samples"] = s.x.size();
    return j.dump(2);
}

std::string turning_escape_json(const TurningEscape& e) {
    nlohmann::json j;
    j["turning_index"] = e.turning_index;
    j["start"] = e.start;
    j["sibling"] = e.sibling;
    j["jump"] = e.jump;
    j["hit_step"] = e.hit_step;
    j["hit_turning"] = e.hit_turning;
    j["hit_diameter"] = e.hit_diameter;
    j["escaped_full_circle"] = e.wrapped;
    j["containment_step"] = e.containment_step;
    j["cycle"] = e.cycle;
    j["cycle_period"] = e.cycle_period;
    j["cycle_certified"] = e.cycle_certified;
    return j.dump(2);
}

std::string periodic_parameter_json(const PeriodicParameter& p) {
    nlohmann::json j;
    j["t"] = p.t;
    j["n"] = p.n;
    j["m"] = p.m;
    j["residual"] = p.residual;
    j["audit_samples"] = p.audit_samples;
    j["audit_failures"] = p.audit_failures;
    return j.dump(2);
}

}  // namespace shadowlab
