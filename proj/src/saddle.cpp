#include "shadowlab/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "shadowlab/example_b.hpp"
#include "shadowlab/svg.hpp"

namespace shadowlab {

SaddleLoopModel build_saddle_model(double sigma, double gamma, double b, double b_mid, double c1, double c2,
                                   double b_end, int smoothness, double a) {
    SaddleLoopModel m;
    if (!(sigma > 1.0)) throw PreconditionError("saddle: sigma must exceed 1");
    if (smoothness < 1) throw PreconditionError("saddle: smoothness must be positive");
    if (!(gamma > std::max(3.0 * smoothness, 6.0))) throw PreconditionError("saddle: gamma must exceed max(3r, 6)");
    m.sigma = sigma;
    m.gamma = gamma;
    m.smoothness = smoothness;
    m.lambda = std::pow(sigma, -gamma);
    if (!(m.lambda * sigma < 1.0)) throw PreconditionError("saddle: lambda sigma must be below 1");
    m.b = b;
    m.b_mid = b_mid;
    m.b_end = b_end > 0.0 ? b_end : sigma * b;
    if (!(0.0 < b && b < b_mid && b_mid < m.b_end && m.b_end < 0.5))
        throw PreconditionError("saddle: need 0 < b < b'' < b' < 1/2");
    if (!(b < c1 && c1 < b_mid && b_mid < c2 && c2 < m.b_end))
        throw PreconditionError("saddle: need c1 in (b, b'') and c2 in (b'', b')");
    m.c1 = c1;
    m.c2 = c2;
    m.pitch = c2 / c1 - 1.0;
    if (!(a > 0.0 && a <= 0.5)) throw PreconditionError("saddle: a must lie in (0, 1/2]");
    m.a = a;
    m.fu_slope = -a * (1.0 - m.lambda) / (m.b_end - m.b);
    return m;
}

// ---------------------------------------------------------------------------------------------
// Bump profiles

namespace {

struct OuterEval {
    double d0, d1, d2;  // D, dD/du, d2D/du2
};

OuterEval outer_eval(const BumpPiece& p, double kappa, double u) {
    const double L = p.length, s = u / L;
    const double k = p.k, m = p.m;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    OuterEval e;
    e.d0 = p.top - p.slope0 * u -
           L * L * (kappa * s2 / 2.0 + (k - kappa) * s3 / 6.0 + (m - k) * s4 / 12.0 - m * s5 / 20.0);
    e.d1 = -p.slope0 - L * (kappa * s + (k - kappa) * s2 / 2.0 + (m - k) * s3 / 3.0 - m * s4 / 4.0);
    e.d2 = -(kappa + (k - kappa) * s + (m - k) * s2 - m * s3);
    return e;
}

const BumpPiece* find_piece(const BumpProfile& prof, double y) {
    if (prof.pieces.empty() || y < prof.lo || y > prof.hi) return nullptr;
    for (const auto& p : prof.pieces)
        if (y <= p.hi) return &p;
    return &prof.pieces.back();
}

// Value, first and second derivative at y.
std::array<double, 3> bump_eval(const BumpProfile& prof, double y) {
    const BumpPiece* p = find_piece(prof, y);
    if (!p) return {0.0, 0.0, 0.0};
    if (p->core) {
        const double d = y - p->origin;
        return {p->sign * (p->top - 0.5 * prof.curvature * d * d), -p->sign * prof.curvature * d,
                -p->sign * prof.curvature};
    }
    const double u = p->direction * (y - p->origin);
    const OuterEval e = outer_eval(*p, prof.curvature, u);
    return {p->sign * e.d0, p->sign * p->direction * e.d1, p->sign * e.d2};
}

BumpPiece outer_piece(double sign, double origin, double direction, double top, double slope0, double length) {
    BumpPiece p;
    p.core = false;
    p.sign = sign;
    p.origin = origin;
    p.direction = direction;
    p.top = top;
    p.slope0 = slope0;
    p.length = length;
    if (direction > 0) {
        p.lo = origin;
        p.hi = origin + length;
    } else {
        p.lo = origin - length;
        p.hi = origin;
    }
    return p;
}

// K for the one-parameter family (M = 0) reaching zero at the far end.
void solve_one(BumpPiece& p, double kappa) {
    const double P = (p.top - p.slope0 * p.length) / (p.length * p.length);
    p.k = 12.0 * (P - kappa / 3.0);
    p.m = 0.0;
}

double end_slope(const BumpPiece& p, double kappa) {
    return p.slope0 + p.length * (kappa / 2.0 + p.k / 6.0 + p.m / 12.0);
}

// K, M reaching zero at the far end with |slope| = target there.
void solve_two(BumpPiece& p, double kappa, double target) {
    const double P = (p.top - p.slope0 * p.length) / (p.length * p.length);
    const double Q = (target - p.slope0) / p.length;
    p.m = 60.0 * (Q - 2.0 * P + kappa / 6.0);
    p.k = 12.0 * (P - kappa / 3.0 - p.m / 30.0);
}

bool concave_shape(const BumpPiece& p, double kappa) {
    for (int i = 0; i <= 1000; ++i) {
        const double s = i / 1000.0;
        if (!(kappa + p.k * s + p.m * s * s > 0.0)) return false;
    }
    return true;
}

}  // namespace

double BumpProfile::value(double y) const { return bump_eval(*this, y)[0]; }
double BumpProfile::d1(double y) const { return bump_eval(*this, y)[1]; }
double BumpProfile::d2(double y) const { return bump_eval(*this, y)[2]; }

BumpProfile build_bump_profile(double lo, double mid, double hi, double e_max, double e_min, double v_max,
                               double v_min, double curvature, double core_fraction, double lo_slope,
                               double hi_slope) {
    BumpProfile prof;
    prof.lo = lo;
    prof.mid = mid;
    prof.hi = hi;
    prof.e_max = e_max;
    prof.e_min = e_min;
    prof.v_max = v_max;
    prof.v_min = v_min;
    prof.curvature = curvature;
    if (!(lo < e_max && e_max < mid && mid < e_min && e_min < hi)) throw PreconditionError("bump profile: anchors out of order");
    if (v_max == 0.0 && v_min == 0.0) return prof;
    if (!(v_max > 0.0 && v_min < 0.0 && curvature > 0.0)) throw PreconditionError("bump profile: need v_max > 0 > v_min");
    if (!(core_fraction > 0.0 && core_fraction < 1.0)) throw PreconditionError("bump profile: core fraction must lie in (0, 1)");

    const double kappa = curvature;
    auto radius = [&](double v, double left, double right) {
        return std::min(0.5 * std::sqrt(2.0 * std::fabs(v) / kappa), core_fraction * std::min(left, right));
    };
    const double r1 = radius(v_max, e_max - lo, mid - e_max);
    const double r2 = radius(v_min, e_min - mid, hi - e_min);
    const double top1 = v_max - 0.5 * kappa * r1 * r1;
    const double top2 = -v_min - 0.5 * kappa * r2 * r2;

    BumpPiece left = outer_piece(1.0, e_max - r1, -1.0, top1, kappa * r1, e_max - r1 - lo);
    BumpPiece core1;
    core1.core = true;
    core1.sign = 1.0;
    core1.origin = e_max;
    core1.top = v_max;
    core1.lo = e_max - r1;
    core1.hi = e_max + r1;
    BumpPiece inner1 = outer_piece(1.0, e_max + r1, 1.0, top1, kappa * r1, mid - e_max - r1);
    BumpPiece inner2 = outer_piece(-1.0, e_min - r2, -1.0, top2, kappa * r2, e_min - r2 - mid);
    BumpPiece core2;
    core2.core = true;
    core2.sign = -1.0;
    core2.origin = e_min;
    core2.top = -v_min;
    core2.lo = e_min - r2;
    core2.hi = e_min + r2;
    BumpPiece right = outer_piece(-1.0, e_min + r2, 1.0, top2, kappa * r2, hi - e_min - r2);

    if (lo_slope > 0.0) solve_two(left, kappa, lo_slope);
    else solve_one(left, kappa);
    if (hi_slope > 0.0) solve_two(right, kappa, hi_slope);
    else solve_one(right, kappa);
    // Shared slope at the middle zero: average of what each side would pick on its own.
    solve_one(inner1, kappa);
    solve_one(inner2, kappa);
    const double target = 0.5 * (end_slope(inner1, kappa) + end_slope(inner2, kappa));
    solve_two(inner1, kappa, target);
    solve_two(inner2, kappa, target);
    for (const auto* p : {&left, &inner1, &inner2, &right})
        if (!concave_shape(*p, kappa)) throw PreconditionError("bump profile: infeasible anchor spacing for these values");
    prof.pieces = {left, core1, inner1, inner2, core2, right};
    return prof;
}

bool ProfileCheck::ok() const {
    return interior_zeros == 1 && critical_points == 2 && max_value_error < 1e-12 && max_normal_form_error < 1e-12 &&
           concavity_ok;
}

ProfileCheck check_profile(const BumpProfile& p, int grid) {
    ProfileCheck c;
    if (p.pieces.empty()) {
        c.concavity_ok = true;
        return c;
    }
    int prev_sign = 0, prev_dsign = 0;
    c.concavity_ok = true;
    for (int i = 1; i < grid; ++i) {
        const double y = p.lo + (p.hi - p.lo) * i / grid;
        const double v = p.value(y), d = p.d1(y), dd = p.d2(y);
        const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (s != 0) {
            if (prev_sign != 0 && s != prev_sign) ++c.interior_zeros;
            prev_sign = s;
        }
        const int ds = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
        if (ds != 0) {
            if (prev_dsign != 0 && ds != prev_dsign) ++c.critical_points;
            prev_dsign = ds;
        }
        if (y < p.mid && !(dd < 0.0)) c.concavity_ok = false;
        if (y > p.mid && !(dd > 0.0)) c.concavity_ok = false;
    }
    c.max_value_error = std::max(std::fabs(p.value(p.e_max) - p.v_max), std::fabs(p.value(p.e_min) - p.v_min));
    const double half = 0.5 * p.curvature;
    for (double e : {p.e_max, p.e_min}) {
        const bool is_max = e == p.e_max;
        const BumpPiece* core = find_piece(p, e);
        const double r = core->hi - core->lo;
        for (double off : {-0.25 * r, 0.25 * r, 0.4 * r}) {
            const double y = e + off;
            const double nf = is_max ? p.v_max - half * off * off : p.v_min + half * off * off;
            c.max_normal_form_error = std::max(c.max_normal_form_error, std::fabs(p.value(y) - nf));
        }
    }
    return c;
}

FstProfile build_fst(const SaddleLoopModel& model, double t) {
    if (!(t >= 0.0)) throw PreconditionError("f^s_t: t must be nonnegative");
    FstProfile f;
    f.t = t;
    f.profile = build_bump_profile(model.b, model.b_mid, model.b_end, model.c1, model.c2, t, -t * (1.0 + model.pitch),
                                   model.curvature);
    f.check = check_profile(f.profile);
    if (t > 0.0 && !f.check.ok()) throw PreconditionError("f^s_t: constructed profile fails its invariants");
    return f;
}

// ---------------------------------------------------------------------------------------------
// Composite map

SaddleStep saddle_step(const SaddleLoopModel& model, const FstProfile& fst, Vec2 p) {
    SaddleStep s;
    const bool near_axis = std::fabs(p.x) <= model.box_halfwidth;
    if (near_axis && p.y >= model.b && p.y < model.b_end) {
        s.point = {model.fu(p.y), p.x + fst(p.y)};
        s.jacobian = {0.0, model.fu_slope, 1.0, fst.d1(p.y)};
        s.steps = 2;
    } else if (near_axis && p.y <= -model.b && p.y > -model.b_end) {
        const double w = -p.y;
        s.point = {-model.fu(w), p.x - fst(w)};
        s.jacobian = {0.0, model.fu_slope, 1.0, fst.d1(w)};
        s.steps = 2;
    } else {
        s.point = {model.lambda * p.x, model.sigma * p.y};
        s.jacobian = {model.lambda, 0.0, 0.0, model.sigma};
        s.steps = 1;
    }
    return s;
}

DynMap return_map(const SaddleLoopModel& model, const FstProfile& fst) {
    DynMap f;
    f.space = Space::Plane;
    f.name = "saddle-loop";
    f.evaluate = [model, fst](Vec2 p) { return saddle_step(model, fst, p).point; };
    f.jacobian = [model, fst](Vec2 p) { return saddle_step(model, fst, p).jacobian; };
    return f;
}

// ---------------------------------------------------------------------------------------------
// Sinks

SinkBox sink_box_c1(const SaddleLoopModel& model, double t, double alpha) {
    const double w = std::sqrt(2.0) * std::pow(t, alpha / 2.0);
    return {0.0, std::pow(t, alpha), model.c1 - w, model.c1 + w};
}

SinkBox sink_box_c1_image(const SaddleLoopModel& model, double t, double alpha) {
    const double w = std::sqrt(2.0) * std::pow(t, alpha / 2.0);
    const double c1p = model.fu(model.c1);
    const double h = std::pow(t, alpha);
    return {c1p - w, c1p + w, t - h, t + h};
}

SinkBox sink_box_c2(const SaddleLoopModel& model, double t, double alpha) {
    const double s = (1.0 + model.pitch) * t;
    const double w = std::sqrt(2.0) * std::pow(s, alpha / 2.0);
    return {-std::pow(s, alpha), 0.0, model.c2 - w, model.c2 + w};
}

SinkCheck check_sink_box(const SaddleLoopModel& model, const FstProfile& fst, const SinkBox& box, int period,
                         int norm_steps, int samples) {
    SinkCheck c;
    c.box = box;
    c.period = period;
    c.norm_steps = norm_steps;
    const int k = std::max(2, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(samples)))));
    c.contained = true;
    const int horizon = std::max(period, norm_steps);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            Vec2 p{box.x_lo + (box.x_hi - box.x_lo) * i / (k - 1), box.y_lo + (box.y_hi - box.y_lo) * (j + 0.5) / k};
            Mat2 J = Mat2::identity();
            int steps = 0;
            bool hit_period = false, hit_norm = false;
            while (steps < horizon) {
                const SaddleStep s = saddle_step(model, fst, p);
                p = s.point;
                J = s.jacobian * J;
                steps += s.steps;
                if (steps == period) {
                    hit_period = true;
                    if (!box.contains(p)) c.contained = false;
                }
                if (steps == norm_steps) {
                    hit_norm = true;
                    c.max_norm = std::max(c.max_norm, J.norm2());
                }
            }
            if (!hit_period) c.contained = false;
            if (!hit_norm) c.max_norm = std::numeric_limits<double>::infinity();
            ++c.samples;
        }
    }
    return c;
}

namespace {

// Mirror, c2 and transit checks at one n; fills everything except the scan.
void complete_certificate(const SaddleLoopModel& model, const FstProfile& fst, int n, int samples,
                          SinkCertificate& cert) {
    const double t = cert.t, alpha = cert.alpha;
    const int period = n + 2;
    SinkBox mirror = sink_box_c1(model, t, alpha);
    mirror = {-mirror.x_hi, -mirror.x_lo, -mirror.y_hi, -mirror.y_lo};
    cert.mirror = check_sink_box(model, fst, mirror, period, 2 * period, samples);
    cert.second = check_sink_box(model, fst, sink_box_c2(model, t, alpha), 2 * period, 2 * period, samples);

    // f^n of the box around (c1', t) against the c1 box: n linear steps.
    const SinkBox img = sink_box_c1_image(model, t, alpha);
    const SinkBox target = sink_box_c1(model, t, alpha);
    const int k = std::max(2, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(samples)))));
    cert.transit_contained = true;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            Vec2 p{img.x_lo + (img.x_hi - img.x_lo) * (i + 0.5) / k, img.y_lo + (img.y_hi - img.y_lo) * (j + 0.5) / k};
            int steps = 0;
            while (steps < n) {
                const SaddleStep s = saddle_step(model, fst, p);
                p = s.point;
                steps += s.steps;
            }
            if (steps != n || !target.contains(p)) cert.transit_contained = false;
        }
    const double sn = std::pow(model.sigma, n);
    cert.max_sigma_n_dfs = 0.0;
    for (int j = 0; j < k; ++j) {
        const double y = target.y_lo + (target.y_hi - target.y_lo) * (j + 0.5) / k;
        cert.max_sigma_n_dfs = std::max(cert.max_sigma_n_dfs, std::fabs(sn * fst.d1(y)));
    }
    cert.sigma_n_dfs_bound = std::pow(t, alpha / 2.0 - 1.0);
}

}  // namespace

SinkCertificate detect_sink(const SaddleLoopModel& model, int n_lo, int n_hi, double alpha, int samples) {
    if (!(alpha > 2.0 && alpha < 3.0)) throw PreconditionError("sink: alpha must lie in (2, 3)");
    if (n_lo < 1 || n_hi < n_lo) throw PreconditionError("sink: bad n range");
    SinkCertificate cert;
    cert.alpha = alpha;
    cert.samples = samples;
    for (int n = n_lo; n <= n_hi; ++n) {
        SinkScanRow row;
        row.n = n;
        row.t = std::pow(model.sigma, -n) * model.c1;
        FstProfile fst;
        try {
            fst = build_fst(model, row.t);
        } catch (const PreconditionError& e) {
            row.note = e.what();
            cert.scan.push_back(row);
            continue;
        }
        const int period = n + 2;
        SinkCertificate cand;
        cand.alpha = alpha;
        cand.samples = samples;
        cand.n = n;
        cand.t = row.t;
        cand.period = period;
        cand.primary = check_sink_box(model, fst, sink_box_c1(model, row.t, alpha), period, 2 * period, samples);
        row.contained = cand.primary.contained;
        row.max_norm = cand.primary.max_norm;
        if (cand.primary.certified()) {
            complete_certificate(model, fst, n, samples, cand);
            row.companions = cand.mirror.certified() && cand.second.certified() && cand.transit_contained;
            if (!row.companions) row.note = "c1 box certified; mirror, c2 or transit check failed";
        }
        cert.scan.push_back(row);
        if (!cert.found && row.companions) {
            cand.found = true;
            cand.scan = std::move(cert.scan);
            cert = std::move(cand);
        }
    }
    return cert;
}

// ---------------------------------------------------------------------------------------------
// Cone field

ConeReport cone_invariance_check(const SaddleLoopModel& model, double t, double alpha, double xi, int samples) {
    if (!(t > 0.0)) throw PreconditionError("cone check: t must be positive");
    if (!(alpha > 2.0 && alpha < 3.0)) throw PreconditionError("cone check: alpha must lie in (2, 3)");
    if (!(xi > alpha && xi < 3.0)) throw PreconditionError("cone check: xi must lie in (alpha, 3)");
    const FstProfile fst = build_fst(model, t);
    ConeReport r;
    r.t = t;
    r.xi = xi;
    r.alpha = alpha;
    r.bound = std::pow(t, xi);
    r.tangent_bound = std::pow(t, alpha / 2.0);
    r.exponent_margin = model.gamma - alpha / 2.0 - 1.0 - xi;
    r.min_tangent_slope = std::numeric_limits<double>::infinity();
    const double s = (1.0 + model.pitch) * t;
    const double basin1 = std::sqrt(2.0) * std::pow(t, alpha / 2.0);
    const double basin2 = std::sqrt(2.0) * std::pow(s, alpha / 2.0);
    const int rows = std::max(1, samples / 3);
    for (int j = 0; j < rows; ++j) {
        const double y = model.b + (model.b_end - model.b) * (j + 0.5) / rows;
        // Points in the sink basins are excluded from the cone field.
        if (std::fabs(y - model.c1) < basin1 || std::fabs(y - model.c2) < basin2) continue;
        for (double x : {-r.bound, 0.0, r.bound}) {
            const Vec2 p{x, y};
            const SaddleStep pass = saddle_step(model, fst, p);
            if (pass.steps != 2 || pass.point.y == 0.0) continue;
            r.min_tangent_slope = std::min(r.min_tangent_slope, std::fabs(fst.d1(y) / model.fu_slope));
            Vec2 q = pass.point;
            Mat2 transit = Mat2::identity();
            bool returned = false;
            for (int it = 0; it < 100000; ++it) {
                const SaddleStep st = saddle_step(model, fst, q);
                if (st.steps == 2) {
                    returned = true;
                    break;
                }
                if (std::fabs(q.y) > 1.0) break;
                q = st.point;
                transit = st.jacobian * transit;
            }
            if (!returned) continue;
            ++r.samples;
            for (double v1 : {0.0, r.bound, -r.bound}) {
                const Vec2 v = transit * (pass.jacobian * Vec2{v1, 1.0});
                const double slope = std::fabs(v.x) / std::fabs(v.y);
                if (slope > r.worst_slope) r.worst_slope = slope;
                if (!(slope <= r.bound)) {
                    if (r.violations == 0) r.witness = p;
                    ++r.violations;
                }
            }
        }
    }
    r.worst_margin = r.bound - r.worst_slope;
    return r;
}

// ---------------------------------------------------------------------------------------------
// Time maps

VectorField linear_saddle_field(double lambda, double sigma) {
    VectorField f;
    f.name = "linear-saddle";
    const double lx = std::log(lambda), ly = std::log(sigma);
    f.field = [lx, ly](Vec2 p) { return Vec2{lx * p.x, ly * p.y}; };
    f.jacobian = [lx, ly](Vec2) { return Mat2{lx, 0.0, 0.0, ly}; };
    f.exact_flow = [lambda, sigma](Vec2 p, double t) { return Vec2{std::pow(lambda, t) * p.x, std::pow(sigma, t) * p.y}; };
    return f;
}

namespace {

struct FlowState {
    Vec2 p;
    Mat2 d;
};

FlowState flow_rhs(const VectorField& f, const FlowState& s) {
    return {f.field(s.p), f.jacobian(s.p) * s.d};
}

FlowState axpy(const FlowState& s, double h, const FlowState& k) {
    return {{s.p.x + h * k.p.x, s.p.y + h * k.p.y},
            {s.d.a + h * k.d.a, s.d.b + h * k.d.b, s.d.c + h * k.d.c, s.d.d + h * k.d.d}};
}

double state_diff(const FlowState& a, const FlowState& b) {
    return std::max({std::fabs(a.p.x - b.p.x), std::fabs(a.p.y - b.p.y), std::fabs(a.d.a - b.d.a),
                     std::fabs(a.d.b - b.d.b), std::fabs(a.d.c - b.d.c), std::fabs(a.d.d - b.d.d)});
}

FlowState rk4(const VectorField& f, FlowState s, double t, int steps) {
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        const FlowState k1 = flow_rhs(f, s);
        const FlowState k2 = flow_rhs(f, axpy(s, h / 2.0, k1));
        const FlowState k3 = flow_rhs(f, axpy(s, h / 2.0, k2));
        const FlowState k4 = flow_rhs(f, axpy(s, h, k3));
        s.p.x += h / 6.0 * (k1.p.x + 2.0 * k2.p.x + 2.0 * k3.p.x + k4.p.x);
        s.p.y += h / 6.0 * (k1.p.y + 2.0 * k2.p.y + 2.0 * k3.p.y + k4.p.y);
        s.d.a += h / 6.0 * (k1.d.a + 2.0 * k2.d.a + 2.0 * k3.d.a + k4.d.a);
        s.d.b += h / 6.0 * (k1.d.b + 2.0 * k2.d.b + 2.0 * k3.d.b + k4.d.b);
        s.d.c += h / 6.0 * (k1.d.c + 2.0 * k2.d.c + 2.0 * k3.d.c + k4.d.c);
        s.d.d += h / 6.0 * (k1.d.d + 2.0 * k2.d.d + 2.0 * k3.d.d + k4.d.d);
    }
    return s;
}

}  // namespace

Vec2 integrate_flow(const VectorField& field, Vec2 p, double t, int steps, Mat2* derivative) {
    if (steps < 1) throw PreconditionError("flow: steps must be positive");
    const FlowState s = rk4(field, {p, Mat2::identity()}, t, steps);
    if (derivative) *derivative = s.d;
    return s.p;
}

FlowDistanceTable time_map_distance(const VectorField& field, const std::vector<double>& t_grid, int grid, Vec2 lo,
                                    Vec2 hi, double h_max, double tol) {
    if (!field.field || !field.jacobian) throw PreconditionError("time map: field needs values and a Jacobian");
    if (grid < 2 || !(h_max > 0.0)) throw PreconditionError("time map: bad sampling parameters");
    FlowDistanceTable table;
    for (double t : t_grid) {
        if (!(t >= 0.0)) throw PreconditionError("time map: t must be nonnegative");
        FlowDistanceRow row;
        row.t = t;
        for (int i = 0; i < grid; ++i) {
            for (int j = 0; j < grid; ++j) {
                const Vec2 p{lo.x + (hi.x - lo.x) * i / (grid - 1), lo.y + (hi.y - lo.y) * j / (grid - 1)};
                FlowState s{p, Mat2::identity()};
                if (t > 0.0) {
                    int n = std::max(1, static_cast<int>(std::ceil(t / h_max)));
                    FlowState coarse = rk4(field, s, t, n);
                    FlowState fine = rk4(field, s, t, 2 * n);
                    while (state_diff(coarse, fine) > tol * (1.0 + std::max(std::fabs(fine.p.x), std::fabs(fine.p.y)))) {
                        n *= 2;
                        if (n > (1 << 16)) throw std::runtime_error("time map: integrator step rejected");
                        coarse = fine;
                        fine = rk4(field, s, t, 2 * n);
                    }
                    if (!std::isfinite(fine.p.x) || !std::isfinite(fine.p.y))
                        throw std::runtime_error("time map: integrator step rejected");
                    s = fine;
                }
                const double c0 = std::max(std::fabs(s.p.x - p.x), std::fabs(s.p.y - p.y));
                const Mat2 dev{s.d.a - 1.0, s.d.b, s.d.c, s.d.d - 1.0};
                row.c0 = std::max(row.c0, c0);
                row.c1 = std::max({row.c1, c0, dev.norm_inf()});
                if (field.exact_flow) {
                    const Vec2 e = field.exact_flow(p, t);
                    row.flow_error = std::max({row.flow_error, std::fabs(e.x - s.p.x), std::fabs(e.y - s.p.y)});
                }
            }
        }
        table.max_flow_error = std::max(table.max_flow_error, row.flow_error);
        table.rows.push_back(row);
    }
    double tt = 0.0, td = 0.0, dd = 0.0;
    for (const auto& r : table.rows) {
        tt += r.t * r.t;
        td += r.t * r.c0;
        dd += r.c0 * r.c0;
    }
    table.slope = tt > 0.0 ? td / tt : 0.0;
    double rr = 0.0;
    for (const auto& r : table.rows) {
        const double e = r.c0 - table.slope * r.t;
        rr += e * e;
    }
    table.relative_residual = dd > 0.0 ? std::sqrt(rr / dd) : 0.0;
    return table;
}

// ---------------------------------------------------------------------------------------------
// Tube coordinates

double tube_bump(double y) { return 1.0 - glue_profile((std::fabs(y) - 0.5) / 0.5); }

TubeFamily build_tube_family(double t, int m, double pitch, double support_eps) {
    if (m < 2) throw PreconditionError("tube family: m must be at least 2");
    if (!(pitch > 0.0 && pitch < 1.0)) throw PreconditionError("tube family: pitch must lie in (0, 1)");
    if (!(support_eps > 0.0 && support_eps < 0.25)) throw PreconditionError("tube family: support eps must lie in (0, 1/4)");
    TubeFamily f;
    f.t = t;
    f.m = m;
    f.pitch = pitch;
    f.support_eps = support_eps;
    // g0'(0) > |g0'(1)| keeps hat g increasing at 0 once g1 is added.
    f.g0 = build_bump_profile(0.0, 0.5, 1.0, 0.25, 0.75, 1.0, -(1.0 + pitch), 8.0, 0.25, 12.0, 10.0);
    return f;
}

double TubeFamily::g(double x) const {
    if (x >= 0.0 && x <= 1.0) return g0.value(x);
    if (x > 1.0 && x <= 1.0 + support_eps) {
        // One critical point, C^1 join with g0 at 1, small compared with g0.
        const double u = x - 1.0, w = 1.0 - u / support_eps;
        return g0.d1(1.0) * u * w * w;
    }
    if (x < 0.0 && x >= -support_eps) {
        const double u = x, w = 1.0 + u / support_eps;
        return g0.d1(0.0) * u * w * w;
    }
    return 0.0;
}

double TubeFamily::hat_g(double x) const { return g(x) + (x <= support_eps ? g(x + 1.0) : 0.0); }

Vec2 TubeFamily::operator()(Vec2 p) const { return {p.x + 1.0, p.y + tube_bump(p.y) * t * g(p.x)}; }

DynMap tube_family_map(const TubeFamily& family) {
    DynMap f;
    f.space = Space::Plane;
    f.name = "tube";
    f.evaluate = [family](Vec2 p) { return family(p); };
    f.jacobian = [family](Vec2 p) {
        const double h = 1e-7;
        const Vec2 px = family({p.x + h, p.y}), mx = family({p.x - h, p.y});
        const Vec2 py = family({p.x, p.y + h}), my = family({p.x, p.y - h});
        return Mat2{(px.x - mx.x) / (2 * h), (py.x - my.x) / (2 * h), (px.y - mx.y) / (2 * h), (py.y - my.y) / (2 * h)};
    };
    return f;
}

// ---------------------------------------------------------------------------------------------
// Export

std::string fst_json(const FstProfile& fst) {
    nlohmann::json j;
    j["t"] = fst.t;
    j["zeros"] = {fst.profile.lo, fst.profile.mid, fst.profile.hi};
    j["critical_points"] = {fst.profile.e_max, fst.profile.e_min};
    j["critical_values"] = {fst.profile.v_max, fst.profile.v_min};
    j["check"] = {{"interior_zeros", fst.check.interior_zeros},
                  {"critical_points", fst.check.critical_points},
                  {"max_value_error", fst.check.max_value_error},
                  {"max_normal_form_error", fst.check.max_normal_form_error},
                  {"concavity_ok", fst.check.concavity_ok}};
    return j.dump(2);
}

namespace {

nlohmann::json sink_check_json(const SinkCheck& c) {
    return {{"box", {c.box.x_lo, c.box.x_hi, c.box.y_lo, c.box.y_hi}},
            {"period", c.period},
            {"samples", c.samples},
            {"contained", c.contained},
            {"max_norm", c.max_norm},
            {"norm_steps", c.norm_steps},
            {"certified", c.certified()}};
}

}  // namespace

std::string sink_certificate_json(const SinkCertificate& c) {
    nlohmann::json j;
    j["found"] = c.found;
    j["n"] = c.n;
    j["t"] = c.t;
    j["alpha"] = c.alpha;
    j["period"] = c.period;
    j["samples"] = c.samples;
    j["norm_bound"] = c.found ? nlohmann::json(c.primary.max_norm) : nlohmann::json(nullptr);
    if (c.found) {
        j["primary"] = sink_check_json(c.primary);
        j["mirror"] = sink_check_json(c.mirror);
        j["second"] = sink_check_json(c.second);
        j["transit_contained"] = c.transit_contained;
        j["max_sigma_n_dfs"] = c.max_sigma_n_dfs;
        j["sigma_n_dfs_bound"] = c.sigma_n_dfs_bound;
    }
    nlohmann::json scan = nlohmann::json::array();
    for (const auto& r : c.scan)
        scan.push_back({{"n", r.n},
                        {"t", r.t},
                        {"contained", r.contained},
                        {"max_norm", r.max_norm},
                        {"companions", r.companions},
                        {"note", r.note}});
    j["scan"] = scan;
    return j.dump(2);
}

std::string cone_report_json(const ConeReport& r) {
    nlohmann::json j;
    j["t"] = r.t;
    j["xi"] = r.xi;
    j["alpha"] = r.alpha;
    j["bound"] = r.bound;
    j["worst_slope"] = r.worst_slope;
    j["worst_margin"] = r.worst_margin;
    j["samples"] = r.samples;
    j["violations"] = r.violations;
    if (r.violations > 0) j["witness"] = {r.witness.x, r.witness.y};
    j["min_tangent_slope"] = r.min_tangent_slope;
    j["tangent_bound"] = r.tangent_bound;
    j["exponent_margin"] = r.exponent_margin;
    j["ok"] = r.ok();
    return j.dump(2);
}

std::string flow_distance_csv(const FlowDistanceTable& t) {
    std::ostringstream os;
    os.precision(17);
    os << "t,c0,c1,flow_error\n";
    for (const auto& r : t.rows) os << r.t << ',' << r.c0 << ',' << r.c1 << ',' << r.flow_error << '\n';
    return os.str();
}

std::string saddle_portrait_svg(const SaddleLoopModel& model, const FstProfile& fst, int n_orbit_points) {
    svg::Plot plot;
    plot.title = "saddle loop, t = " + std::to_string(fst.t);
    plot.x_label = "x";
    plot.y_label = "y";
    svg::Series lu{"L^u and its passage image", {}, true, "#d62728"};
    for (int i = 0; i <= 200; ++i) {
        const double y = model.b + (model.b_end - model.b) * i / 200.0;
        lu.points.push_back({model.fu(y), fst(y)});
    }
    svg::Series orbit{"orbits", {}, false, "#1f77b4"};
    for (int k = 0; k < 8; ++k) {
        Vec2 p{0.0, model.b + (model.b_end - model.b) * (k + 0.5) / 8.0};
        for (int i = 0; i < n_orbit_points / 8; ++i) {
            orbit.points.push_back({p.x, p.y});
            p = saddle_step(model, fst, p).point;
            if (std::fabs(p.x) > 1.0 || std::fabs(p.y) > 1.0) break;
        }
    }
    plot.series = {lu, orbit};
    return svg::render(plot);
}

}  // namespace shadowlab
