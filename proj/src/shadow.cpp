#include "shadowlab/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "shadowlab/kernels.hpp"
#include "shadowlab/svg.hpp"

namespace shadowlab {

ShadowReport compare_orbit(Space s, const std::vector<Vec2>& orbit, const PseudoOrbit& pseudo, double epsilon) {
    ShadowReport r;
    r.epsilon_used = epsilon;
    const std::size_t n = std::min(orbit.size(), pseudo.points.size());
    r.window = n;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = distance(s, orbit[k], pseudo.points[k]);
        if (d > r.max_deviation) {
            r.max_deviation = d;
            r.argmax = k;
        }
    }
    r.shadowed = r.max_deviation < epsilon;
    return r;
}

ShadowReport verify_shadowing(const DynMap& f, const PseudoOrbit& pseudo, Vec2 x, double epsilon) {
    if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
    std::vector<Vec2> orbit;
    orbit.reserve(pseudo.points.size());
    Vec2 z = normalize(f.space, x);
    for (std::size_t k = 0; k < pseudo.points.size(); ++k) {
        orbit.push_back(z);
        z = f(z);
    }
    return compare_orbit(f.space, orbit, pseudo, epsilon);
}

namespace {

// Difference a - b with circle coordinates reduced to [-1/2, 1/2).
Vec2 delta_vec(Space s, Vec2 a, Vec2 b) {
    Vec2 d{a.x - b.x, a.y - b.y};
    if (s == Space::Circle || s == Space::Annulus || s == Space::Torus) d.x -= std::round(d.x);
    if (s == Space::Torus) d.y -= std::round(d.y);
    if (dimension(s) == 1) d.y = 0.0;
    return d;
}

double vnorm(Vec2 v) { return std::max(std::fabs(v.x), std::fabs(v.y)); }

Mat2 inverse(const Mat2& m) {
    const double det = m.det();
    return {m.d / det, -m.b / det, -m.c / det, m.a / det};
}

Mat2 transpose(const Mat2& m) { return {m.a, m.c, m.b, m.d}; }

Vec2 add(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 sub(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Mat2 msub(const Mat2& a, const Mat2& b) { return {a.a - b.a, a.b - b.b, a.c - b.c, a.d - b.d}; }

double orbit_residual(const DynMap& f, const std::vector<Vec2>& z, std::vector<Vec2>* F) {
    double r = 0.0;
    if (F) F->resize(z.size() - 1);
    for (std::size_t k = 0; k + 1 < z.size(); ++k) {
        const Vec2 e = delta_vec(f.space, z[k + 1], f(z[k]));
        if (F) (*F)[k] = e;
        r = std::max(r, vnorm(e));
    }
    return r;
}

}  // namespace

NewtonShadowResult newton_shadow(const DynMap& f, const PseudoOrbit& pseudo, double tol, int max_iter, double epsilon) {
    if (!f.has_jacobian()) throw PreconditionError("newton_shadow requires a Jacobian");
    if (pseudo.points.size() < 2) throw PreconditionError("pseudo-orbit needs at least 2 points");
    const bool one = dimension(f.space) == 1;
    NewtonShadowResult out;
    std::vector<Vec2> z = pseudo.points;
    std::vector<Vec2> F;
    double res = orbit_residual(f, z, &F);
    const std::size_t n = F.size();  // number of equations (blocks)
    int it = 0;
    for (; it < max_iter && res >= tol; ++it) {
        std::vector<Mat2> A(z.size());
        for (std::size_t k = 0; k < z.size(); ++k) {
            A[k] = f.jacobian(z[k]);
            if (one) A[k] = Mat2{A[k].a, 0.0, 0.0, 1.0};  // inert second coordinate
        }
        // Minimum-norm correction: solve (J J^T) w = -F, then dz = J^T w. Row k of J is
        // [-A_k at column k, I at column k+1], so J J^T is block tridiagonal.
        std::vector<Mat2> diag(n), upper(n), cprime(n);
        std::vector<Vec2> rhs(n), dprime(n);
        for (std::size_t k = 0; k < n; ++k) {
            diag[k] = A[k] * transpose(A[k]);
            diag[k].a += 1.0;
            diag[k].d += 1.0;
            rhs[k] = {-F[k].x, -F[k].y};
            if (k + 1 < n) upper[k] = Mat2{-A[k + 1].a, -A[k + 1].c, -A[k + 1].b, -A[k + 1].d};  // -A_{k+1}^T
        }
        // Block Thomas: lower[k] = upper[k-1]^T.
        for (std::size_t k = 0; k < n; ++k) {
            Mat2 m = diag[k];
            Vec2 r = rhs[k];
            if (k > 0) {
                const Mat2 lower = transpose(upper[k - 1]);
                m = msub(m, lower * cprime[k - 1]);
                r = sub(r, lower * dprime[k - 1]);
            }
            const Mat2 mi = inverse(m);
            if (k + 1 < n) cprime[k] = mi * upper[k];
            dprime[k] = mi * r;
        }
        std::vector<Vec2> w(n);
        for (std::size_t k = n; k-- > 0;) {
            w[k] = dprime[k];
            if (k + 1 < n) w[k] = sub(w[k], cprime[k] * w[k + 1]);
        }
        std::vector<Vec2> dz(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) {
            Vec2 v{0.0, 0.0};
            if (j >= 1) v = add(v, w[j - 1]);
            if (j < n) v = sub(v, transpose(A[j]) * w[j]);
            if (one) v.y = 0.0;
            dz[j] = v;
        }
        // Damping factor 0.5 with residual backtracking.
        double lambda = 1.0;
        bool improved = false;
        for (int bt = 0; bt < 30; ++bt) {
            std::vector<Vec2> cand(z.size());
            for (std::size_t j = 0; j < z.size(); ++j)
                cand[j] = normalize(f.space, {z[j].x + lambda * dz[j].x, z[j].y + lambda * dz[j].y});
            std::vector<Vec2> Fc;
            const double rc = orbit_residual(f, cand, &Fc);
            if (std::isfinite(rc) && rc < res) {
                z = std::move(cand);
                F = std::move(Fc);
                res = rc;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) break;
    }
    out.iterations = it;
    out.residual = res;
    out.converged = res < tol;
    out.orbit = std::move(z);
    out.report = compare_orbit(f.space, out.orbit, pseudo, epsilon);
    if (!out.converged) out.report.shadowed = false;
    return out;
}

std::vector<Vec2> expanding_shadow_orbit(const DynMap& f, const PseudoOrbit& pseudo) {
    if (f.inverse_branches.size() < 2) throw PreconditionError("oracle needs a map with at least 2 inverse branches");
    if (pseudo.points.empty()) throw PreconditionError("empty pseudo-orbit");
    std::vector<Vec2> z(pseudo.points.size());
    z.back() = normalize(f.space, pseudo.points.back());
    for (std::size_t k = pseudo.points.size() - 1; k-- > 0;) {
        // Preimage of z_{k+1} on the branch whose arc holds x_k; ties go to the lowest branch.
        double best = 2.0;
        Vec2 pick{};
        for (const auto& branch : f.inverse_branches) {
            const Vec2 c = branch(z[k + 1]);
            const double d = distance(f.space, c, pseudo.points[k]);
            if (d < best) {
                best = d;
                pick = c;
            }
        }
        z[k] = pick;
    }
    return z;
}

Vec2 expanding_shadow_oracle(const DynMap& f, const PseudoOrbit& pseudo) { return expanding_shadow_orbit(f, pseudo).front(); }

namespace {

PseudoOrbit sample_pseudo(const DynMap& f, double delta, int window, std::uint64_t seed, NoiseModel noise) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec2 x0{unit(rng), dimension(f.space) == 2 ? unit(rng) : 0.0};
    if (f.space == Space::Plane) x0 = {2.0 * x0.x - 1.0, 2.0 * x0.y - 1.0};
    if (noise == NoiseModel::Uniform) return generate_pseudo_orbit(f, x0, delta, window, rng());
    PseudoOrbit p;
    p.space = f.space;
    p.points.push_back(normalize(f.space, x0));
    for (int k = 0; k < window; ++k) {
        const Vec2 img = f(p.points.back());
        const Vec2 next = normalize(f.space, {img.x + delta, img.y});
        p.delta = std::max(p.delta, distance(f.space, img, next));
        p.points.push_back(next);
    }
    return p;
}

struct Attempt {
    bool ok = false;
    double deviation = 0.0;
};

Attempt construct(const DynMap& f, const PseudoOrbit& p, bool oracle) {
    if (oracle) {
        const auto orbit = expanding_shadow_orbit(f, p);
        return {true, compare_orbit(f.space, orbit, p, 1.0).max_deviation};
    }
    const auto r = newton_shadow(f, p, 1e-12, 50);
    return {r.converged, r.report.max_deviation};
}

}  // namespace

HolderFit holder_exponent(const DynMap& f, std::vector<double> deltas, int samples_per_delta, int window,
                          std::uint64_t seed, const HolderOptions& opts) {
    if (samples_per_delta < 1 || window < 2) throw PreconditionError("need at least one sample and window >= 2");
    bool oracle = false;
    if (opts.method == ShadowMethod::Oracle || (opts.method == ShadowMethod::Auto && f.inverse_branches.size() >= 2)) {
        if (f.inverse_branches.size() < 2) throw PreconditionError("oracle method needs inverse branches");
        oracle = true;
    } else if (!f.has_jacobian()) {
        throw PreconditionError("Newton method needs a Jacobian");
    }
    std::sort(deltas.begin(), deltas.end(), std::greater<>());
    deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
    HolderFit fit;
    fit.method = oracle ? "oracle" : "newton";
    fit.window = window;
    fit.samples = samples_per_delta;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0)) throw PreconditionError("deltas must be positive");
        HolderRow row;
        row.delta = deltas[i];
        double growth = 0.0;
        for (int s = 0; s < samples_per_delta; ++s) {
            const std::uint64_t trial_seed = seed * 1000003ULL + i * 7919ULL + static_cast<std::uint64_t>(s);
            const PseudoOrbit p = sample_pseudo(f, deltas[i], window, trial_seed, opts.noise);
            const Attempt full = construct(f, p, oracle);
            PseudoOrbit half = p;
            half.points.resize(p.points.size() / 2 + 1);
            const Attempt part = construct(f, half, oracle);
            if (!full.ok || !part.ok) {
                row.flagged = true;
                row.note = "construction failed";
                continue;
            }
            row.epsilon_min = std::max(row.epsilon_min, full.deviation);
            if (part.deviation > 0.0) growth = std::max(growth, full.deviation / part.deviation);
        }
        if (!row.flagged && growth > opts.growth_flag) {
            row.flagged = true;
            row.note = "deviation grows with the window";
        }
        fit.rows.push_back(row);
    }
    // Least squares of log(eps) against log(delta) over unflagged rows.
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : fit.rows)
        if (!r.flagged && r.epsilon_min > 0.0) pts.emplace_back(std::log(r.delta), std::log(r.epsilon_min));
    if (pts.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double m = static_cast<double>(pts.size());
        fit.alpha = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        fit.log_c = (sy - fit.alpha * sx) / m;
        double ss = 0.0;
        for (auto [x, y] : pts) {
            const double e = y - (fit.log_c + fit.alpha * x);
            ss += e * e;
        }
        fit.residual = std::sqrt(ss / m);
    } else {
        fit.alpha = std::nan("");
        fit.log_c = std::nan("");
        fit.residual = std::nan("");
    }
    return fit;
}

std::string holder_csv(const HolderFit& fit) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "delta,epsilon_min,flagged\n";
    for (const auto& r : fit.rows) os << r.delta << ',' << r.epsilon_min << ',' << (r.flagged ? 1 : 0) << '\n';
    return os.str();
}

std::string holder_svg(const HolderFit& fit) {
    svg::Plot plot;
    plot.title = "epsilon_min vs delta (alpha = " + std::to_string(fit.alpha) + ")";
    plot.x_label = "delta";
    plot.y_label = "epsilon_min";
    plot.log_x = plot.log_y = true;
    svg::Series ok{"measured", {}, false, "#1f77b4"};
    svg::Series bad{"flagged", {}, false, "#d62728"};
    svg::Series line{"fit", {}, true, "#2ca02c"};
    for (const auto& r : fit.rows) {
        (r.flagged ? bad : ok).points.emplace_back(r.delta, r.epsilon_min);
        if (std::isfinite(fit.alpha)) line.points.emplace_back(r.delta, std::exp(fit.log_c) * std::pow(r.delta, fit.alpha));
    }
    std::sort(line.points.begin(), line.points.end());
    plot.series = {ok, bad, line};
    return svg::render(plot);
}

}  // namespace shadowlab
