#include "shadowlab/crooked.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "shadowlab/maps.hpp"
#include "shadowlab/svg.hpp"

namespace shadowlab {

namespace {

double smoothstep(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smoothstep_d(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }

using Piece = CrookedPiece;

std::array<Piece, 10> profile(const CrookedModel& m, bool centers) {
    std::array<Piece, 10> out{};
    for (std::size_t k = 0; k < 5; ++k) {
        const auto& s = m.strips[k];
        out[2 * k] = centers ? Piece{s.lo, s.hi, s.band_center, s.band_center} : Piece{s.lo, s.hi, s.image_lo, s.image_hi};
        const double next_x = k < 4 ? m.strips[k + 1].lo : 1.0;
        double next_v;
        if (centers)
            next_v = k < 4 ? m.strips[k + 1].band_center : m.strips[0].band_center;
        else
            next_v = k < 4 ? m.strips[k + 1].image_lo : m.strips[0].image_lo + 1.0;
        out[2 * k + 1] = {s.hi, next_x, centers ? s.band_center : s.image_hi, next_v};
    }
    return out;
}

const Piece& find_piece(const std::array<Piece, 10>& ps, double t) {
    for (const auto& p : ps)
        if (t < p.x1 && p.x1 > p.x0) return p;
    return ps.back();
}

double eval_piece(const Piece& p, double t) {
    if (p.x1 <= p.x0) return p.v0;
    return p.v0 + (t - p.x0) * (p.v1 - p.v0) / (p.x1 - p.x0);
}

double slope_piece(const Piece& p) { return p.x1 > p.x0 ? (p.v1 - p.v0) / (p.x1 - p.x0) : 0.0; }

}  // namespace

double CrookedModel::lift_x(double x) const {
    const double k = std::floor(x);
    const double t = x - k;
    return eval_piece(find_piece(x_profile, t), t) + k;
}

double CrookedModel::lift_dx(double x) const { return slope_piece(find_piece(x_profile, x - std::floor(x))); }

double CrookedModel::band_center(double x) const {
    const double t = x - std::floor(x);
    return eval_piece(find_piece(center_profile, t), t);
}

double CrookedModel::band_center_dx(double x) const {
    return slope_piece(find_piece(center_profile, x - std::floor(x)));
}

namespace {

double psi_lower(const CrookedModel& m, double v) {
    const double l = m.boundary_multiplier;
    if (l >= 1.0) return l * v;
    return v + (l - 1.0) * v * (1.0 - v / m.repeller_level);
}

double psi_lower_d(const CrookedModel& m, double v) {
    const double l = m.boundary_multiplier;
    if (l >= 1.0) return l;
    return 1.0 + (l - 1.0) * (1.0 - 2.0 * v / m.repeller_level);
}

}  // namespace

double CrookedModel::map_y(double x, double v) const {
    const double band = band_center(x) + mu * (v - 0.5);
    if (v <= outer) return psi_lower(*this, v);
    if (v < band_lo) {
        const double s = smoothstep((v - outer) / (band_lo - outer));
        return (1.0 - s) * psi_lower(*this, v) + s * band;
    }
    if (v <= band_hi) return band;
    const double upper = 1.0 - psi_lower(*this, 1.0 - v);
    if (v < 1.0 - outer) {
        const double s = smoothstep((1.0 - outer - v) / (1.0 - outer - band_hi));
        return (1.0 - s) * upper + s * band;
    }
    return upper;
}

Vec2 CrookedModel::map_y_grad(double x, double v) const {
    const double band = band_center(x) + mu * (v - 0.5);
    const double cx = band_center_dx(x);
    if (v <= outer) return {0.0, psi_lower_d(*this, v)};
    if (v < band_lo) {
        const double w = band_lo - outer;
        const double u = (v - outer) / w;
        const double s = smoothstep(u), ds = smoothstep_d(u) / w;
        const double p = psi_lower(*this, v);
        return {s * cx, (1.0 - s) * psi_lower_d(*this, v) + s * mu + ds * (band - p)};
    }
    if (v <= band_hi) return {cx, mu};
    const double upper = 1.0 - psi_lower(*this, 1.0 - v);
    const double upper_d = psi_lower_d(*this, 1.0 - v);
    if (v < 1.0 - outer) {
        const double w = 1.0 - outer - band_hi;
        const double u = (1.0 - outer - v) / w;
        const double s = smoothstep(u), ds = -smoothstep_d(u) / w;
        return {s * cx, (1.0 - s) * upper_d + s * mu + ds * (band - upper)};
    }
    return {0.0, upper_d};
}

int CrookedModel::symbol_at(Vec2 p) const {
    if (!(p.y >= band_lo && p.y <= band_hi)) return 2;
    const double t = p.x - std::floor(p.x);
    for (int k = 0; k < 3; ++k) {
        const auto& s = strips[static_cast<std::size_t>(k)];
        if (t >= s.lo && t <= s.hi) return s.symbol;
    }
    return 2;
}

const CrookedStrip& CrookedModel::strip_for(int symbol) const {
    if (symbol < -1 || symbol > 1) throw PreconditionError("symbol must be -1, 0 or 1");
    return strips[static_cast<std::size_t>(symbol + 1)];
}

double CrookedModel::branch_inverse(int symbol, double u) const {
    const auto& s = strip_for(symbol);
    return s.lo + u / kappa;
}

CrookedModel build_crooked_model(double mu, double kappa, double boundary_multiplier) {
    if (!(mu > 0.0 && mu < 1.0)) throw PreconditionError("mu must lie in (0, 1)");
    if (!(kappa > 1.0)) throw PreconditionError("kappa must exceed 1");
    if (kappa < 5.0) throw PreconditionError("kappa < 5: five strips of width W/kappa do not fit in the base strip");
    if (mu > 0.2) throw PreconditionError("mu > 1/5: the five image bands overlap");
    if (!(boundary_multiplier >= 0.5 && boundary_multiplier <= 2.0) || boundary_multiplier == 1.0)
        throw PreconditionError("boundary multiplier must lie in [0.5, 2] and differ from 1");
    CrookedModel m;
    m.mu = mu;
    m.kappa = kappa;
    m.boundary_multiplier = boundary_multiplier;
    m.strip_width = m.width / kappa;
    m.gap = (m.width - 5.0 * m.strip_width) / 4.0;
    const double W = m.width;
    // Strip order A, B, C (selected, symbols -1, 0, 1) then the folded-back D, E.
    const double lo_img[5] = {-1.0, 0.0, 1.0, 1.0 + W, W};
    const double hi_img[5] = {W - 1.0, W, 1.0 + W, 1.0, 0.0};
    const int disp[5] = {-1, 0, 1, 1, 0};
    const int sym[5] = {-1, 0, 1, 2, 2};
    for (int k = 0; k < 5; ++k) {
        auto& s = m.strips[static_cast<std::size_t>(k)];
        s.lo = k * (m.strip_width + m.gap);
        s.hi = s.lo + m.strip_width;
        s.image_lo = lo_img[k];
        s.image_hi = hi_img[k];
        s.displacement = disp[k];
        s.symbol = sym[k];
        s.band_center = m.band_lo + (m.band_hi - m.band_lo) * (2 * k + 1) / 10.0;
    }
    m.strips[4].hi = W;  // exact, so the flat column starts at W
    m.x_profile = profile(m, false);
    m.center_profile = profile(m, true);
    return m;
}

DynMap crooked_dynmap(const CrookedModel& model) {
    DynMap f;
    f.space = Space::Annulus;
    f.name = "crooked";
    f.evaluate = [model](Vec2 p) { return Vec2{wrap01(model.lift_x(p.x)), model.map_y(p.x, p.y)}; };
    f.lift_evaluate = [model](Vec2 p) { return model.lift(p); };
    f.jacobian = [model](Vec2 p) {
        const Vec2 g = model.map_y_grad(p.x, p.y);
        return Mat2{model.lift_dx(p.x), 0.0, g.x, g.y};
    };
    std::vector<double> xb;
    for (const auto& s : model.strips) {
        xb.push_back(s.lo);
        xb.push_back(s.hi);
    }
    const std::vector<double> yb{model.outer, model.band_lo, model.band_hi, 1.0 - model.outer};
    f.derivative_bound = sampled_derivative_bound(f.jacobian, xb, 1.0, yb);
    return f;
}

Vec2 branch_fixed_point(const CrookedModel& model, int symbol) {
    const auto& s = model.strip_for(symbol);
    const double x = model.kappa * s.lo / (model.kappa - 1.0);
    const double y = (s.band_center - 0.5 * model.mu) / (1.0 - model.mu);
    return {x, y};
}

Itinerary encode_point(const CrookedModel& model, Vec2 z, int n_steps) {
    if (n_steps < 0) throw PreconditionError("n_steps must be >= 0");
    if (!std::isfinite(z.x) || !std::isfinite(z.y)) throw PreconditionError("point must be finite");
    Itinerary word;
    Vec2 p{wrap01(z.x), z.y};
    for (int k = 0; k < n_steps; ++k) {
        const int s = model.symbol_at(p);
        if (s == 2) throw EscapeError("orbit leaves the Markov boxes at step " + std::to_string(k), k);
        word.push_back(s);
        p = {wrap01(model.lift_x(p.x)), model.map_y(p.x, p.y)};
    }
    return word;
}

Vec2 decode_itinerary(const CrookedModel& model, const Itinerary& word, double tol) {
    if (word.empty()) throw PreconditionError("empty itinerary");
    if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
    for (int s : word)
        if (s < -1 || s > 1) throw PreconditionError("itinerary symbols must be -1, 0 or 1");
    const auto L = static_cast<long long>(word.size());
    // Pull back past both tol and double resolution; the extra steps are free.
    const double target = std::min(tol, 1e-17);
    long long steps = static_cast<long long>(std::ceil(std::log(model.width / target) / std::log(model.kappa)));
    steps = (steps / L + 2) * L;
    double u = 0.5 * model.width;
    for (long long k = steps - 1; k >= 0; --k) u = model.branch_inverse(word[static_cast<std::size_t>(k % L)], u);
    const long long reps = static_cast<long long>(std::ceil(std::log(1e-18) / std::log(model.mu) / static_cast<double>(L))) + 2;
    double y = 0.5;
    for (long long r = 0; r < reps; ++r)
        for (int s : word) y = model.strip_for(s).band_center + model.mu * (y - 0.5);
    return {u, y};
}

bool markov_covers(const CrookedModel& model, int from_symbol, int to_symbol) {
    const auto& a = model.strip_for(from_symbol);
    const auto& b = model.strip_for(to_symbol);
    // Expanding direction: the image of the strip, shifted back by its deck displacement, spans box b.
    const double i0 = model.lift_x(a.lo) - a.displacement, i1 = model.lift_x(a.hi - 1e-15) - a.displacement;
    const bool spans = std::min(i0, i1) <= b.lo && std::max(i0, i1) >= b.hi - 1e-12;
    // Contracting direction: the image band lies inside the box height.
    double ylo = 1.0, yhi = 0.0;
    for (double x : {a.lo, 0.5 * (a.lo + a.hi), a.hi - 1e-15})
        for (double v : {model.band_lo, model.band_hi}) {
            const double y = model.map_y(x, v);
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
        }
    return spans && ylo >= model.band_lo && yhi <= model.band_hi;
}

std::string crooked_model_json(const CrookedModel& model) {
    nlohmann::ordered_json j;
    j["mu"] = model.mu;
    j["kappa"] = model.kappa;
    j["base_width"] = model.width;
    j["strip_width"] = model.strip_width;
    j["gap"] = model.gap;
    j["band"] = {model.band_lo, model.band_hi};
    j["boundary_multiplier"] = model.boundary_multiplier;
    auto branches = nlohmann::ordered_json::array();
    for (const auto& s : model.strips) {
        const double slope = (s.image_hi - s.image_lo) / (s.hi - s.lo);
        nlohmann::ordered_json b;
        b["symbol"] = s.symbol == 2 ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(s.symbol);
        b["x_range"] = {s.lo, s.hi};
        b["matrix"] = {{slope, 0.0}, {0.0, model.mu}};
        b["offset"] = {s.image_lo - slope * s.lo, s.band_center - 0.5 * model.mu};
        b["displacement"] = s.displacement;
        branches.push_back(b);
    }
    j["branches"] = branches;
    return j.dump(2) + "\n";
}

// ---- Liouville approximants ----

namespace {
BigInt ipow(int base, unsigned long e) { return boost::multiprecision::pow(BigInt(base), static_cast<unsigned>(e)); }
unsigned long factorial(int k) {
    unsigned long f = 1;
    for (int i = 2; i <= k; ++i) f *= static_cast<unsigned long>(i);
    return f;
}
BigRational exact(double v) {
    // Doubles are dyadic rationals, so this conversion is exact.
    int e = 0;
    const double mant = std::frexp(v, &e);
    const auto scaled = static_cast<long long>(std::ldexp(mant, 53));
    BigRational r(scaled);
    e -= 53;
    if (e >= 0)
        r *= BigRational(ipow(2, static_cast<unsigned long>(e)));
    else
        r /= BigRational(ipow(2, static_cast<unsigned long>(-e)));
    return r;
}
}  // namespace

AlphaSpec AlphaSpec::factorial_series(int base, int shift, BigRational offset) {
    if (base < 2) throw PreconditionError("series base must be >= 2");
    if (shift < 0) throw PreconditionError("series shift must be >= 0");
    AlphaSpec a;
    a.base = base;
    a.shift = shift;
    a.offset = std::move(offset);
    a.series = true;
    return a;
}

AlphaSpec AlphaSpec::rational(BigRational value) {
    AlphaSpec a;
    a.offset = std::move(value);
    a.series = false;
    return a;
}

BigRational AlphaSpec::truncation(int terms) const {
    BigRational v = offset;
    if (!series) return v;
    for (int k = 1; k <= terms; ++k)
        v += BigRational(BigInt(1), ipow(base, factorial(k) + static_cast<unsigned long>(shift)));
    return v;
}

BigRational AlphaSpec::tail_bound(int terms) const {
    if (!series) return 0;
    // Exponents k! + shift for k > terms are distinct integers, so the tail is at most a geometric
    // series with ratio 1/base, i.e. base/(base - 1) <= 2 times its first term.
    return BigRational(BigInt(2), ipow(base, factorial(terms + 1) + static_cast<unsigned long>(shift)));
}

double AlphaSpec::value() const { return static_cast<double>(truncation(series ? 4 : 0)); }

LiouvilleApproximant check_approximant(const AlphaSpec& spec, int terms, int r) {
    if (!spec.series) throw PreconditionError("alpha is rational: no approximants of every order exist");
    if (r < 0) throw PreconditionError("r must be >= 0");
    if (terms < 0 || terms > 8) throw PreconditionError("terms must lie in [0, 8]");
    LiouvilleApproximant a;
    const BigRational v = spec.truncation(terms);
    a.p = boost::multiprecision::numerator(v);
    a.q = boost::multiprecision::denominator(v);
    a.r = r;
    a.terms = terms;
    a.error_bound = spec.tail_bound(terms);
    const BigInt qpow = boost::multiprecision::pow(a.q, static_cast<unsigned>(r + 2));
    a.liouville_ok = a.q >= 2 && a.error_bound < BigRational(BigInt(1), qpow);
    return a;
}

LiouvilleApproximant liouville_approximant(const AlphaSpec& spec, int r, double eta, double eps, double c_r,
                                           int max_terms) {
    if (!(eta > 0.0 && eta < 1.0) || !(eps > 0.0 && eps < 1.0)) throw PreconditionError("eta and eps must lie in (0, 1)");
    if (!(c_r >= 0.0) || !std::isfinite(c_r)) throw PreconditionError("c_r must be finite and >= 0");
    LiouvilleApproximant best;
    bool have = false;
    for (int k = 0; k <= max_terms; ++k) {
        LiouvilleApproximant a = check_approximant(spec, k, r);
        // 1/(q - 1) < eps eta / (c_r + 4)  <=>  c_r + 4 < eps eta (q - 1)
        a.size_ok = a.q >= 2 && exact(c_r) + 4 < exact(eps) * exact(eta) * BigRational(a.q - 1);
        if (a.liouville_ok && a.size_ok) return a;
        if (!have || a.liouville_ok || !best.liouville_ok) {
            best = a;
            have = true;
        }
    }
    throw LiouvilleError("no truncation with at most " + std::to_string(max_terms) +
                             " terms satisfies both approximation conditions",
                         best);
}

// ---- Finite cover ----

Vec2 FiniteCoverMap::lift(Vec2 z) const {
    const double u = q * z.x;
    return {(model.lift_x(u) + p) / q, model.map_y(u, z.y)};
}

Vec2 FiniteCoverMap::operator()(Vec2 z) const {
    const Vec2 w = lift(z);
    return {wrap01(w.x), w.y};
}

double FiniteCoverMap::delta_bound() const {
    return 1.0 / (static_cast<double>(m) * q) - std::pow(static_cast<double>(q), -(r + 2));
}

double measure_c0_distance(const CrookedModel& model, int samples) {
    if (samples < 2) throw PreconditionError("need at least 2 samples");
    double sup = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = static_cast<double>(i) / (samples - 1);
        sup = std::max(sup, std::fabs(model.lift_x(x) - x));
        for (int j = 0; j <= 100; ++j) {
            const double v = j / 100.0;
            sup = std::max(sup, std::fabs(model.map_y(x, v) - v));
        }
    }
    return sup;
}

FiniteCoverMap finite_cover_map(const CrookedModel& model, int q, int p, int r) {
    if (q < 2) throw PreconditionError("q must be >= 2");
    if (r < 0 || r > 12) throw PreconditionError("r must lie in [0, 12]");
    FiniteCoverMap c;
    c.model = model;
    c.q = q;
    c.p = p;
    c.r = r;
    long double m = std::pow(static_cast<long double>(q), r) * (q - 1);
    if (m > 1e15L) throw PreconditionError("m = q^r (q - 1) is too large");
    c.m = static_cast<long long>(m);
    c.model_c0 = measure_c0_distance(model);
    c.c_r = static_cast<double>(c.m) * c.model_c0;
    return c;
}

DynMap finite_cover_dynmap(const FiniteCoverMap& cover) {
    DynMap f;
    f.space = Space::Annulus;
    f.name = "cover:q=" + std::to_string(cover.q) + ",p=" + std::to_string(cover.p);
    f.evaluate = [cover](Vec2 z) { return cover(z); };
    f.lift_evaluate = [cover](Vec2 z) { return cover.lift(z); };
    f.jacobian = [cover](Vec2 z) {
        const double u = cover.q * z.x;
        const Vec2 g = cover.model.map_y_grad(u, z.y);
        return Mat2{cover.model.lift_dx(u), 0.0, g.x * cover.q, g.y};
    };
    std::vector<double> xb;
    for (const auto& s : cover.model.strips) {
        xb.push_back(s.lo / cover.q);
        xb.push_back(s.hi / cover.q);
    }
    const auto& md = cover.model;
    f.derivative_bound = sampled_derivative_bound(f.jacobian, xb, 1.0 / cover.q,
                                                  {md.outer, md.band_lo, md.band_hi, 1.0 - md.outer});
    return f;
}

ShadowConstruction shadow_first_coordinate(const FiniteCoverMap& cover, const PseudoOrbit& pseudo, int window) {
    if (pseudo.space != Space::Circle) throw PreconditionError("pseudo-orbit must live on the circle");
    if (window < 1 || static_cast<std::size_t>(window) + 1 > pseudo.points.size())
        throw PreconditionError("window exceeds the pseudo-orbit length");
    const long long m = cover.m;
    const long long blocks = window / m;
    if (blocks < 1) throw PreconditionError("window must contain at least one block of m steps");
    const double dmax = cover.delta_bound();
    if (pseudo.delta > dmax)
        throw PreconditionError("pseudo-orbit jump " + std::to_string(pseudo.delta) + " exceeds delta = 1/(mq) - 1/q^(r+2) = " +
                                std::to_string(dmax));
    const int q = cover.q;
    const auto& model = cover.model;
    ShadowConstruction s;
    s.m = m;
    // Grid cells with reference point a' = 0 (left edge of the base strip).
    for (long long n = 0; n <= blocks; ++n) {
        const double x = wrap01(pseudo.points[static_cast<std::size_t>(n * m)].x);
        s.j.push_back(std::min<long long>(q - 1, static_cast<long long>(std::floor(q * x))));
    }
    for (long long n = 0; n < blocks; ++n) {
        const long long d = ((s.j[n + 1] - s.j[n]) % q + q) % q;
        int sym;
        if (d == 0)
            sym = 0;
        else if (d == 1)
            sym = 1;
        else if (d == q - 1)
            sym = -1;
        else
            throw PreconditionError("grid jump " + std::to_string(d) + " mod q at block " + std::to_string(n) +
                                    ": pseudo-orbit too coarse");
        s.i.push_back(sym);
    }
    s.j_prime.push_back(s.j[0]);
    for (long long n = 0; n < blocks; ++n) s.j_prime.push_back(s.j_prime.back() + s.i[static_cast<std::size_t>(n)]);

    // Symbol at every step of H: i_n at multiples of m, the non-winding branch elsewhere.
    std::vector<int> sym(static_cast<std::size_t>(window), 0);
    for (long long n = 0; n < blocks; ++n) sym[static_cast<std::size_t>(n * m)] = s.i[static_cast<std::size_t>(n)];
    // x by pullback along the itinerary (stable), y forward (contracting).
    std::vector<double> base(static_cast<std::size_t>(window) + 1);
    base.back() = 0.5 * model.width;
    for (int k = window - 1; k >= 0; --k) base[k] = model.branch_inverse(sym[k], base[k + 1]);
    std::vector<Vec2> orbit(static_cast<std::size_t>(window) + 1);
    long long J = s.j[0];
    double y = 0.5 * (model.band_lo + model.band_hi);
    for (int k = 0; k <= window; ++k) {
        const long long shift = ((J + static_cast<long long>(k) * cover.p) % q + q) % q;
        orbit[k] = {wrap01((base[k] + static_cast<double>(shift)) / q), y};
        if (k < window) {
            y = model.map_y(base[k], y);
            J += sym[k];
        }
    }
    s.z = orbit[0];
    s.coarse_bound = 2.0 / q;
    s.full_bound = (cover.c_r + 3.0) / q;
    for (int k = 0; k <= window; ++k) {
        const double px = wrap01(pseudo.points[k].x);
        const double d = circle_dist(orbit[k].x, px);
        s.pseudo_x.push_back(px);
        s.orbit_x.push_back(orbit[k].x);
        s.deviation.push_back(d);
        s.full_max = std::max(s.full_max, d);
        if (k % m == 0 && k / m <= blocks) s.coarse_max = std::max(s.coarse_max, d);
        if (k < window) s.orbit_residual = std::max(s.orbit_residual, distance(Space::Annulus, cover(orbit[k]), orbit[k + 1]));
    }
    s.coarse_ok = s.coarse_max < s.coarse_bound;
    s.full_ok = s.full_max <= s.full_bound;
    return s;
}

std::string shadow_construction_csv(const ShadowConstruction& s) {
    std::ostringstream os;
    os << std::setprecision(17) << "n,x_n,orbit_first_coord,deviation\n";
    for (std::size_t k = 0; k < s.deviation.size(); ++k)
        os << k << ',' << s.pseudo_x[k] << ',' << s.orbit_x[k] << ',' << s.deviation[k] << '\n';
    return os.str();
}

std::string shadow_construction_svg(const ShadowConstruction& s) {
    svg::Plot plot;
    plot.title = "first-coordinate shadowing";
    plot.x_label = "n";
    plot.y_label = "x";
    svg::Series pseudo{"pseudo-orbit x_n", {}, false, "#1f77b4"};
    svg::Series orbit{"h^n(z)_1 at multiples of m", {}, false, "#d62728"};
    const std::size_t stride = std::max<std::size_t>(1, s.deviation.size() / 800);
    for (std::size_t k = 0; k < s.deviation.size(); k += stride) pseudo.points.emplace_back(k, s.pseudo_x[k]);
    for (std::size_t k = 0; k < s.deviation.size(); k += static_cast<std::size_t>(s.m))
        orbit.points.emplace_back(k, s.orbit_x[k]);
    plot.series = {pseudo, orbit};
    return svg::render(plot);
}

}  // namespace shadowlab
