// Command-line front end. Exit codes: 0 success, 2 usage or precondition error, 1 anything else.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shadowlab/chain.hpp"
#include "shadowlab/circle.hpp"
#include "shadowlab/crooked.hpp"
#include "shadowlab/example_b.hpp"
#include "shadowlab/maps.hpp"
#include "shadowlab/saddle.hpp"
#include "shadowlab/shadow.hpp"

using namespace shadowlab;
using ojson = nlohmann::ordered_json;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string map = "E2";
    double rho = 1.0 / 256;
    double delta = 1.0 / 256;
    double eps = 0.1;
    std::uint64_t seed = 1;
    int window = 200;
    std::string out;
    std::string format = "json";
    std::string command;
    ojson params = ojson::object();  // subcommand parameters, echoed in every output
};

Common common;

ojson config_json() {
    ojson c;
    c["command"] = common.command;
    c["map"] = common.map;
    c["rho"] = common.rho;
    c["delta"] = common.delta;
    c["eps"] = common.eps;
    c["seed"] = common.seed;
    c["window"] = common.window;
    c["format"] = common.format;
    for (auto& [k, v] : common.params.items()) c[k] = v;
    return c;
}

std::string config_line() {
    std::string s;
    const ojson c = config_json();
    for (auto& [k, v] : c.items()) s += " " + k + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
    return s;
}

void write_text(const std::string& text) {
    if (common.out.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(common.out, std::ios::binary);
    if (!f) throw IoError("cannot open " + common.out + " for writing");
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
    if (!f) throw IoError("write failed: " + common.out);
}

// Every emitted file carries the configuration: a "config" key, a leading "#" line, or an XML comment.
void emit_json(ojson body) {
    ojson j;
    j["config"] = config_json();
    for (auto& [k, v] : body.items()) j[k] = v;
    write_text(j.dump(2));
}

void emit_csv(const std::string& csv) { write_text("#" + config_line() + "\n" + csv); }

void emit_svg(const std::string& svg) { write_text("<!--" + config_line() + " -->\n" + svg); }

void require_format(std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (common.format == a) return;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    throw PreconditionError("format " + common.format + " not available here (use " + list + ")");
}

ojson vec_json(Vec2 p) { return ojson::array({p.x, p.y}); }

Window window_for(const DynMap& f, double ylo, double yhi) {
    switch (f.space) {
        case Space::Circle:
            return Window::circle();
        case Space::Annulus:
            if (std::isnan(ylo)) ylo = f.name == "crooked" ? 0.0 : -1.0;
            if (std::isnan(yhi)) yhi = 1.0;
            return Window::annulus(ylo, yhi);
        case Space::Torus:
            return Window::torus();
        case Space::Plane:
            return Window::plane(-1.0, 1.0, std::isnan(ylo) ? -1.0 : ylo, std::isnan(yhi) ? 1.0 : yhi);
        case Space::Line:
            break;
    }
    throw PreconditionError("no box window for maps on the line");
}

// Boxes lying inside [lo, hi] in the last coordinate (x on the circle, y otherwise).
std::vector<int> boxes_in_band(const BoxCover& cover, double lo, double hi) {
    std::vector<int> out;
    for (int b = 0; b < static_cast<int>(cover.size()); ++b) {
        const Vec2 l = cover.lo(b), h = cover.hi(b);
        const double a = cover.window.dim == 1 ? l.x : l.y, z = cover.window.dim == 1 ? h.x : h.y;
        if (a >= lo && z <= hi) out.push_back(b);
    }
    return out;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw PreconditionError("not a number: " + item);
        }
    }
    if (v.empty()) throw PreconditionError("empty list");
    return v;
}

PseudoOrbit make_pseudo(const DynMap& f, Vec2 x0) {
    if (common.window < 1) throw PreconditionError("window must be positive");
    return generate_pseudo_orbit(f, x0, common.delta, common.window, common.seed);
}

// ---------------------------------------------------------------------------------------------

struct ChainArgs {
    double ylo = NAN, yhi = NAN;
    double k_lo = -0.5, k_hi = 0.5, u_lo = -1.0, u_hi = 1.0;
    std::string kind = "full";
    std::string deltas;
};

TransitionGraph chain_graph(const DynMap& f, const ChainArgs& a, BoxCover& cover) {
    cover = build_cover(window_for(f, a.ylo, a.yhi), common.rho);
    return build_graph(f, cover, common.delta);
}

void chain_components(const ChainArgs& a, bool lyapunov) {
    require_format({"json", "csv"});
    const DynMap f = parse_map_spec(common.map);
    BoxCover cover;
    const TransitionGraph g = chain_graph(f, a, cover);
    const ChainComponents cc = epsilon_components(g);
    const LyapunovData l = lyapunov_values(g, cc);
    if (common.format == "csv") return emit_csv(components_csv(cc, l));
    ojson j;
    j["boxes"] = g.num_boxes();
    j["edges"] = g.num_edges();
    j["padding_mode"] = g.padding_mode;
    j["effective_eps"] = g.effective_eps();
    j["components"] = cc.components.size();
    ojson comps = ojson::array();
    for (std::size_t i = 0; i < cc.components.size(); ++i) {
        const auto& c = cc.components[i];
        comps.push_back({{"id", i}, {"size", c.size()}, {"first_box", c.front()}, {"g", l.g[static_cast<std::size_t>(c.front())]}});
    }
    j["component_list"] = comps;
    if (lyapunov) {
        const LyapunovAudit audit = audit_lyapunov(g, cc, l);
        j["condensation_edges"] = audit.condensation_edges;
        j["decreasing"] = audit.decreasing;
        j["distinct_recurrent_values"] = audit.distinct_recurrent_values;
        j["constant_on_components"] = audit.constant_on_components;
        j["max_rank"] = l.max_rank;
    }
    emit_json(j);
}

void chain_trap(const ChainArgs& a) {
    require_format({"json"});
    const DynMap f = parse_map_spec(common.map);
    const BoxCover cover = build_cover(window_for(f, a.ylo, a.yhi), common.rho);
    TrapKind kind;
    if (a.kind == "forward") kind = TrapKind::Forward;
    else if (a.kind == "backward") kind = TrapKind::Backward;
    else if (a.kind == "full") kind = TrapKind::Full;
    else throw PreconditionError("trap kind must be forward, backward or full");
    const auto K = boxes_in_band(cover, a.k_lo, a.k_hi);
    const auto U = boxes_in_band(cover, a.u_lo, a.u_hi);
    const std::vector<double> grid = a.deltas.empty() ? std::vector<double>{common.delta} : parse_list(a.deltas);
    const TrapReport t = verify_trap(f, cover, K, U, kind, grid);
    ojson j;
    j["kind"] = trap_kind_name(t.kind);
    j["delta"] = t.delta;
    j["effective_eps"] = t.effective_eps;
    j["k_boxes"] = t.k_boxes.size();
    j["u_boxes"] = t.u_boxes.size();
    ojson tested = ojson::array();
    for (auto [d, ok] : t.tested) tested.push_back({{"delta", d}, {"certified", ok}});
    j["tested"] = tested;
    emit_json(j);
}

// ---------------------------------------------------------------------------------------------

struct ShadowArgs {
    double x0 = 0.1234, y0 = 0.0;
    std::string method = "auto";
    std::string deltas = "1e-3,1e-4,1e-5,1e-6";
    int samples = 20;
    std::string noise = "uniform";
};

std::string orbit_csv(const std::vector<Vec2>& orbit, const PseudoOrbit& p) {
    std::ostringstream os;
    os.precision(17);
    os << "n,x,y,pseudo_x,pseudo_y,deviation\n";
    for (std::size_t k = 0; k < orbit.size() && k < p.points.size(); ++k)
        os << k << ',' << orbit[k].x << ',' << orbit[k].y << ',' << p.points[k].x << ',' << p.points[k].y << ','
           << distance(p.space, orbit[k], p.points[k]) << '\n';
    return os.str();
}

void shadow_verify(const ShadowArgs& a, bool newton) {
    require_format({"json", "csv"});
    const DynMap f = parse_map_spec(common.map);
    const PseudoOrbit p = make_pseudo(f, {a.x0, a.y0});
    std::vector<Vec2> orbit;
    ojson j;
    const bool oracle = !newton && a.method != "newton" && f.space == Space::Circle && !f.inverse_branches.empty();
    if (!newton && a.method == "oracle" && !oracle) throw PreconditionError("the oracle needs inverse branches of a circle map");
    if (oracle) {
        orbit = expanding_shadow_orbit(f, p);
        j["method"] = "oracle";
    } else {
        const NewtonShadowResult r = newton_shadow(f, p, 1e-12, 50, common.eps);
        if (!r.converged) throw std::runtime_error("Newton did not converge");
        orbit = r.orbit;
        j["method"] = "newton";
        j["iterations"] = r.iterations;
        j["residual"] = r.residual;
    }
    const ShadowReport rep = compare_orbit(f.space, orbit, p, common.eps);
    if (common.format == "csv") return emit_csv(orbit_csv(orbit, p));
    j["shadowed"] = rep.shadowed;
    j["epsilon"] = common.eps;
    j["max_deviation"] = rep.max_deviation;
    j["argmax"] = rep.argmax;
    j["compared"] = rep.window;
    j["pseudo_max_jump"] = max_jump(p, f);
    j["start"] = vec_json(orbit.front());
    emit_json(j);
}

void shadow_holder(const ShadowArgs& a) {
    require_format({"json", "csv", "svg"});
    const DynMap f = parse_map_spec(common.map);
    HolderOptions o;
    if (a.method == "oracle") o.method = ShadowMethod::Oracle;
    else if (a.method == "newton") o.method = ShadowMethod::Newton;
    else if (a.method != "auto") throw PreconditionError("method must be auto, oracle or newton");
    if (a.noise == "drift") o.noise = NoiseModel::Drift;
    else if (a.noise != "uniform") throw PreconditionError("noise must be uniform or drift");
    const HolderFit fit = holder_exponent(f, parse_list(a.deltas), a.samples, common.window, common.seed, o);
    if (common.format == "csv") return emit_csv(holder_csv(fit));
    if (common.format == "svg") return emit_svg(holder_svg(fit));
    ojson j;
    j["alpha"] = fit.alpha;
    j["log_c"] = fit.log_c;
    j["residual"] = fit.residual;
    j["method"] = fit.method;
    j["window"] = fit.window;
    j["samples"] = fit.samples;
    ojson rows = ojson::array();
    for (const auto& r : fit.rows)
        rows.push_back({{"delta", r.delta}, {"epsilon_min", r.epsilon_min}, {"flagged", r.flagged}, {"note", r.note}});
    j["rows"] = rows;
    emit_json(j);
}

// ---------------------------------------------------------------------------------------------

struct CrookedArgs {
    double mu = 0.15, kappa = 6.0, multiplier = 1.3;
    int q = 5, p = 1, blocks = 200;
    double x0 = 0.37;
};

void crooked_build(const CrookedArgs& a) {
    require_format({"json"});
    const CrookedModel m = build_crooked_model(a.mu, a.kappa, a.multiplier);
    ojson j;
    j["model"] = ojson::parse(crooked_model_json(m));
    ojson cov = ojson::array();
    for (int i = -1; i <= 1; ++i)
        for (int k = -1; k <= 1; ++k) cov.push_back({{"from", i}, {"to", k}, {"covers", markov_covers(m, i, k)}});
    j["markov"] = cov;
    ojson fp = ojson::array();
    for (int i = -1; i <= 1; ++i) fp.push_back({{"symbol", i}, {"point", vec_json(branch_fixed_point(m, i))}});
    j["fixed_points"] = fp;
    emit_json(j);
}

void crooked_shadow(const CrookedArgs& a) {
    require_format({"json", "csv", "svg"});
    const GluedParams gp;
    AlphaSpec alpha = gp.alpha;
    if (a.q != gp.q || a.p != gp.p) alpha = AlphaSpec::factorial_series(10, 3, BigRational(a.p, a.q));
    const CrookedModel m = build_crooked_model(a.mu, a.kappa, a.multiplier);
    const FiniteCoverMap cover = finite_cover_map(m, a.q, a.p);
    const int window = static_cast<int>(a.blocks * cover.m);
    const PseudoOrbit p = generate_pseudo_orbit(rotation_map(alpha.value()), {a.x0, 0.0}, cover.delta_bound(), window,
                                                common.seed);
    const ShadowConstruction s = shadow_first_coordinate(cover, p, window);
    if (common.format == "csv") return emit_csv(shadow_construction_csv(s));
    if (common.format == "svg") return emit_svg(shadow_construction_svg(s));
    ojson j;
    j["q"] = cover.q;
    j["m"] = cover.m;
    j["delta"] = cover.delta_bound();
    j["c_r"] = cover.c_r;
    j["z"] = vec_json(s.z);
    j["coarse_max"] = s.coarse_max;
    j["coarse_bound"] = s.coarse_bound;
    j["full_max"] = s.full_max;
    j["full_bound"] = s.full_bound;
    j["coarse_ok"] = s.coarse_ok;
    j["full_ok"] = s.full_ok;
    j["orbit_residual"] = s.orbit_residual;
    emit_json(j);
}

// ---------------------------------------------------------------------------------------------

struct SaddleArgs {
    double sigma = 1.2, gamma = 6.5, b = 0.2, b_mid = 0.22, c1 = 0.21, c2 = 0.23, a = 0.01;
    int n_lo = 8, n_hi = 20, samples = 1024;
    double alpha = 2.5, xi = 2.75, t = 0.0;
    double lambda = std::pow(2.0, -6.5), flow_sigma = 2.0, t_max = 0.1;
    int t_count = 100, grid = 21;
};

SaddleLoopModel saddle_model(const SaddleArgs& a) {
    return build_saddle_model(a.sigma, a.gamma, a.b, a.b_mid, a.c1, a.c2, 0.0, 2, a.a);
}

void saddle_sink(const SaddleArgs& a) {
    require_format({"json", "svg"});
    const SaddleLoopModel m = saddle_model(a);
    const SinkCertificate c = detect_sink(m, a.n_lo, a.n_hi, a.alpha, a.samples);
    if (common.format == "svg") {
        if (!c.found) throw PreconditionError("no sink found in the n range; nothing to draw");
        return emit_svg(saddle_portrait_svg(m, build_fst(m, c.t)));
    }
    emit_json(ojson::parse(sink_certificate_json(c)));
}

void saddle_cone(const SaddleArgs& a) {
    require_format({"json"});
    const SaddleLoopModel m = saddle_model(a);
    const double t = a.t > 0.0 ? a.t : std::pow(m.sigma, -15) * m.c1;
    emit_json(ojson::parse(cone_report_json(cone_invariance_check(m, t, a.alpha, a.xi, a.samples))));
}

void saddle_tvm(const SaddleArgs& a) {
    require_format({"json", "csv"});
    if (a.t_count < 1 || !(a.t_max > 0.0)) throw PreconditionError("need t_count >= 1 and t_max > 0");
    std::vector<double> ts;
    for (int i = 1; i <= a.t_count; ++i) ts.push_back(a.t_max * i / a.t_count);
    const FlowDistanceTable tab = time_map_distance(linear_saddle_field(a.lambda, a.flow_sigma), ts, a.grid);
    if (common.format == "csv") return emit_csv(flow_distance_csv(tab));
    ojson j;
    j["slope"] = tab.slope;
    j["relative_residual"] = tab.relative_residual;
    j["max_flow_error"] = tab.max_flow_error;
    j["rows"] = tab.rows.size();
    emit_json(j);
}

// ---------------------------------------------------------------------------------------------

struct ExampleArgs {
    int depth = 4;
    double c_gap = 0.5;
    int k = 1;
    int trials = 20, blocks = 200;
};

GluedMap glued(const ExampleArgs& a) { return build_glued_map(build_schedule(a.depth, a.c_gap), GluedParams{}); }

void example_build(const ExampleArgs& a) {
    require_format({"json"});
    const GluedMap g = glued(a);
    const AnnuliSchedule& s = g.schedule;
    ojson j;
    j["w"] = s.w;
    ojson ann = ojson::array();
    for (int n = 1; n <= s.depth; ++n)
        ann.push_back({{"n", n},
                       {"a", s.a[static_cast<std::size_t>(n - 1)]},
                       {"b", s.b[static_cast<std::size_t>(n - 1)]},
                       {"multiplier", s.multiplier[static_cast<std::size_t>(n - 1)]},
                       {"repelling", s.repelling(n)}});
    j["annuli"] = ann;
    j["core_radius"] = s.b.back();
    j["alpha"] = g.alpha;
    j["continuity_gap"] = gluing_continuity_gap(g);
    ojson bands = ojson::array();
    for (const auto& b : band_distances(g))
        bands.push_back({{"n", b.n}, {"c0", b.c0}, {"c1", b.c1}, {"reference", b.reference}});
    j["band_distances"] = bands;
    emit_json(j);
}

void example_check(const ExampleArgs& a) {
    require_format({"json"});
    const GluedMap g = glued(a);
    ConditionOptions o;
    o.rho = common.rho;
    o.trials = a.trials;
    o.blocks = a.blocks;
    o.seed = common.seed;
    emit_json(ojson::parse(check_conditions(g, a.k, common.eps, o).to_json()));
}

// ---------------------------------------------------------------------------------------------

struct CircleArgs {
    int n = 8, grid = 4096, depth = 20, index = 0, j_max = 200, n_max = 60;
    double x = 0.0;
};

void circle_command(const std::string& which, const CircleArgs& a) {
    require_format({"json"});
    const DynMap m = parse_map_spec(common.map);
    ojson j;
    if (which == "degree") {
        j["degree"] = degree(m);
        return emit_json(j);
    }
    const CircleEndomorphism f = circle_endomorphism(m);
    if (which == "turning") {
        const TurningScan s = turning_points(f, a.grid);
        ojson pts = ojson::array();
        for (const auto& p : s.points)
            pts.push_back({{"location", p.location},
                           {"kind", p.kind == TurningKind::Min ? "min" : "max"},
                           {"second_derivative", p.second_derivative}});
        j["turning_points"] = pts;
        j["grid_too_coarse"] = s.grid_too_coarse;
    } else if (which == "expanding") {
        const ExpandingEstimate e = expanding_estimate(f, a.n, a.grid);
        j["lambda"] = e.lambda;
        j["C"] = e.constant;
    } else if (which == "semiconj") {
        j = ojson::parse(semiconjugacy_json(semiconjugacy(f, a.depth)));
    } else if (which == "escape") {
        const TurningScan s = turning_points(f, a.grid);
        j = ojson::parse(turning_escape_json(turning_interval_escape(f, s, a.index, common.eps, a.j_max)));
    } else {
        j = ojson::parse(periodic_parameter_json(periodic_parameter(f, a.x, common.eps, a.n_max)));
    }
    emit_json(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shadowlab: pseudo-orbits, shadowing and chain recurrence at box scale"};
    app.set_config("--config", "", "read key = value options from a file");
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--map", common.map, "map expression (E<d>, rot:<a>, trig:..., or a named map)");
    app.add_option("--rho", common.rho, "box size")->check(CLI::PositiveNumber);
    app.add_option("--delta", common.delta, "pseudo-orbit jump size")->check(CLI::NonNegativeNumber);
    app.add_option("--eps", common.eps, "epsilon");
    app.add_option("--seed", common.seed, "random seed");
    app.add_option("--window", common.window, "pseudo-orbit length");
    app.add_option("--out", common.out, "output path (stdout when empty)");
    app.add_option("--format", common.format, "csv, json or svg")->check(CLI::IsMember({"csv", "json", "svg"}));

    auto record = [](CLI::App* sub) {
        for (const CLI::Option* o : sub->get_options()) {
            if (o->get_single_name() == "help" || o->count() == 0) continue;
            const std::string v = o->as<std::string>();
            common.params[o->get_single_name()] = ojson::accept(v) ? ojson::parse(v) : ojson(v);
        }
    };

    // chain
    ChainArgs ca;
    auto* chain = app.add_subcommand("chain", "box-scale chain recurrence");
    chain->require_subcommand(1);
    auto chain_opts = [&](CLI::App* s) {
        s->add_option("--ylo", ca.ylo, "lower window edge in y");
        s->add_option("--yhi", ca.yhi, "upper window edge in y");
    };
    auto* cc = chain->add_subcommand("components", "epsilon-transitive components");
    auto* cl = chain->add_subcommand("lyapunov", "condensation ranks and their audit");
    auto* ct = chain->add_subcommand("trap", "trap certification over a delta grid");
    chain_opts(cc);
    chain_opts(cl);
    chain_opts(ct);
    ct->add_option("--k-lo", ca.k_lo, "K band lower edge");
    ct->add_option("--k-hi", ca.k_hi, "K band upper edge");
    ct->add_option("--u-lo", ca.u_lo, "U band lower edge");
    ct->add_option("--u-hi", ca.u_hi, "U band upper edge");
    ct->add_option("--kind", ca.kind, "forward, backward or full");
    ct->add_option("--deltas", ca.deltas, "comma-separated delta grid");

    // shadow
    ShadowArgs sa;
    auto* shadow = app.add_subcommand("shadow", "shadowing of pseudo-orbits");
    shadow->require_subcommand(1);
    auto* sv = shadow->add_subcommand("verify", "shadow one seeded pseudo-orbit");
    auto* sn = shadow->add_subcommand("newton", "Newton shadowing of one seeded pseudo-orbit");
    auto* sh = shadow->add_subcommand("holder", "fit epsilon_min against delta");
    for (auto* s : {sv, sn}) {
        s->add_option("--x0", sa.x0, "start x");
        s->add_option("--y0", sa.y0, "start y");
    }
    sv->add_option("--method", sa.method, "auto, oracle or newton");
    sh->add_option("--method", sa.method, "auto, oracle or newton");
    sh->add_option("--deltas", sa.deltas, "comma-separated delta grid");
    sh->add_option("--samples", sa.samples, "pseudo-orbits per delta");
    sh->add_option("--noise", sa.noise, "uniform or drift");

    // crooked
    CrookedArgs ka;
    auto* crooked = app.add_subcommand("crooked", "crooked horseshoe and its finite cover");
    crooked->require_subcommand(1);
    auto* kb = crooked->add_subcommand("build", "model geometry, Markov covers and fixed points");
    auto* ks = crooked->add_subcommand("shadow", "first-coordinate shadowing of a rotation pseudo-orbit");
    for (auto* s : {kb, ks}) {
        s->add_option("--mu", ka.mu, "contraction");
        s->add_option("--kappa", ka.kappa, "expansion");
        s->add_option("--multiplier", ka.multiplier, "boundary multiplier");
    }
    ks->add_option("--q", ka.q, "cover sheets");
    ks->add_option("--p", ka.p, "rotation numerator");
    ks->add_option("--blocks", ka.blocks, "window in blocks of m steps");
    ks->add_option("--x0", ka.x0, "start of the pseudo-orbit");

    // saddle
    SaddleArgs da;
    auto* saddle = app.add_subcommand("saddle", "saddle with a homoclinic loop");
    saddle->require_subcommand(1);
    auto* dk = saddle->add_subcommand("sink", "scan n for a certified sink");
    auto* dc = saddle->add_subcommand("cone", "cone invariance check");
    auto* dt = saddle->add_subcommand("tvm", "time map distance of the linear saddle flow");
    for (auto* s : {dk, dc}) {
        s->add_option("--sigma", da.sigma, "expansion");
        s->add_option("--gamma", da.gamma, "dissipation exponent");
        s->add_option("--b", da.b, "fundamental domain start");
        s->add_option("--b-mid", da.b_mid, "sign change of the perturbation");
        s->add_option("--c1", da.c1, "maximum location");
        s->add_option("--c2", da.c2, "minimum location");
        s->add_option("--anchor", da.a, "stable anchor");
        s->add_option("--alpha", da.alpha, "box exponent");
        s->add_option("--samples", da.samples, "samples per box");
    }
    dk->add_option("--n-lo", da.n_lo, "first n");
    dk->add_option("--n-hi", da.n_hi, "last n");
    dc->add_option("--t", da.t, "perturbation size (default: the n = 15 value)");
    dc->add_option("--xi", da.xi, "cone exponent");
    dt->add_option("--lambda", da.lambda, "contraction per unit time");
    dt->add_option("--sigma", da.flow_sigma, "expansion per unit time");
    dt->add_option("--t-max", da.t_max, "largest time");
    dt->add_option("--t-count", da.t_count, "number of times");
    dt->add_option("--grid", da.grid, "sample grid per side");

    // example-b
    ExampleArgs ea;
    auto* ex = app.add_subcommand("example-b", "glued annulus example");
    ex->require_subcommand(1);
    auto* eb = ex->add_subcommand("build", "schedule, continuity and band distances");
    auto* ec = ex->add_subcommand("check", "condition report at level k");
    for (auto* s : {eb, ec}) {
        s->add_option("--depth", ea.depth, "number of annuli");
        s->add_option("--c-gap", ea.c_gap, "gap constant");
    }
    ec->add_option("--k", ea.k, "level");
    ec->add_option("--trials", ea.trials, "shadowing trials");
    ec->add_option("--blocks", ea.blocks, "shadowing window in blocks");

    // circle
    CircleArgs ra;
    auto* circle = app.add_subcommand("circle", "circle endomorphisms");
    circle->require_subcommand(1);
    const std::vector<std::string> circle_names{"degree", "turning", "expanding", "semiconj", "escape", "param"};
    std::vector<CLI::App*> circle_subs;
    for (const auto& name : circle_names) circle_subs.push_back(circle->add_subcommand(name));
    circle_subs[1]->add_option("--grid", ra.grid, "grid size");
    circle_subs[2]->add_option("--n", ra.n, "iterates");
    circle_subs[2]->add_option("--grid", ra.grid, "grid size");
    circle_subs[3]->add_option("--depth", ra.depth, "itinerary digits");
    circle_subs[4]->add_option("--index", ra.index, "turning point index");
    circle_subs[4]->add_option("--j-max", ra.j_max, "iteration budget");
    circle_subs[4]->add_option("--grid", ra.grid, "grid size");
    circle_subs[5]->add_option("--x", ra.x, "target point");
    circle_subs[5]->add_option("--n-max", ra.n_max, "largest period");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        auto run = [&](CLI::App* group, CLI::App* sub) {
            common.command = group->get_name() + " " + sub->get_name();
            record(sub);
        };
        if (*chain) {
            CLI::App* sub = chain->get_subcommands().front();
            run(chain, sub);
            if (sub == ct) chain_trap(ca);
            else chain_components(ca, sub == cl);
        } else if (*shadow) {
            CLI::App* sub = shadow->get_subcommands().front();
            run(shadow, sub);
            if (sub == sh) shadow_holder(sa);
            else shadow_verify(sa, sub == sn);
        } else if (*crooked) {
            CLI::App* sub = crooked->get_subcommands().front();
            run(crooked, sub);
            if (sub == kb) crooked_build(ka);
            else crooked_shadow(ka);
        } else if (*saddle) {
            CLI::App* sub = saddle->get_subcommands().front();
            run(saddle, sub);
            if (sub == dk) saddle_sink(da);
            else if (sub == dc) saddle_cone(da);
            else saddle_tvm(da);
        } else if (*ex) {
            CLI::App* sub = ex->get_subcommands().front();
            run(ex, sub);
            if (sub == eb) example_build(ea);
            else example_check(ea);
        } else if (*circle) {
            CLI::App* sub = circle->get_subcommands().front();
            run(circle, sub);
            circle_command(sub->get_name(), ra);
        }
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
