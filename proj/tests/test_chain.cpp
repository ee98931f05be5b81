#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "shadowlab/chain.hpp"
#include "shadowlab/example_b.hpp"
#include "shadowlab/maps.hpp"

using namespace shadowlab;

namespace {

// Reachability by BFS from every node: the independent oracle for SCC results.
std::vector<std::vector<char>> reach_matrix(const TransitionGraph& g) {
    const int n = static_cast<int>(g.num_boxes());
    std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
    for (int s = 0; s < n; ++s) {
        std::queue<int> q;
        for (int t : g.successors(s))
            if (!r[s][t]) r[s][t] = 1, q.push(t);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int t : g.successors(u))
                if (!r[s][t]) r[s][t] = 1, q.push(t);
        }
    }
    return r;
}

// Components as sets of boxes from the reachability oracle.
std::set<std::vector<int>> brute_components(const TransitionGraph& g) {
    const auto r = reach_matrix(g);
    const int n = static_cast<int>(g.num_boxes());
    std::set<std::vector<int>> out;
    std::vector<char> used(n, 0);
    for (int a = 0; a < n; ++a) {
        if (used[a] || !r[a][a]) continue;
        std::vector<int> comp;
        for (int b = a; b < n; ++b)
            if (r[a][b] && r[b][a]) comp.push_back(b), used[b] = 1;
        out.insert(comp);
    }
    return out;
}

std::set<std::vector<int>> as_set(const ChainComponents& c) { return {c.components.begin(), c.components.end()}; }

double min_circle_gap(double x, std::initializer_list<double> targets) {
    double best = 1.0;
    for (double t : targets) best = std::min(best, circle_dist(x, t));
    return best;
}

}  // namespace

TEST_SUITE("chain") {
    TEST_CASE("cover sizes") {
        CHECK(build_cover(Window::annulus(-1.0, 1.0), 1.0 / 8).size() == 128);
        CHECK(build_cover(Window::circle(), 1.0 / 256).size() == 256);
        CHECK_THROWS_AS(build_cover(Window::circle(), 0.0), PreconditionError);
        CHECK_THROWS_AS(build_cover(Window::annulus(-1.0, 1.0), 1e-5, 1000), PreconditionError);
    }

    TEST_CASE("box geometry") {
        const BoxCover c = build_cover(Window::annulus(-1.0, 1.0), 0.25);
        CHECK(c.nx == 4);
        CHECK(c.ny == 8);
        const int b = c.box_of({0.3, -0.1});
        CHECK(c.lo(b).x <= 0.3);
        CHECK(c.hi(b).x >= 0.3);
        CHECK(c.box_of({1.3, -0.1}) == b);  // periodic in x
        CHECK(c.box_of({0.3, 1.5}) == -1);
    }

    TEST_CASE("identity map graph") {
        const BoxCover c = build_cover(Window::circle(), 1.0 / 64);
        const TransitionGraph g = build_graph(identity_map(Space::Circle), c, 0.0);
        for (int b = 0; b < 64; ++b) CHECK(g.has_edge(b, b));
        CHECK(chain_recurrent_boxes(g).size() == 64);
        const TransitionGraph h = build_graph(identity_map(Space::Circle), c, 1.0 / 64);
        CHECK(epsilon_components(h).components.size() == 1);
    }

    TEST_CASE("rotation graph is one component") {
        const BoxCover c = build_cover(Window::circle(), 1.0 / 256);
        const TransitionGraph g = build_graph(rotation_map(0.3), c, 1.0 / 256);
        const ChainComponents cc = epsilon_components(g);
        CHECK(cc.components.size() == 1);
        CHECK(cc.components[0].size() == 256);
        CHECK(as_set(cc) == brute_components(g));
    }

    TEST_CASE("north-south map: components around the fixed points") {
        const double h = 1.0 / 256;
        const BoxCover c = build_cover(Window::circle(), h);
        const TransitionGraph g = build_graph(north_south_map(), c, h);
        const ChainComponents cc = epsilon_components(g);
        CHECK(as_set(cc) == brute_components(g));
        const int repeller = cc.label[c.box_of({0.0, 0.0})];
        const int attractor = cc.label[c.box_of({0.5, 0.0})];
        REQUIRE(repeller >= 0);
        REQUIRE(attractor >= 0);
        CHECK(repeller != attractor);
        CHECK(cc.components[repeller].size() >= 2);
        CHECK(cc.components[attractor].size() >= 2);
        // Any further component is a self-loop singleton in the band where the padded image still
        // meets its own box but no longer reaches back toward the fixed point:
        // |lambda - 1| (i + 1/2) h <= delta + (L + 1) h / 2 with |lambda - 1| = 0.2 pi.
        const double reach = (h + g.max_padding + h / 2) / (0.2 * M_PI);
        for (std::size_t k = 0; k < cc.components.size(); ++k) {
            if (static_cast<int>(k) == repeller || static_cast<int>(k) == attractor) continue;
            REQUIRE(cc.components[k].size() == 1);
            const int b = cc.components[k][0];
            CHECK(g.has_edge(b, b));
            CHECK(min_circle_gap(c.center(b).x, {0.0, 0.5}) <= reach + 1e-12);
        }
        for (int b : chain_recurrent_boxes(g)) CHECK(min_circle_gap(c.center(b).x, {0.0, 0.5}) <= reach + 1e-12);

        const LyapunovData l = lyapunov_values(g, cc);
        CHECK(l.g[c.box_of({0.0, 0.0})] > l.g[c.box_of({0.5, 0.0})]);
        const LyapunovAudit a = audit_lyapunov(g, cc, l);
        CHECK(a.condensation_edges > 0);
        CHECK(a.decreasing == a.condensation_edges);
        CHECK(a.constant_on_components);
        // one value per rank of the condensation restricted to recurrent classes
        std::set<double> values;
        for (int b : chain_recurrent_boxes(g)) values.insert(l.g[b]);
        CHECK(a.distinct_recurrent_values == values.size());
    }

    TEST_CASE("contraction recurrent band") {
        const double rho = 1.0 / 64;
        const BoxCover c = build_cover(Window::annulus(-1.0, 1.0), rho);
        const double delta = rho / 4;
        const TransitionGraph g = build_graph(annulus_contraction(0.3, 0.5), c, delta);
        const auto rec = chain_recurrent_boxes(g);
        CHECK(!rec.empty());
        // self-loop needs |y|/2 - rho/2 <= delta + padding
        const double band = 2.0 * (delta + g.max_padding) + rho;
        for (int b : rec) CHECK(std::fabs(c.center(b).y) <= band + 1e-12);
        for (int b = 0; b < static_cast<int>(c.size()); ++b)
            if (std::fabs(c.center(b).y) < rho) CHECK(std::find(rec.begin(), rec.end(), b) != rec.end());
    }

    TEST_CASE("graph soundness by sampling") {
        const double rho = 1.0 / 128, delta = 1.0 / 256;
        for (const DynMap& f : {north_south_map(), trig_map(0.0, 2.0, 0.05), annulus_contraction(0.3, 0.5)}) {
            const bool two = dimension(f.space) == 2;
            const BoxCover c = build_cover(two ? Window::annulus(-1.0, 1.0) : Window::circle(), rho);
            const TransitionGraph g = build_graph(f, c, delta);
            std::mt19937_64 rng(3);
            std::uniform_real_distribution<double> u(0.0, 1.0), s(-1.0, 1.0);
            int missing = 0;
            for (int i = 0; i < 10000; ++i) {
                const Vec2 x{u(rng), two ? s(rng) : 0.0};
                const Vec2 fx = f(x);
                Vec2 y{fx.x + delta * s(rng), two ? fx.y + delta * s(rng) : 0.0};
                y = normalize(f.space, y);
                const int from = c.box_of(x), to = c.box_of(y);
                if (to < 0) continue;
                if (!g.has_edge(from, to)) ++missing;
            }
            CHECK(missing == 0);
        }
    }

    TEST_CASE("components do not depend on box order") {
        const BoxCover c = build_cover(Window::circle(), 1.0 / 128);
        const TransitionGraph g = build_graph(north_south_map(), c, 1.0 / 128);
        const int n = static_cast<int>(g.num_boxes());
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), std::mt19937(8));
        std::vector<std::pair<int, int>> edges;
        for (int b = 0; b < n; ++b)
            for (int t : g.successors(b)) edges.emplace_back(perm[b], perm[t]);
        const ChainComponents a = epsilon_components(g);
        const ChainComponents p = epsilon_components(graph_from_edges(n, edges));
        std::set<std::vector<int>> mapped;
        for (const auto& comp : a.components) {
            std::vector<int> v;
            for (int b : comp) v.push_back(perm[b]);
            std::sort(v.begin(), v.end());
            mapped.insert(v);
        }
        CHECK(mapped == as_set(p));
        // labels form a partition of the recurrent boxes
        std::vector<int> seen(n, 0);
        for (const auto& comp : p.components)
            for (int b : comp) ++seen[b];
        for (int b = 0; b < n; ++b) CHECK(seen[b] == (p.label[b] >= 0 ? 1 : 0));
    }

    TEST_CASE("lyapunov on synthetic graphs") {
        const TransitionGraph chain3 = graph_from_edges(3, {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}});
        const ChainComponents c3 = epsilon_components(chain3);
        const LyapunovData l3 = lyapunov_values(chain3, c3);
        CHECK(l3.g[0] > l3.g[1]);
        CHECK(l3.g[1] > l3.g[2]);

        const TransitionGraph cycle = graph_from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
        const ChainComponents cc = epsilon_components(cycle);
        CHECK(cc.components.size() == 1);
        const LyapunovData lc = lyapunov_values(cycle, cc);
        for (int b = 1; b < 4; ++b) CHECK(lc.g[b] == lc.g[0]);
    }

    TEST_CASE("forward trap for a radial contraction") {
        const double rho = 1.0 / 32;
        const BoxCover c = build_cover(Window::annulus(-1.0, 1.0), rho);
        const DynMap f = annulus_contraction(0.3, 0.5);
        const auto k = cylinder_boxes(c, 0.4);
        const auto u = cylinder_boxes(c, 1.0);
        const TrapReport r = verify_trap(f, c, k, u, TrapKind::Forward, {0.5, 0.4, 0.3, 0.2, 0.1, 0.05});
        CHECK(r.kind == TrapKind::Forward);
        CHECK(r.delta > 0.0);
        // d(f(U), complement of U) = 1/2 bounds any certified fattening
        CHECK(r.effective_eps <= 0.5 + 1e-12);
        const TransitionGraph replay = build_graph(f, c, r.delta);
        CHECK(trap_holds(replay, k, u, TrapKind::Forward));
    }

    TEST_CASE("no trap when K = U is only weakly invariant") {
        const BoxCover c = build_cover(Window::annulus(-1.0, 1.0), 1.0 / 16);
        const auto k = cylinder_boxes(c, 0.5);
        const TrapReport r = verify_trap(identity_map(Space::Annulus), c, k, k, TrapKind::Forward, {0.1, 0.05, 1.0 / 64});
        CHECK(r.kind == TrapKind::None);
        CHECK_THROWS_AS(verify_trap(identity_map(Space::Annulus), c, cylinder_boxes(c, 0.9), k, TrapKind::Forward, {0.1}),
                        PreconditionError);
    }

    TEST_CASE("periodic points in components") {
        const BoxCover c = build_cover(Window::circle(), 1.0 / 64);
        std::vector<int> all(64);
        std::iota(all.begin(), all.end(), 0);
        const auto e2 = find_periodic_in_component(linear_expanding_map(2), c, all, 1, 1e-10);
        bool zero = false;
        for (const auto& p : e2) zero = zero || (p.period == 1 && circle_dist(p.point.x, 0.0) < 1e-10);
        CHECK(zero);

        const BoxCover c2 = build_cover(Window::circle(), 1.0 / 256);
        const DynMap ns = north_south_map();
        const TransitionGraph g = build_graph(ns, c2, 1.0 / 256);
        const ChainComponents cc = epsilon_components(g);
        for (double fixed : {0.0, 0.5}) {
            const auto& comp = cc.components[cc.label[c2.box_of({fixed, 0.0})]];
            const auto pts = find_periodic_in_component(ns, c2, comp, 2, 1e-10);
            REQUIRE(!pts.empty());
            for (const auto& p : pts) {
                CHECK(min_circle_gap(p.point.x, {0.0, 0.5}) < 1e-10);
                // re-evaluate in long double
                const long double x = p.point.x;
                long double y = x;
                for (int i = 0; i < p.period; ++i) y = y + 0.1L * std::sin(2.0L * 3.14159265358979323846L * y);
                long double d = std::fabs(y - x);
                d = std::min(d, 1.0L - d);
                CHECK(static_cast<double>(d) < 1e-10);
            }
        }
    }

    TEST_CASE("csv exports") {
        const TransitionGraph g = graph_from_edges(2, {{0, 1}, {1, 0}});
        const std::string e = edges_csv(g);
        CHECK(e.find("0,1") != std::string::npos);
        const ChainComponents c = epsilon_components(g);
        const std::string cs = components_csv(c, lyapunov_values(g, c));
        CHECK(cs.find("box") == 0);
    }
}
