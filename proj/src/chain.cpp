#include "shadowlab/chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

namespace shadowlab {

Window Window::circle() { return Window{}; }

Window Window::annulus(double y0, double y1) {
    Window w;
    w.y0 = y0;
    w.y1 = y1;
    w.dim = 2;
    return w;
}

Window Window::torus() {
    Window w;
    w.y0 = 0.0;
    w.y1 = 1.0;
    w.periodic_y = true;
    w.dim = 2;
    return w;
}

Window Window::plane(double x0, double x1, double y0, double y1) {
    Window w;
    w.x0 = x0;
    w.x1 = x1;
    w.y0 = y0;
    w.y1 = y1;
    w.periodic_x = false;
    w.dim = 2;
    return w;
}

Vec2 BoxCover::lo(int b) const {
    return {window.x0 + ix_of(b) * hx, window.dim == 2 ? window.y0 + iy_of(b) * hy : 0.0};
}

Vec2 BoxCover::hi(int b) const {
    return {window.x0 + (ix_of(b) + 1) * hx, window.dim == 2 ? window.y0 + (iy_of(b) + 1) * hy : 0.0};
}

Vec2 BoxCover::center(int b) const {
    return {window.x0 + (ix_of(b) + 0.5) * hx, window.dim == 2 ? window.y0 + (iy_of(b) + 0.5) * hy : 0.0};
}

namespace {
int axis_index(double v, double origin, double h, int count, bool periodic) {
    const double t = (v - origin) / h;
    double fl = std::floor(t);
    if (periodic) {
        fl -= count * std::floor(fl / count);
        return static_cast<int>(fl);
    }
    if (t == count) fl = count - 1;
    return (fl >= 0 && fl < count) ? static_cast<int>(fl) : -1;
}
}  // namespace

int BoxCover::box_of(Vec2 p) const {
    const int ix = axis_index(p.x, window.x0, hx, nx, window.periodic_x);
    if (ix < 0) return -1;
    if (window.dim == 1) return ix;
    const int iy = axis_index(p.y, window.y0, hy, ny, window.periodic_y);
    if (iy < 0) return -1;
    return index(ix, iy);
}

void BoxCover::boxes_of(const std::vector<Vec2>& pts, std::vector<std::int32_t>& out) const {
    out.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) out[i] = box_of(pts[i]);
}

BoxCover build_cover(const Window& window, double rho, std::size_t limit) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw PreconditionError("rho must be positive");
    const double width = window.x1 - window.x0;
    const double height = window.y1 - window.y0;
    if (!(width > 0.0) || (window.dim == 2 && !(height > 0.0))) throw PreconditionError("window must be nonempty");
    const double nxd = std::ceil(width / rho - 1e-9);
    const double nyd = window.dim == 2 ? std::ceil(height / rho - 1e-9) : 1.0;
    if (nxd * nyd > static_cast<double>(limit)) throw PreconditionError("box count exceeds the configured limit");
    BoxCover c;
    c.window = window;
    c.rho = rho;
    c.nx = static_cast<int>(nxd);
    c.ny = static_cast<int>(nyd);
    c.hx = width / c.nx;
    c.hy = window.dim == 2 ? height / c.ny : 0.0;
    return c;
}

int worker_count(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* env = std::getenv("SHADOWLAB_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return n;
}

bool TransitionGraph::has_edge(int from, int to) const {
    auto s = successors(from);
    return std::binary_search(s.begin(), s.end(), to);
}

namespace {

// Indices of cells along one axis meeting [lo, hi]. Sets `escaped` when the interval leaves a
// non-periodic axis.
void axis_range(double lo, double hi, double origin, double h, int count, bool periodic, double extent,
                std::vector<int>& out, bool& escaped) {
    out.clear();
    long long a = static_cast<long long>(std::floor((lo - origin) / h));
    long long b = static_cast<long long>(std::floor((hi - origin) / h));
    if (periodic) {
        if (b - a + 1 >= count) {
            for (int i = 0; i < count; ++i) out.push_back(i);
            return;
        }
        for (long long i = a; i <= b; ++i) {
            long long w = i % count;
            if (w < 0) w += count;
            out.push_back(static_cast<int>(w));
        }
        return;
    }
    if (lo < origin || hi > origin + extent) escaped = true;
    a = std::max<long long>(a, 0);
    b = std::min<long long>(b, count - 1);
    for (long long i = a; i <= b; ++i) out.push_back(static_cast<int>(i));
}

struct Chunk {
    std::vector<std::uint64_t> counts;
    std::vector<std::int32_t> targets;
    std::vector<std::uint8_t> escapes;
    double max_padding = 0.0;
};

}  // namespace

TransitionGraph build_graph(const DynMap& f, const BoxCover& cover, double delta, const GraphOptions& opts) {
    if (!(delta >= 0.0)) throw PreconditionError("delta must be >= 0");
    const bool local = static_cast<bool>(f.derivative_bound);
    const bool lip = f.lipschitz_bound.has_value();
    const bool sampled = !local && !lip && opts.sampling_budget.has_value();
    if (!local && !lip && !sampled) throw PreconditionError("map needs a Lipschitz bound or a sampling budget");
    if (sampled && *opts.sampling_budget < 2) throw PreconditionError("sampling budget must be >= 2 per side");

    const Window& w = cover.window;
    const bool two = w.dim == 2;
    const int n = static_cast<int>(cover.size());
    const int workers = std::max(1, std::min(worker_count(opts.threads), n / 4096 + 1));

    auto work = [&](int begin, int end, Chunk& out) {
        out.counts.assign(static_cast<std::size_t>(end - begin), 0);
        out.escapes.assign(static_cast<std::size_t>(end - begin), 0);
        std::vector<int> xs, ys;
        std::vector<std::int32_t> local_targets;
        auto add_ball = [&](Vec2 c, double rx, double ry, bool& escaped) {
            axis_range(c.x - rx, c.x + rx, w.x0, cover.hx, cover.nx, w.periodic_x, w.x1 - w.x0, xs, escaped);
            if (two)
                axis_range(c.y - ry, c.y + ry, w.y0, cover.hy, cover.ny, w.periodic_y, w.y1 - w.y0, ys, escaped);
            else
                ys.assign(1, 0);
            for (int iy : ys)
                for (int ix : xs) local_targets.push_back(cover.index(ix, iy));
        };
        for (int b = begin; b < end; ++b) {
            local_targets.clear();
            bool escaped = false;
            if (sampled) {
                const int s = *opts.sampling_budget;
                const Vec2 lo = cover.lo(b), hi = cover.hi(b);
                for (int j = 0; j < (two ? s : 1); ++j)
                    for (int i = 0; i < s; ++i) {
                        const Vec2 p{lo.x + (hi.x - lo.x) * i / (s - 1), two ? lo.y + (hi.y - lo.y) * j / (s - 1) : 0.0};
                        add_ball(f(p), delta + 1e-12, delta + 1e-12, escaped);
                    }
            } else {
                double px, py;
                if (local) {
                    const Mat2 m = f.derivative_bound(cover.lo(b), cover.hi(b));
                    px = 0.5 * (std::fabs(m.a) * cover.hx + (two ? std::fabs(m.b) * cover.hy : 0.0));
                    py = two ? 0.5 * (std::fabs(m.c) * cover.hx + std::fabs(m.d) * cover.hy) : 0.0;
                } else {
                    const double r = *f.lipschitz_bound * 0.5 * (two ? std::max(cover.hx, cover.hy) : cover.hx);
                    px = r;
                    py = two ? r : 0.0;
                }
                out.max_padding = std::max({out.max_padding, px, py});
                add_ball(f(cover.center(b)), delta + px + 1e-12, delta + py + 1e-12, escaped);
            }
            std::sort(local_targets.begin(), local_targets.end());
            local_targets.erase(std::unique(local_targets.begin(), local_targets.end()), local_targets.end());
            out.counts[static_cast<std::size_t>(b - begin)] = local_targets.size();
            out.escapes[static_cast<std::size_t>(b - begin)] = escaped ? 1 : 0;
            out.targets.insert(out.targets.end(), local_targets.begin(), local_targets.end());
        }
    };

    std::vector<Chunk> chunks(static_cast<std::size_t>(workers));
    if (workers == 1) {
        work(0, n, chunks[0]);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) {
            const int begin = static_cast<int>(static_cast<long long>(n) * t / workers);
            const int end = static_cast<int>(static_cast<long long>(n) * (t + 1) / workers);
            pool.emplace_back(work, begin, end, std::ref(chunks[static_cast<std::size_t>(t)]));
        }
        for (auto& th : pool) th.join();
    }

    TransitionGraph g;
    g.cover = cover;
    g.delta = delta;
    g.padding_mode = sampled ? "sampled" : (local ? "local-derivative" : "lipschitz");
    g.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    g.escapes.reserve(static_cast<std::size_t>(n));
    std::size_t total = 0;
    for (const Chunk& c : chunks) total += c.targets.size();
    g.targets.reserve(total);
    std::size_t b = 0;
    for (Chunk& c : chunks) {
        for (std::size_t i = 0; i < c.counts.size(); ++i, ++b) g.offsets[b + 1] = g.offsets[b] + c.counts[i];
        g.targets.insert(g.targets.end(), c.targets.begin(), c.targets.end());
        g.escapes.insert(g.escapes.end(), c.escapes.begin(), c.escapes.end());
        g.max_padding = std::max(g.max_padding, c.max_padding);
        c = Chunk{};
    }
    if (sampled) g.max_padding = 0.0;
    return g;
}

TransitionGraph graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    TransitionGraph g;
    g.cover = build_cover(Window::circle(), 1.0 / n);
    g.padding_mode = "synthetic";
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || a >= n || b >= n) throw PreconditionError("edge endpoint out of range");
        adj[static_cast<std::size_t>(a)].push_back(b);
    }
    g.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int v = 0; v < n; ++v) {
        auto& a = adj[static_cast<std::size_t>(v)];
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
        g.offsets[static_cast<std::size_t>(v) + 1] = g.offsets[static_cast<std::size_t>(v)] + a.size();
        g.targets.insert(g.targets.end(), a.begin(), a.end());
    }
    g.escapes.assign(static_cast<std::size_t>(n), 0);
    return g;
}

TransitionGraph reverse_graph(const TransitionGraph& g) {
    TransitionGraph r;
    r.cover = g.cover;
    r.delta = g.delta;
    r.padding_mode = g.padding_mode;
    r.max_padding = g.max_padding;
    const std::size_t n = g.num_boxes();
    r.offsets.assign(n + 1, 0);
    for (std::int32_t t : g.targets) ++r.offsets[static_cast<std::size_t>(t) + 1];
    for (std::size_t i = 0; i < n; ++i) r.offsets[i + 1] += r.offsets[i];
    r.targets.resize(g.targets.size());
    std::vector<std::uint64_t> fill(r.offsets.begin(), r.offsets.end() - 1);
    for (std::size_t v = 0; v < n; ++v)
        for (std::uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e)
            r.targets[fill[static_cast<std::size_t>(g.targets[e])]++] = static_cast<std::int32_t>(v);
    r.escapes.assign(n, 0);
    return r;
}

std::vector<int> strongly_connected_components(const std::vector<std::uint64_t>& offsets,
                                               const std::vector<std::int32_t>& targets, int& count) {
    const int n = static_cast<int>(offsets.size()) - 1;
    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0),
        comp(static_cast<std::size_t>(n), -1);
    std::vector<std::uint8_t> on_stack(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    std::vector<std::pair<int, std::uint64_t>> call;  // node, next edge position
    int next_index = 0;
    count = 0;
    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        call.emplace_back(root, offsets[root]);
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            if (pos < offsets[v + 1]) {
                const int w = targets[pos++];
                if (index[w] < 0) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.emplace_back(w, offsets[w]);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const int done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
            if (low[done] == index[done]) {
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = count;
                } while (w != done);
                ++count;
            }
        }
    }
    return comp;
}

namespace {
std::vector<char> recurrent_mask(const TransitionGraph& g, const std::vector<int>& scc, int count) {
    const int n = static_cast<int>(g.num_boxes());
    std::vector<int> size(static_cast<std::size_t>(count), 0);
    for (int c : scc) ++size[static_cast<std::size_t>(c)];
    std::vector<char> rec(static_cast<std::size_t>(n), 0);
    for (int b = 0; b < n; ++b) rec[b] = size[scc[b]] > 1 || g.has_edge(b, b);
    return rec;
}
}  // namespace

std::vector<int> chain_recurrent_boxes(const TransitionGraph& g) {
    int count = 0;
    const auto scc = strongly_connected_components(g.offsets, g.targets, count);
    const auto rec = recurrent_mask(g, scc, count);
    std::vector<int> out;
    for (std::size_t b = 0; b < rec.size(); ++b)
        if (rec[b]) out.push_back(static_cast<int>(b));
    return out;
}

ChainComponents epsilon_components(const TransitionGraph& g) {
    ChainComponents out;
    out.scc = strongly_connected_components(g.offsets, g.targets, out.scc_count);
    const auto rec = recurrent_mask(g, out.scc, out.scc_count);
    const int n = static_cast<int>(g.num_boxes());
    std::vector<int> label_of_scc(static_cast<std::size_t>(out.scc_count), -1);
    out.label.assign(static_cast<std::size_t>(n), -1);
    // Scanning boxes in index order assigns labels by lowest box index.
    for (int b = 0; b < n; ++b) {
        if (!rec[b]) continue;
        int& l = label_of_scc[out.scc[b]];
        if (l < 0) {
            l = static_cast<int>(out.components.size());
            out.components.emplace_back();
        }
        out.label[b] = l;
        out.components[static_cast<std::size_t>(l)].push_back(b);
    }
    return out;
}

LyapunovData lyapunov_values(const TransitionGraph& g, const ChainComponents& c) {
    const int n = static_cast<int>(g.num_boxes());
    const int k = c.scc_count;
    // Boxes grouped by SCC.
    std::vector<int> start(static_cast<std::size_t>(k) + 1, 0);
    for (int s : c.scc) ++start[static_cast<std::size_t>(s) + 1];
    for (int i = 0; i < k; ++i) start[i + 1] += start[i];
    std::vector<int> members(static_cast<std::size_t>(n));
    std::vector<int> fill(start.begin(), start.end() - 1);
    for (int b = 0; b < n; ++b) members[static_cast<std::size_t>(fill[c.scc[b]]++)] = b;

    // Tarjan numbers SCCs sinks-first, so descending ids form a topological order.
    std::vector<int> rank(static_cast<std::size_t>(k), 0);
    for (int s = k - 1; s >= 0; --s)
        for (int i = start[s]; i < start[s + 1]; ++i)
            for (std::int32_t t : g.successors(members[static_cast<std::size_t>(i)])) {
                const int ts = c.scc[t];
                if (ts != s) rank[ts] = std::max(rank[ts], rank[s] + 1);
            }
    LyapunovData out;
    out.max_rank = k == 0 ? 0 : *std::max_element(rank.begin(), rank.end());
    out.g.resize(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) out.g[b] = static_cast<double>(out.max_rank - rank[c.scc[b]]);
    return out;
}

LyapunovAudit audit_lyapunov(const TransitionGraph& g, const ChainComponents& c, const LyapunovData& l) {
    LyapunovAudit a;
    const int n = static_cast<int>(g.num_boxes());
    std::set<double> values;
    std::vector<double> comp_value(c.components.size(), std::nan(""));
    for (int b = 0; b < n; ++b) {
        for (std::int32_t t : g.successors(b)) {
            if (c.scc[b] == c.scc[t]) continue;
            ++a.condensation_edges;
            if (l.g[b] > l.g[t]) ++a.decreasing;
        }
        const int lab = c.label[b];
        if (lab >= 0) {
            values.insert(l.g[b]);
            double& v = comp_value[static_cast<std::size_t>(lab)];
            if (std::isnan(v))
                v = l.g[b];
            else if (v != l.g[b])
                a.constant_on_components = false;
        }
    }
    a.distinct_recurrent_values = values.size();
    return a;
}

const char* trap_kind_name(TrapKind k) {
    switch (k) {
        case TrapKind::None: return "none";
        case TrapKind::Forward: return "forward";
        case TrapKind::Backward: return "backward";
        case TrapKind::Full: return "full";
    }
    return "none";
}

namespace {
// Breadth-first reach from `seeds`; false as soon as a box outside `inside` (or a flagged box) is hit.
bool reach_stays_inside(const TransitionGraph& g, const std::vector<int>& seeds, const std::vector<char>& inside,
                        const std::vector<char>* forbidden) {
    std::vector<char> seen(g.num_boxes(), 0);
    std::vector<int> queue(seeds.begin(), seeds.end());
    for (int s : seeds) seen[static_cast<std::size_t>(s)] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int v = queue[head];
        if (!inside[static_cast<std::size_t>(v)]) return false;
        if (forbidden != nullptr && (*forbidden)[static_cast<std::size_t>(v)]) return false;
        for (std::int32_t w : g.successors(v))
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                queue.push_back(w);
            }
    }
    return true;
}
}  // namespace

bool trap_holds(const TransitionGraph& g, const std::vector<int>& k_boxes, const std::vector<int>& u_boxes,
                TrapKind kind) {
    const std::size_t n = g.num_boxes();
    std::vector<char> inside(n, 0);
    for (int b : u_boxes) inside[static_cast<std::size_t>(b)] = 1;
    if (kind == TrapKind::Forward || kind == TrapKind::Full) {
        std::vector<char> escapes(g.escapes.begin(), g.escapes.end());
        if (!reach_stays_inside(g, k_boxes, inside, &escapes)) return false;
    }
    if (kind == TrapKind::Backward || kind == TrapKind::Full) {
        // Boxes on a non-periodic window edge may receive images from outside the window,
        // which the graph cannot see; reaching one backward cannot be certified.
        const BoxCover& c = g.cover;
        std::vector<char> edge(n, 0);
        for (std::size_t b = 0; b < n; ++b) {
            const int ix = c.ix_of(static_cast<int>(b)), iy = c.iy_of(static_cast<int>(b));
            if (!c.window.periodic_x && (ix == 0 || ix == c.nx - 1)) edge[b] = 1;
            if (c.window.dim == 2 && !c.window.periodic_y && (iy == 0 || iy == c.ny - 1)) edge[b] = 1;
        }
        const TransitionGraph r = reverse_graph(g);
        if (!reach_stays_inside(r, k_boxes, inside, &edge)) return false;
    }
    return kind != TrapKind::None;
}

TrapReport verify_trap(const DynMap& f, const BoxCover& cover, const std::vector<int>& k_boxes,
                       const std::vector<int>& u_boxes, TrapKind kind, std::vector<double> delta_grid,
                       const GraphOptions& opts) {
    std::vector<char> in_u(cover.size(), 0);
    for (int b : u_boxes) {
        if (b < 0 || static_cast<std::size_t>(b) >= cover.size()) throw PreconditionError("U box out of range");
        in_u[static_cast<std::size_t>(b)] = 1;
    }
    for (int b : k_boxes)
        if (b < 0 || static_cast<std::size_t>(b) >= cover.size() || !in_u[static_cast<std::size_t>(b)])
            throw PreconditionError("K must be contained in U");
    if (kind == TrapKind::None) throw PreconditionError("requested trap kind must be forward, backward or full");

    TrapReport rep;
    rep.k_boxes = k_boxes;
    rep.u_boxes = u_boxes;
    std::sort(delta_grid.begin(), delta_grid.end());
    delta_grid.erase(std::remove_if(delta_grid.begin(), delta_grid.end(), [](double d) { return !(d > 0.0); }),
                     delta_grid.end());
    delta_grid.erase(std::unique(delta_grid.begin(), delta_grid.end()), delta_grid.end());
    // The trap property only gets harder as delta grows, so bisect for the last certified grid value.
    int lo = -1, hi = static_cast<int>(delta_grid.size());
    double eff = 0.0;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        const TransitionGraph g = build_graph(f, cover, delta_grid[static_cast<std::size_t>(mid)], opts);
        const bool ok = trap_holds(g, k_boxes, u_boxes, kind);
        rep.tested.emplace_back(delta_grid[static_cast<std::size_t>(mid)], ok);
        if (ok) {
            lo = mid;
            eff = g.effective_eps();
        } else {
            hi = mid;
        }
    }
    if (lo >= 0) {
        rep.kind = kind;
        rep.delta = delta_grid[static_cast<std::size_t>(lo)];
        rep.effective_eps = eff;
    }
    return rep;
}

Vec2 periodic_residual(const DynMap& f, Vec2 x, int p) {
    Vec2 y = x;
    for (int i = 0; i < p; ++i) y = f(y);
    Vec2 r{y.x - x.x, y.y - x.y};
    if (f.space == Space::Circle || f.space == Space::Annulus || f.space == Space::Torus) r.x -= std::round(r.x);
    if (f.space == Space::Torus) r.y -= std::round(r.y);
    return r;
}

namespace {
double res_norm(Vec2 r, int dim) { return dim == 2 ? std::max(std::fabs(r.x), std::fabs(r.y)) : std::fabs(r.x); }

bool newton_periodic(const DynMap& f, Vec2 seed, int p, double tol, int max_iter, Vec2& out, double& res) {
    const int dim = dimension(f.space);
    Vec2 x = normalize(f.space, seed);
    Vec2 r = periodic_residual(f, x, p);
    double nr = res_norm(r, dim);
    for (int it = 0; it < max_iter && nr >= tol; ++it) {
        Mat2 J = Mat2::identity();
        if (dim == 1) J = Mat2{1.0, 0.0, 0.0, 0.0};
        Vec2 y = x;
        for (int i = 0; i < p; ++i) {
            J = f.jacobian(y) * J;
            y = f(y);
        }
        Mat2 A = J;
        A.a -= 1.0;
        if (dim == 2) A.d -= 1.0;
        Vec2 step;
        if (dim == 1) {
            if (std::fabs(A.a) < 1e-300) return false;
            step = {-r.x / A.a, 0.0};
        } else {
            const double det = A.det();
            if (!(std::fabs(det) > 1e-300)) return false;
            step = {-(A.d * r.x - A.b * r.y) / det, -(-A.c * r.x + A.a * r.y) / det};
        }
        // Damped update with residual backtracking.
        double lambda = 1.0;
        bool improved = false;
        for (int bt = 0; bt < 40; ++bt) {
            const Vec2 cand = normalize(f.space, {x.x + lambda * step.x, x.y + lambda * step.y});
            const Vec2 rc = periodic_residual(f, cand, p);
            const double nc = res_norm(rc, dim);
            if (std::isfinite(nc) && nc < nr) {
                x = cand;
                r = rc;
                nr = nc;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) break;
    }
    out = x;
    res = nr;
    return nr < tol;
}
}  // namespace

std::vector<PeriodicPoint> find_periodic_in_component(const DynMap& f, const BoxCover& cover,
                                                      const std::vector<int>& component, int p_max, double tol,
                                                      const PeriodicSearchOptions& opts) {
    if (!f.has_jacobian()) throw PreconditionError("periodic search requires a Jacobian");
    if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
    if (p_max < 1) throw PreconditionError("p_max must be >= 1");
    std::vector<char> member(cover.size(), 0);
    for (int b : component) member[static_cast<std::size_t>(b)] = 1;
    auto near_component = [&](Vec2 x) {
        const int b = cover.box_of(x);
        if (b < 0) return false;
        const int ix = cover.ix_of(b), iy = cover.iy_of(b);
        const int ry = cover.window.dim == 2 ? 1 : 0;
        for (int dy = -ry; dy <= ry; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                int jx = ix + dx, jy = iy + dy;
                if (cover.window.periodic_x) jx = (jx + cover.nx) % cover.nx;
                if (cover.window.periodic_y) jy = (jy + cover.ny) % cover.ny;
                if (jx < 0 || jx >= cover.nx || jy < 0 || jy >= cover.ny) continue;
                if (member[static_cast<std::size_t>(cover.index(jx, jy))]) return true;
            }
        return false;
    };

    std::vector<PeriodicPoint> found;
    if (component.empty()) return found;
    const std::size_t stride = std::max<std::size_t>(1, component.size() / static_cast<std::size_t>(std::max(1, opts.max_seeds)));
    const int dim = dimension(f.space);
    for (int p = 1; p <= p_max; ++p) {
        for (std::size_t i = 0; i < component.size(); i += stride) {
            Vec2 x;
            double res = 0.0;
            if (!newton_periodic(f, cover.center(component[i]), p, tol, opts.max_newton, x, res)) continue;
            if (!near_component(x)) continue;
            int period = p;
            for (int q = 1; q < p; ++q)
                if (p % q == 0 && res_norm(periodic_residual(f, x, q), dim) < tol) {
                    period = q;
                    break;
                }
            bool dup = false;
            for (const auto& e : found)
                if (e.period == period && distance(f.space, e.point, x) < 1e-9) dup = true;
            if (dup) continue;
            found.push_back({x, period, res_norm(periodic_residual(f, x, period), dim)});
            if (opts.max_points > 0 && static_cast<int>(found.size()) >= opts.max_points) return found;
        }
    }
    return found;
}

std::string edges_csv(const TransitionGraph& g) {
    std::ostringstream os;
    os << "from_box,to_box\n";
    for (std::size_t b = 0; b < g.num_boxes(); ++b)
        for (std::int32_t t : g.successors(static_cast<int>(b))) os << b << ',' << t << '\n';
    return os.str();
}

std::string components_csv(const ChainComponents& c, const LyapunovData& l) {
    std::ostringstream os;
    os << "box,component,g\n";
    for (std::size_t b = 0; b < c.label.size(); ++b) os << b << ',' << c.label[b] << ',' << l.g[b] << '\n';
    return os.str();
}

}  // namespace shadowlab
