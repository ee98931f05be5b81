#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shadowlab/core.hpp"

namespace shadowlab {

// Rectangle in (circle or interval) x (interval or circle) coordinates. dim == 1 ignores y.
struct Window {
    double x0 = 0.0, x1 = 1.0;
    double y0 = 0.0, y1 = 0.0;
    bool periodic_x = true;
    bool periodic_y = false;
    int dim = 1;

    static Window circle();
    static Window annulus(double y0, double y1);
    static Window torus();
    static Window plane(double x0, double x1, double y0, double y1);
};

struct BoxCover {
    Window window;
    double rho = 0.0;
    int nx = 0, ny = 1;
    double hx = 0.0, hy = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    int index(int ix, int iy) const { return iy * nx + ix; }
    int ix_of(int b) const { return b % nx; }
    int iy_of(int b) const { return b / nx; }
    Vec2 center(int b) const;
    Vec2 lo(int b) const;
    Vec2 hi(int b) const;
    // -1 when p lies outside the window along a non-periodic axis.
    int box_of(Vec2 p) const;
    void boxes_of(const std::vector<Vec2>& pts, std::vector<std::int32_t>& out) const;
};

BoxCover build_cover(const Window& window, double rho, std::size_t limit = std::size_t{1} << 24);

struct GraphOptions {
    // Grid points per box side used when the map has no derivative information.
    std::optional<int> sampling_budget;
    // 0 means hardware concurrency, capped by SHADOWLAB_THREADS when set.
    int threads = 0;
};

struct TransitionGraph {
    BoxCover cover;
    double delta = 0.0;
    std::string padding_mode;      // "lipschitz", "local-derivative", "sampled" or "synthetic"
    double max_padding = 0.0;      // largest per-axis padding used
    std::vector<std::uint64_t> offsets;
    std::vector<std::int32_t> targets;
    std::vector<std::uint8_t> escapes;  // image ball leaves the window along a non-periodic axis

    std::size_t num_boxes() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t num_edges() const { return targets.size(); }
    std::span<const std::int32_t> successors(int b) const {
        return {targets.data() + offsets[b], static_cast<std::size_t>(offsets[b + 1] - offsets[b])};
    }
    bool has_edge(int from, int to) const;
    // Effective epsilon of the box-scale relation: delta plus the largest padding.
    double effective_eps() const { return delta + max_padding; }
};

int worker_count(int requested);

TransitionGraph build_graph(const DynMap& f, const BoxCover& cover, double delta, const GraphOptions& opts = {});
// Graph on n abstract nodes, for synthetic checks.
TransitionGraph graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges);
TransitionGraph reverse_graph(const TransitionGraph& g);

// Iterative Tarjan. Component ids are assigned in completion order, i.e. reverse topological
// order of the condensation.
std::vector<int> strongly_connected_components(const std::vector<std::uint64_t>& offsets,
                                               const std::vector<std::int32_t>& targets, int& count);

std::vector<int> chain_recurrent_boxes(const TransitionGraph& g);

struct ChainComponents {
    std::vector<int> label;                    // component id, or -1 for non-recurrent boxes
    std::vector<std::vector<int>> components;  // sorted box lists, ordered by lowest box index
    std::vector<int> scc;                      // raw SCC id for every box
    int scc_count = 0;
};

ChainComponents epsilon_components(const TransitionGraph& g);

struct LyapunovData {
    std::vector<double> g;  // per box
    int max_rank = 0;
};

LyapunovData lyapunov_values(const TransitionGraph& g, const ChainComponents& c);

struct LyapunovAudit {
    std::size_t condensation_edges = 0;
    std::size_t decreasing = 0;
    std::size_t distinct_recurrent_values = 0;
    bool constant_on_components = true;
};

LyapunovAudit audit_lyapunov(const TransitionGraph& g, const ChainComponents& c, const LyapunovData& l);

enum class TrapKind { None, Forward, Backward, Full };
const char* trap_kind_name(TrapKind k);

struct TrapReport {
    TrapKind kind = TrapKind::None;
    std::vector<int> k_boxes;
    std::vector<int> u_boxes;
    double delta = 0.0;          // largest certified delta on the grid
    double effective_eps = 0.0;  // delta plus padding of the certifying graph
    std::vector<std::pair<double, bool>> tested;
};

// Reachability check of the trap property on one graph.
bool trap_holds(const TransitionGraph& g, const std::vector<int>& k_boxes, const std::vector<int>& u_boxes,
                TrapKind kind);

TrapReport verify_trap(const DynMap& f, const BoxCover& cover, const std::vector<int>& k_boxes,
                       const std::vector<int>& u_boxes, TrapKind kind, std::vector<double> delta_grid,
                       const GraphOptions& opts = {});

struct PeriodicPoint {
    Vec2 point;
    int period = 0;
    double residual = 0.0;
};

struct PeriodicSearchOptions {
    int max_seeds = 256;
    int max_points = 0;  // 0 means no limit
    int max_newton = 60;
};

// Newton on f^p(x) - x from box centers of the component, p = 1..p_max. Each returned point
// satisfies d(f^p(x), x) < tol and lies in, or next to, a component box.
std::vector<PeriodicPoint> find_periodic_in_component(const DynMap& f, const BoxCover& cover,
                                                      const std::vector<int>& component, int p_max, double tol,
                                                      const PeriodicSearchOptions& opts = {});

// Displacement f^p(x) - x with circle coordinates reduced to [-1/2, 1/2).
Vec2 periodic_residual(const DynMap& f, Vec2 x, int p);

std::string edges_csv(const TransitionGraph& g);
std::string components_csv(const ChainComponents& c, const LyapunovData& l);

}  // namespace shadowlab
