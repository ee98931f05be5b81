#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shadowlab/core.hpp"

namespace shadowlab {

// Linear saddle (lambda x, sigma y) on the central square with a homoclinic loop. The loop
// passage from B^u_+ = [-eps, eps] x [b, b') takes k_m = 2 steps and is
// (x, y) -> (f_u(y), x + f^s_t(y)); the lower half follows by oddness.
struct SaddleLoopModel {
    double sigma = 1.2;  // per-step expansion
    double gamma = 6.5;  // lambda = sigma^-gamma
    double lambda = 0.0;
    double b = 0.2;
    double b_mid = 0.22;  // b'' in (b, b')
    double b_end = 0.24;  // b' = sigma b
    double c1 = 0.21;
    double c2 = 0.23;
    double pitch = 0.0;    // c2/c1 - 1
    double a = 0.01;       // f_u(b); L^s = [lambda a, a]
    double fu_slope = 0.0;  // affine f_u from [b, b') onto (lambda a, a]
    double box_halfwidth = 0.05;  // eps in B^u = [-eps, eps] x L^u
    double curvature = 2.0;       // |f^s_t''| at c1, c2: quadratic normal forms
    int smoothness = 2;           // r, with gamma > max(3r, 6)
    int km = 2;

    double fu(double y) const { return a + fu_slope * (y - b); }
};

// Validates 0 < b < b_mid < b_end, c1 in (b, b_mid), c2 in (b_mid, b_end), gamma > max(3r, 6),
// lambda sigma < 1; b_end defaults to sigma b when nonpositive. `a` places the stable fundamental
// domain; |f_u'| = a (1 - lambda) / (b' - b) enters the sink norm linearly.
SaddleLoopModel build_saddle_model(double sigma = 1.2, double gamma = 6.5, double b = 0.2, double b_mid = 0.22,
                                   double c1 = 0.21, double c2 = 0.23, double b_end = 0.0, int smoothness = 2,
                                   double a = 0.01);

// C^2 piecewise polynomial with zeros at lo, mid, hi, a maximum v_max > 0 at e_max in (lo, mid)
// and a minimum v_min < 0 at e_min in (mid, hi). Near each extremum it is exactly quadratic with
// |f''| = curvature; elsewhere f'' = -+(1 - s)(curvature + K s + M s^2), vanishing at the zeros.
struct BumpPiece {
    double lo = 0.0, hi = 0.0;
    bool core = false;
    double sign = 1.0;       // +1 on the positive lobe
    double origin = 0.0;     // extremum (core) or core edge (outer)
    double direction = 1.0;  // +1 when the outer piece runs rightwards from its origin
    double top = 0.0;        // |value| at the origin
    double slope0 = 0.0;     // |slope| at the core edge
    double length = 0.0;
    double k = 0.0, m = 0.0;
};

struct BumpProfile {
    double lo = 0.0, mid = 0.0, hi = 0.0;
    double e_max = 0.0, e_min = 0.0;
    double v_max = 0.0, v_min = 0.0;
    double curvature = 2.0;
    std::vector<BumpPiece> pieces;  // empty for the zero function

    double value(double y) const;
    double d1(double y) const;
    double d2(double y) const;
};

// Core radius is capped at core_fraction of the distance to the neighbouring zeros. lo_slope and
// hi_slope prescribe |f'| at lo and hi; 0 leaves the natural one-parameter value.
BumpProfile build_bump_profile(double lo, double mid, double hi, double e_max, double e_min, double v_max,
                               double v_min, double curvature, double core_fraction = 0.8, double lo_slope = 0.0,
                               double hi_slope = 0.0);

struct ProfileCheck {
    int interior_zeros = 0;    // sign changes of f strictly inside (lo, hi)
    int critical_points = 0;   // sign changes of f'
    double max_value_error = 0.0;
    double max_normal_form_error = 0.0;
    bool concavity_ok = false;  // f'' < 0 on (lo, mid), > 0 on (mid, hi)
    bool ok() const;
};

// Independent re-check on a fine grid.
ProfileCheck check_profile(const BumpProfile& p, int grid = 20000);

struct FstProfile {
    double t = 0.0;
    BumpProfile profile;
    ProfileCheck check;
    double operator()(double y) const { return profile.value(y); }
    double d1(double y) const { return profile.d1(y); }
    double d2(double y) const { return profile.d2(y); }
};

// f^s_t on [b, b']: values t at c1 and -t(1 + pitch) at c2. Throws when the profile fails its checks.
FstProfile build_fst(const SaddleLoopModel& model, double t);

struct SaddleStep {
    Vec2 point;
    Mat2 jacobian;
    int steps = 1;  // 2 for the loop passage
};

SaddleStep saddle_step(const SaddleLoopModel& model, const FstProfile& fst, Vec2 p);
// One evaluation per event: a linear step, or the loop passage standing for k_m = 2 steps.
DynMap return_map(const SaddleLoopModel& model, const FstProfile& fst);

struct SinkBox {
    double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
    bool contains(Vec2 p) const { return p.x >= x_lo && p.x <= x_hi && p.y > y_lo && p.y < y_hi; }
};

struct SinkCheck {
    SinkBox box;
    int period = 0;
    int samples = 0;
    bool contained = false;
    double max_norm = 0.0;  // spectral norm of D f^{norm_steps}
    int norm_steps = 0;
    bool certified() const { return contained && max_norm < 1.0; }
};

struct SinkScanRow {
    int n = 0;
    double t = 0.0;
    bool contained = false;
    double max_norm = 0.0;
    bool companions = false;  // mirror, c2 and transit checks also pass
    std::string note;
};

struct SinkCertificate {
    bool found = false;
    int n = 0;
    double t = 0.0;
    double alpha = 2.5;
    int period = 0;
    int samples = 0;          // lattice samples per box
    SinkCheck primary;        // box around c1
    SinkCheck mirror;         // symmetric box around -c1
    SinkCheck second;         // box around c2 with s = (1 + pitch) t, period 2(n + 2)
    bool transit_contained = false;  // f^n of the box around (c1', t) lands in the c1 box
    double max_sigma_n_dfs = 0.0;    // sup |sigma^n d_y f^s_t| over the c1 box
    double sigma_n_dfs_bound = 0.0;  // t^(alpha/2 - 1)
    std::vector<SinkScanRow> scan;
};

SinkBox sink_box_c1(const SaddleLoopModel& model, double t, double alpha);
SinkBox sink_box_c1_image(const SaddleLoopModel& model, double t, double alpha);  // around (c1', t)
SinkBox sink_box_c2(const SaddleLoopModel& model, double t, double alpha);

// Runs `period` steps from a k x k lattice of the box (k = ceil(sqrt(samples))).
SinkCheck check_sink_box(const SaddleLoopModel& model, const FstProfile& fst, const SinkBox& box, int period,
                         int norm_steps, int samples);

// First n whose c1 box certifies together with its mirror, c2 and transit companions.
SinkCertificate detect_sink(const SaddleLoopModel& model, int n_lo, int n_hi, double alpha, int samples = 1024);

struct ConeReport {
    double t = 0.0;
    double xi = 0.0;
    double alpha = 0.0;
    double bound = 0.0;           // t^xi
    double worst_slope = 0.0;     // largest image slope against the vertical
    double worst_margin = 0.0;    // bound - worst_slope
    int samples = 0;
    int violations = 0;
    Vec2 witness{};
    double min_tangent_slope = 0.0;  // min slope(w, (1, 0)) on the image strip
    double tangent_bound = 0.0;      // t^(alpha/2)
    double exponent_margin = 0.0;    // gamma - alpha/2 - 1 - xi
    bool ok() const { return violations == 0 && exponent_margin > 0.0; }
};

// Pushes the vertical cone at B^u points through the passage and the linear transit back to B^u.
ConeReport cone_invariance_check(const SaddleLoopModel& model, double t, double alpha, double xi, int samples = 2000);

struct VectorField {
    std::string name;
    std::function<Vec2(Vec2)> field;
    std::function<Mat2(Vec2)> jacobian;
    std::function<Vec2(Vec2, double)> exact_flow;  // optional
};

// (log(lambda) x, log(sigma) y)
VectorField linear_saddle_field(double lambda, double sigma);

struct FlowDistanceRow {
    double t = 0.0;
    double c0 = 0.0;
    double c1 = 0.0;
    double flow_error = 0.0;  // max |numeric - exact| when the exact flow is known
};

struct FlowDistanceTable {
    std::vector<FlowDistanceRow> rows;
    double slope = 0.0;              // least squares through the origin of c0 against t
    double relative_residual = 0.0;  // |residual|_2 / |c0|_2
    double max_flow_error = 0.0;
};

// RK4 with step doubling; throws when the step-doubling estimate cannot be brought below tol.
FlowDistanceTable time_map_distance(const VectorField& field, const std::vector<double>& t_grid, int grid = 21,
                                    Vec2 lo = {0.0, 0.0}, Vec2 hi = {1.0, 1.0}, double h_max = 1e-3,
                                    double tol = 1e-12);
Vec2 integrate_flow(const VectorField& field, Vec2 p, double t, int steps, Mat2* derivative = nullptr);

// Tube coordinates [-1, m + 2] x [-1, 1]: f_t(x, y) = (x + 1, y + bump(y) t g(x)).
struct TubeFamily {
    double t = 0.0;
    int m = 10;
    double pitch = 0.0;
    double support_eps = 0.05;
    BumpProfile g0;  // zeros 0, 1/2, 1; extrema 1 at 1/4 and -(1 + pitch) at 3/4

    double g(double x) const;      // support [-eps, 1 + eps]
    double hat_g(double x) const;  // g0(x) + g1(x + 1) on [0, 1]
    Vec2 operator()(Vec2 p) const;
};

double tube_bump(double y);  // 1 on [-1/2, 1/2], 0 outside (-1, 1)
TubeFamily build_tube_family(double t, int m, double pitch, double support_eps = 0.05);
DynMap tube_family_map(const TubeFamily& family);

std::string fst_json(const FstProfile& fst);
std::string sink_certificate_json(const SinkCertificate& c);
std::string cone_report_json(const ConeReport& r);
std::string flow_distance_csv(const FlowDistanceTable& t);
std::string saddle_portrait_svg(const SaddleLoopModel& model, const FstProfile& fst, int n_orbit_points = 400);

}  // namespace shadowlab
