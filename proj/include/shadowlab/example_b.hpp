#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shadowlab/chain.hpp"
#include "shadowlab/core.hpp"
#include "shadowlab/crooked.hpp"

namespace shadowlab {

// Nested annuli A_n = S^1 x [a_n, b_n] in the upper half of S^1 x [-1, 1], mirrored below.
// Vectors are indexed from annulus 1 at position 0.
struct AnnuliSchedule {
    int depth = 0;
    double c_gap = 0.0;
    double w = 0.0;                   // width scale: b_n - a_n = w / n^3
    std::vector<double> a, b;         // b holds depth + 1 entries (b_{N+1} bounds the core)
    std::vector<double> multiplier;   // boundary multiplier of each annulus
    double strength = 0.3;            // |multiplier_n - 1| = strength / 4^(n-1)

    double width(int n) const { return b[n - 1] - a[n - 1]; }
    double gap(int n) const { return a[n - 1] - b[n]; }
    bool repelling(int n) const { return n % 2 == 1; }
};

// Requires 0 < c_gap < 6/pi^2 so the infinite schedule fits in [0, 1].
AnnuliSchedule build_schedule(int n_max, double c_gap, double strength = 0.3);

// Smooth step from e^{-1/t}: 0 for t <= 0, 1 for t >= 1, strictly increasing in between.
double glue_profile(double t);
double glue_profile_d(double t);
// max_{j <= order} sup |phi^(j)| (order <= 2), and the constant K = max(2, that bound rounded up).
double glue_profile_cn_norm(int order);
double glue_profile_k(int order);

struct GluedParams {
    // alpha = 1/5 + sum 10^-(k! + 3): Liouville, within 1/q^3 of p/q = 1/5.
    AlphaSpec alpha = AlphaSpec::factorial_series(10, 3, BigRational(1, 5));
    int q = 5;
    int p = 1;
    int r = 1;
    double mu = 0.15;
    double kappa = 6.0;
};

enum class GluedRegion { Annulus, Gap, Core };

struct GluedMap {
    AnnuliSchedule schedule;
    GluedParams params;
    double alpha = 0.0;
    std::vector<CrookedModel> models;  // one per annulus, boundary multiplier from the schedule
    FiniteCoverMap cover;              // shared cover data (q, p, m, measured constants)

    // Region containing |y|; index is the annulus or gap number n (1-based), 0 for the core.
    std::pair<GluedRegion, int> region(double y) const;
    Vec2 lift(Vec2 p) const;  // lifted first coordinate
    Vec2 operator()(Vec2 p) const;
    Mat2 jacobian(Vec2 p) const;
    // Evaluation with the formula of a prescribed region (for two-sided boundary checks).
    Vec2 lift_in(Vec2 p, GluedRegion r, int n) const;
    double x_map(double x) const;  // (G(q x) + p)/q, shared by all annuli
};

GluedMap build_glued_map(const AnnuliSchedule& schedule, const GluedParams& params);
DynMap glued_dynmap(const GluedMap& map);

// Largest two-sided evaluation gap over all region boundaries.
double gluing_continuity_gap(const GluedMap& map, int samples = 1000);

struct BandDistance {
    int n = 0;
    double c0 = 0.0;         // sup d(f, R_alpha) over the gap B_n
    double c1 = 0.0;         // adds sup |Df - I| entrywise
    double reference = 0.0;  // 2(n + 1)/4^n
};
std::vector<BandDistance> band_distances(const GluedMap& map, int grid = 200);

struct ConditionOptions {
    double rho = 1.0 / 512.0;
    std::vector<double> delta_grid{1.0 / 256, 1.0 / 512, 1.0 / 1024, 1.0 / 2048};
    int trials = 20;
    int blocks = 200;  // shadowing window in blocks of m steps
    std::uint64_t seed = 1;
    GraphOptions graph;
};

struct ConditionCheck {
    std::string name;
    bool passed = false;
    double value = 0.0;
    std::string detail;
};

struct ConditionReport {
    int k = 0;
    std::vector<ConditionCheck> checks;
    TrapReport trap;
    bool all_passed() const;
    std::string to_json() const;
};

ConditionReport check_conditions(const GluedMap& map, int k, double eps, const ConditionOptions& opts = {});

// Box sets for C_n = S^1 x [-b_n, b_n] on a cover of S^1 x [-1, 1]: boxes contained in C_n.
std::vector<int> cylinder_boxes(const BoxCover& cover, double half_height);

}  // namespace shadowlab
