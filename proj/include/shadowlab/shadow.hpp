#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "shadowlab/core.hpp"

namespace shadowlab {

struct ShadowReport {
    bool shadowed = false;
    double epsilon_used = 0.0;
    double max_deviation = 0.0;
    std::size_t argmax = 0;
    std::size_t window = 0;  // number of compared points
};

// Iterates x forward along the pseudo-orbit window and compares pointwise.
ShadowReport verify_shadowing(const DynMap& f, const PseudoOrbit& pseudo, Vec2 x, double epsilon);
// Same comparison for an already computed orbit segment.
ShadowReport compare_orbit(Space s, const std::vector<Vec2>& orbit, const PseudoOrbit& pseudo, double epsilon);

struct NewtonShadowResult {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;  // max_k d(f(z_k), z_{k+1})
    std::vector<Vec2> orbit;
    ShadowReport report;
};

// Damped Newton on the stacked orbit equations z_{k+1} = f(z_k) with minimum-norm corrections.
NewtonShadowResult newton_shadow(const DynMap& f, const PseudoOrbit& pseudo, double tol = 1e-12, int max_iter = 50,
                                 double epsilon = std::numeric_limits<double>::infinity());

// Backward itinerary construction for expanding circle maps: returns the whole orbit segment,
// built from the last pseudo-orbit point by inverse branches.
std::vector<Vec2> expanding_shadow_orbit(const DynMap& f, const PseudoOrbit& pseudo);
Vec2 expanding_shadow_oracle(const DynMap& f, const PseudoOrbit& pseudo);

enum class ShadowMethod { Auto, Oracle, Newton };
enum class NoiseModel { Uniform, Drift };

struct HolderRow {
    double delta = 0.0;
    double epsilon_min = 0.0;
    bool flagged = false;
    std::string note;
};

struct HolderFit {
    double alpha = 0.0;
    double log_c = 0.0;
    double residual = 0.0;  // RMS of log residuals
    std::vector<HolderRow> rows;
    std::string method;
    int window = 0;
    int samples = 0;
};

struct HolderOptions {
    ShadowMethod method = ShadowMethod::Auto;
    NoiseModel noise = NoiseModel::Uniform;
    // A row is flagged when the deviation over the full window exceeds this multiple of the
    // deviation over the first half window (no uniform bound, the signature of missing shadowing).
    double growth_flag = 1.5;
};

HolderFit holder_exponent(const DynMap& f, std::vector<double> deltas, int samples_per_delta, int window,
                          std::uint64_t seed, const HolderOptions& opts = {});

std::string holder_csv(const HolderFit& fit);
std::string holder_svg(const HolderFit& fit);

}  // namespace shadowlab
