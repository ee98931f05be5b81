#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "shadowlab/core.hpp"

namespace shadowlab {

// Piecewise-affine horseshoe on the closed annulus S^1 x [0, 1], described through its lift
// to R x [0, 1]. The base strip [0, W] holds five vertical strips; the first three are the
// selected Markov boxes with deck displacements -1, 0, +1.
struct CrookedStrip {
    double lo = 0.0, hi = 0.0;  // x-range inside [0, W]
    double image_lo = 0.0;      // lifted image of lo
    double image_hi = 0.0;      // lifted image of hi
    int displacement = 0;       // image covers [0, W] + displacement
    int symbol = 0;             // -1, 0, 1 for selected strips; 2 otherwise
    double band_center = 0.0;   // y-center of the image band
};

// Linear segment of a profile on [0, 1].
struct CrookedPiece {
    double x0 = 0.0, x1 = 0.0, v0 = 0.0, v1 = 0.0;
};

struct CrookedModel {
    double mu = 0.15;
    double kappa = 6.0;
    double width = 0.8;  // W, horizontal width of the base strip
    double strip_width = 0.0;
    double gap = 0.0;
    double band_lo = 0.3, band_hi = 0.7;
    double outer = 0.2;                // outer zones [0, outer] and [1 - outer, 1]
    double boundary_multiplier = 1.3;  // > 1 repelling boundary circles, < 1 attracting
    double repeller_level = 0.1;       // invariant circle inside the outer zone when attracting
    std::array<CrookedStrip, 5> strips{};
    // Strip, gap, ..., column segments of the first-coordinate lift and of the band centers.
    std::array<CrookedPiece, 10> x_profile{};
    std::array<CrookedPiece, 10> center_profile{};

    // Lifted first coordinate, degree one: lift_x(x + k) = lift_x(x) + k.
    double lift_x(double x) const;
    double lift_dx(double x) const;
    double band_center(double x) const;
    double band_center_dx(double x) const;
    // Second coordinate; x is a lifted first coordinate, v in [0, 1] (extended affinely outside).
    double map_y(double x, double v) const;
    Vec2 map_y_grad(double x, double v) const;  // (d/dx, d/dv)
    Vec2 lift(Vec2 p) const { return {lift_x(p.x), map_y(p.x, p.y)}; }
    // Selected symbol whose Markov box contains p (x taken mod 1), or 2 when none does.
    int symbol_at(Vec2 p) const;
    const CrookedStrip& strip_for(int symbol) const;
    // Point of the strip of `symbol` mapped by the affine branch to base coordinate u in [0, W].
    double branch_inverse(int symbol, double u) const;
};

// Requires 0 < mu <= 1/5 and kappa >= 5 so the five strips and image bands fit.
CrookedModel build_crooked_model(double mu, double kappa, double boundary_multiplier = 1.3);
DynMap crooked_dynmap(const CrookedModel& model);

// Fixed point of the affine branch of `symbol` composed with the deck shift.
Vec2 branch_fixed_point(const CrookedModel& model, int symbol);

using Itinerary = std::vector<int>;

struct EscapeError : std::runtime_error {
    int step;
    EscapeError(const std::string& what, int step_) : std::runtime_error(what), step(step_) {}
};

Itinerary encode_point(const CrookedModel& model, Vec2 z, int n_steps);
// Point whose itinerary is the periodic extension of `word`; both coordinates are fixed points
// of contractions (inverse branches in x, the band map in y), iterated past tol.
Vec2 decode_itinerary(const CrookedModel& model, const Itinerary& word, double tol = 1e-12);

// Full-shift check: image of box i crosses box j for every pair of selected symbols.
bool markov_covers(const CrookedModel& model, int from_symbol, int to_symbol);

std::string crooked_model_json(const CrookedModel& model);

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

// alpha = offset + sum_{k >= 1} base^-(k! + shift). With no series terms alpha is rational.
struct AlphaSpec {
    BigRational offset = 0;
    int base = 10;
    int shift = 0;
    bool series = true;

    static AlphaSpec factorial_series(int base = 10, int shift = 0, BigRational offset = 0);
    static AlphaSpec rational(BigRational value);
    BigRational truncation(int terms) const;
    // Exact upper bound on alpha minus its truncation after `terms` terms.
    BigRational tail_bound(int terms) const;
    double value() const;
};

struct LiouvilleApproximant {
    BigInt p = 0;
    BigInt q = 1;
    int r = 1;
    int terms = 0;            // series terms in the truncation
    BigRational error_bound;  // exact bound on |alpha - p/q|
    bool liouville_ok = false;
    bool size_ok = false;  // 1/(q - 1) < eps eta / (c_r + 4)
};

struct LiouvilleError : PreconditionError {
    LiouvilleApproximant best;
    LiouvilleError(const std::string& what, LiouvilleApproximant b) : PreconditionError(what), best(std::move(b)) {}
};

// Exact check of |alpha - p/q| < 1/q^(r+2) for the truncation after `terms` terms.
LiouvilleApproximant check_approximant(const AlphaSpec& spec, int terms, int r);
// First truncation satisfying both the approximation order and the size condition.
LiouvilleApproximant liouville_approximant(const AlphaSpec& spec, int r, double eta, double eps, double c_r,
                                           int max_terms = 7);

// Lift of H through the q-sheeted cover (x, y) -> (q x, y), composed with rotation by p/q.
struct FiniteCoverMap {
    CrookedModel model;
    int q = 5;
    int p = 1;
    int r = 1;
    long long m = 20;        // q^r (q - 1)
    double c_r = 0.0;        // m times the measured C0 distance from H to the identity
    double model_c0 = 0.0;   // measured sup distance from the lift of H to the identity

    Vec2 lift(Vec2 p) const;  // lifted first coordinate
    Vec2 operator()(Vec2 p) const;
    double delta_bound() const;  // 1/(m q) - 1/q^(r+2)
};

FiniteCoverMap finite_cover_map(const CrookedModel& model, int q, int p, int r = 1);
DynMap finite_cover_dynmap(const FiniteCoverMap& cover);
// C0 distance of the lift of H from the identity, sampled on a grid.
double measure_c0_distance(const CrookedModel& model, int samples = 4001);

struct ShadowConstruction {
    std::vector<long long> j;        // grid cell of x_{mn}
    std::vector<int> i;              // symbols, i[n] = j[n+1] - j[n] mod q
    std::vector<long long> j_prime;  // j[0] + i[0] + ... + i[n-1]
    Vec2 z;                          // start point of the shadowing orbit
    std::vector<double> pseudo_x;    // x_n
    std::vector<double> orbit_x;     // h^n(z)_1
    std::vector<double> deviation;
    double coarse_max = 0.0;  // max over multiples of m
    double full_max = 0.0;
    double coarse_bound = 0.0;  // 2/q
    double full_bound = 0.0;    // (c_r + 3)/q
    double orbit_residual = 0.0;  // max_n d(h(z_n), z_{n+1}) of the computed orbit
    bool coarse_ok = false;
    bool full_ok = false;
    long long m = 0;
};

// Shadows a pseudo-orbit of the rotation R_alpha by the first coordinate of an h-orbit.
// window is the number of steps used; it must cover at least one block of m steps.
ShadowConstruction shadow_first_coordinate(const FiniteCoverMap& cover, const PseudoOrbit& pseudo, int window);

std::string shadow_construction_csv(const ShadowConstruction& s);
std::string shadow_construction_svg(const ShadowConstruction& s);

}  // namespace shadowlab
