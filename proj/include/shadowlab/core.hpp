#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace shadowlab {

// Thrown when a caller violates a documented precondition. The CLI maps it to exit code 2.
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class Space { Line, Circle, Plane, Annulus, Torus };

const char* space_name(Space s);
int dimension(Space s);

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    double det() const { return a * d - b * c; }
    double norm_inf() const;  // max row sum, the operator norm for the max metric
    double norm2() const;     // spectral norm
};

double wrap01(double x);
double circle_dist(double x, double y);
double distance(Space s, Vec2 p, Vec2 q);
Vec2 normalize(Space s, Vec2 p);

// A map on one of the phase spaces. Only `evaluate` is mandatory; the rest are optional
// capabilities that individual algorithms require.
struct DynMap {
    Space space = Space::Circle;
    std::string name;
    std::function<Vec2(Vec2)> evaluate;
    std::function<Mat2(Vec2)> jacobian;
    std::optional<double> lipschitz_bound;
    // Entrywise bounds on |Df| over the box [lo, hi]; used for per-axis padding of box images.
    std::function<Mat2(Vec2 lo, Vec2 hi)> derivative_bound;
    std::function<Vec2(Vec2)> lift_evaluate;
    std::vector<std::function<Vec2(Vec2)>> inverse_branches;

    Vec2 operator()(Vec2 p) const { return normalize(space, evaluate(p)); }
    bool has_jacobian() const { return static_cast<bool>(jacobian); }
};

// Central finite-difference Jacobian, used to audit analytic Jacobians.
Mat2 numeric_jacobian(const DynMap& f, Vec2 p, double h = 1e-6);

struct PseudoOrbit {
    Space space = Space::Circle;
    std::vector<Vec2> points;
    double delta = 0.0;
};

PseudoOrbit generate_pseudo_orbit(const DynMap& f, Vec2 x0, double delta, int n, std::uint64_t seed);
double max_jump(const PseudoOrbit& pseudo, const DynMap& f);
std::vector<double> jumps(const PseudoOrbit& pseudo, const DynMap& f);

enum class CoverKind { UniversalLine, Strip, Plane, FiniteCircle };

struct LiftContext {
    CoverKind kind = CoverKind::UniversalLine;
    double eps0 = 0.25;
    int sheets = 1;  // q for the q-sheeted circle cover
};

void validate(const LiftContext& ctx);
Vec2 project(const LiftContext& ctx, Vec2 p);
double cover_distance(const LiftContext& ctx, Vec2 p, Vec2 q);
Space base_space(const LiftContext& ctx);

struct LiftedOrbit {
    std::vector<Vec2> points;
    std::vector<double> jumps;
    double delta = 0.0;
};

LiftedOrbit lift_pseudo_orbit(const PseudoOrbit& pseudo, const LiftContext& ctx, const DynMap& lifted_map,
                              Vec2 base);

struct IntegerMatrix2 {
    long long a = 0, b = 0, c = 0, d = 0;
};

// Least n <= n_max with tr(a^n) >= 2, exact arithmetic. Empty when no witness exists in range.
std::optional<int> trace_growth_witness(const IntegerMatrix2& a, int n_max);

// Serialization. The jump column of row 0 is 0 (no predecessor).
std::string pseudo_orbit_csv(const PseudoOrbit& pseudo, const DynMap& f);
std::string pseudo_orbit_json(const PseudoOrbit& pseudo);
PseudoOrbit pseudo_orbit_from_json(const std::string& text);

}  // namespace shadowlab
