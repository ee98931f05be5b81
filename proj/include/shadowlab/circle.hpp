#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shadowlab/core.hpp"

namespace shadowlab {

// A circle map given by a lift F on the real line with F(x + 1) = F(x) + degree.
struct CircleEndomorphism {
    std::string name;
    std::function<double(double)> lift;
    std::function<double(double)> derivative;
    int degree = 1;

    double operator()(double x) const { return wrap01(lift(x)); }
    // Lift of f_t = f + t.
    double shifted_lift(double x, double t) const { return lift(x) + t; }
};

// F(1) - F(0) from the lift; throws if it is not within 1e-6 of an integer.
int degree(const DynMap& f);
// Requires a one-dimensional map with lift_evaluate and jacobian.
CircleEndomorphism circle_endomorphism(const DynMap& f);
CircleEndomorphism circle_from_lift(std::string name, std::function<double(double)> lift,
                                    std::function<double(double)> derivative);
DynMap to_dynmap(const CircleEndomorphism& f);

enum class TurningKind { Min, Max };

struct TurningPoint {
    double location = 0.0;
    TurningKind kind = TurningKind::Min;
    double second_derivative = 0.0;
};

struct TurningScan {
    std::vector<TurningPoint> points;  // sorted by location in [0, 1)
    bool grid_too_coarse = false;      // two sign changes less than two cells apart
};

TurningScan turning_points(const CircleEndomorphism& f, int grid = 4096, double tol = 1e-13);

struct ExpandingEstimate {
    double constant = 0.0;  // C with |(f^k)'| >= C lambda^k for all k <= n on the grid
    double lambda = 0.0;
};

// Throws when f' vanishes or changes sign on the grid.
ExpandingEstimate expanding_estimate(const CircleEndomorphism& f, int n, int grid = 4096);

struct SemiconjugacyTable {
    int degree = 0;
    int depth = 0;
    double anchor = 0.0;             // smallest fixed point in [0, 1), sent to 0
    std::vector<double> cuts;        // preimages of the anchor in [anchor, anchor + 1)
    std::vector<double> x;           // sample points anchor + i/size
    std::vector<double> h;           // h at the samples, in [0, 1)
    double defect = 0.0;             // sup |h(f(x)) - E_d(h(x))| over the defect samples
    bool monotone = false;
    int interval_fibers = 0;         // adjacent samples with equal h
    bool transitivity_asserted = true;

    double evaluate(const CircleEndomorphism& f, double x) const;
};

// h by itinerary coding through the arcs cut by the preimages of the anchor fixed point.
// resolution_bits sets the stored table size; defect_samples the audit size.
SemiconjugacyTable semiconjugacy(const CircleEndomorphism& f, int depth, int resolution_bits = 12,
                                 int defect_samples = 10000);

// Smallest fixed point of f in [0, 1).
double smallest_fixed_point(const CircleEndomorphism& f, int grid = 4096);

struct TurningEscape {
    int turning_index = 0;
    double start = 0.0;    // z with |z - c| = eps
    double sibling = 0.0;  // other side of c with the same image
    double jump = 0.0;     // d(f(z), f(c))
    int hit_step = -1;     // first j with a turning point in f^j(I), -1 if none
    int hit_turning = -1;
    double hit_diameter = 0.0;
    bool wrapped = false;        // some f^j(I) covered the circle: no obstruction
    int containment_step = -1;   // first j with f^j(I) strictly inside I
    std::vector<int> cycle;      // turning indices along tau from turning_index, cycle part only
    int cycle_period = 0;        // sum of the hit steps around the cycle
    bool cycle_certified = false;  // f^N(I) strictly inside I for the first interval of the cycle
};

TurningEscape turning_interval_escape(const CircleEndomorphism& f, const TurningScan& turning, int index,
                                      double eps, int j_max);

struct PeriodicParameter {
    double t = 0.0;
    int n = 0;
    long long m = 0;  // F_t^n(x) = x + m on the lift
    double residual = 0.0;
    int audit_samples = 0;
    int audit_failures = 0;  // violations of F_t^k(z) >= F^k(z) + t
};

// Smallest n with some 0 < t < eps and f_t^n(x) = x, then the smallest such t by bisection.
PeriodicParameter periodic_parameter(const CircleEndomorphism& f, double x, double eps, int n_max = 60);

std::string semiconjugacy_json(const SemiconjugacyTable& s);
std::string turning_escape_json(const TurningEscape& e);
std::string periodic_parameter_json(const PeriodicParameter& p);

}  // namespace shadowlab
