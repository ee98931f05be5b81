#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shadowlab/core.hpp"

namespace shadowlab {

// x -> d x mod 1. Inverse branches y -> (y + j)/d use left-closed arcs.
DynMap linear_expanding_map(int d);
DynMap rotation_map(double alpha);
// Lift F(x) = a0 + a1 x + b sin(2 pi x); a1 must be an integer (the degree).
DynMap trig_map(double a0, double a1, double b);
// x + 0.1 sin(2 pi x): repelling fixed point at 0, attracting at 1/2.
DynMap north_south_map();
DynMap identity_map(Space s);
// (theta, y) -> (theta + alpha, factor * y) on the annulus.
DynMap annulus_contraction(double alpha, double factor);
// (x, y) -> (ex x, cy y) on the plane.
DynMap linear_plane_map(double ex, double cy);

// Entrywise |Df| bound over a box from Jacobian samples: a grid x grid lattice plus both sides of
// every kink inside the box, scaled by `safety`. x_breaks repeat with period x_period.
std::function<Mat2(Vec2, Vec2)> sampled_derivative_bound(std::function<Mat2(Vec2)> jacobian,
                                                         std::vector<double> x_breaks, double x_period,
                                                         std::vector<double> y_breaks, int grid = 5,
                                                         double safety = 1.25);

// Map expressions: E<d>, rot:<alpha>, trig:<a0>+<a1>*x+<b>*sin(2*pi*x), and the names
// northsouth, identity, hyperbolic, contraction, crooked, example-b.
DynMap parse_map_spec(const std::string& spec);

}  // namespace shadowlab
