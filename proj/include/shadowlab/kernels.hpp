#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops. Every kernel has a scalar reference and an AVX2 variant;
// the public entry points dispatch at runtime. Both variants perform the same IEEE
// operations in the same order per lane, so results are bit-identical.
namespace shadowlab::kernels {

enum class Isa { Scalar, Avx2 };

bool avx2_available();
// Honors SHADOWLAB_SIMD=scalar to force the reference path.
Isa active_isa();
const char* isa_name(Isa isa);

// max_i circle_dist(a[i], b[i]); 0 for n == 0.
double max_circle_dist(const double* a, const double* b, std::size_t n);
// max_i |a[i] - b[i]|; 0 for n == 0.
double max_abs_diff(const double* a, const double* b, std::size_t n);
// out[i] = floor((x[i] - origin) * inv_width), wrapped mod count when periodic,
// otherwise -1 when outside [0, count). A coordinate exactly on the upper edge maps to count-1.
void box_indices(const double* x, std::size_t n, double origin, double inv_width, int count, bool periodic,
                 std::int32_t* out);

namespace scalar {
double max_circle_dist(const double* a, const double* b, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
void box_indices(const double* x, std::size_t n, double origin, double inv_width, int count, bool periodic,
                 std::int32_t* out);
}  // namespace scalar

namespace avx2 {
double max_circle_dist(const double* a, const double* b, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
void box_indices(const double* x, std::size_t n, double origin, double inv_width, int count, bool periodic,
                 std::int32_t* out);
}  // namespace avx2

}  // namespace shadowlab::kernels
