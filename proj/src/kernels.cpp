#include "shadowlab/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace shadowlab::kernels {

bool avx2_available() {
#if defined(SHADOWLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__)) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa active_isa() {
    static const Isa isa = [] {
        const char* env = std::getenv("SHADOWLAB_SIMD");
        if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
        return avx2_available() ? Isa::Avx2 : Isa::Scalar;
    }();
    return isa;
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

#if defined(SHADOWLAB_HAVE_AVX2)
#define SHADOWLAB_DISPATCH(fn, ...) \
    return active_isa() == Isa::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define SHADOWLAB_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

double max_circle_dist(const double* a, const double* b, std::size_t n) { SHADOWLAB_DISPATCH(max_circle_dist, a, b, n); }

double max_abs_diff(const double* a, const double* b, std::size_t n) { SHADOWLAB_DISPATCH(max_abs_diff, a, b, n); }

void box_indices(const double* x, std::size_t n, double origin, double inv_width, int count, bool periodic,
                 std::int32_t* out) {
    SHADOWLAB_DISPATCH(box_indices, x, n, origin, inv_width, count, periodic, out);
}

}  // namespace shadowlab::kernels
