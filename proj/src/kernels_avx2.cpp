#include "shadowlab/kernels.hpp"

#include <immintrin.h>

namespace shadowlab::kernels::avx2 {

namespace {
inline double hmax(__m256d v) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    double m = lanes[0];
    for (int i = 1; i < 4; ++i) m = lanes[i] > m ? lanes[i] : m;
    return m;
}
}  // namespace

double max_circle_dist(const double* a, const double* b, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        d = _mm256_sub_pd(d, _mm256_floor_pd(d));
        const __m256d e = _mm256_sub_pd(one, d);
        d = _mm256_min_pd(e, d);
        acc = _mm256_max_pd(d, acc);
    }
    double m = hmax(acc);
    const double tail = scalar::max_circle_dist(a + i, b + i, n - i);
    return tail > m ? tail : m;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d =
            _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        acc = _mm256_max_pd(d, acc);
    }
    double m = hmax(acc);
    const double tail = scalar::max_abs_diff(a + i, b + i, n - i);
    return tail > m ? tail : m;
}

void box_indices(const double* x, std::size_t n, double origin, double inv_width, int count, bool periodic,
                 std::int32_t* out) {
    const __m256d org = _mm256_set1_pd(origin);
    const __m256d inv = _mm256_set1_pd(inv_width);
    const __m256d cnt = _mm256_set1_pd(static_cast<double>(count));
    const __m256d last = _mm256_set1_pd(static_cast<double>(count) - 1.0);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d minus_one = _mm256_set1_pd(-1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), org), inv);
        __m256d fl = _mm256_floor_pd(t);
        if (periodic) {
            const __m256d q = _mm256_floor_pd(_mm256_div_pd(fl, cnt));
            fl = _mm256_sub_pd(fl, _mm256_mul_pd(cnt, q));
        } else {
            fl = _mm256_blendv_pd(fl, last, _mm256_cmp_pd(t, cnt, _CMP_EQ_OQ));
            const __m256d ok = _mm256_and_pd(_mm256_cmp_pd(fl, zero, _CMP_GE_OQ), _mm256_cmp_pd(fl, cnt, _CMP_LT_OQ));
            fl = _mm256_blendv_pd(minus_one, fl, ok);
        }
        _mm_storeu_si128(reinterpret_cast<__m128i*>(out + i), _mm256_cvttpd_epi32(fl));
    }
    scalar::box_indices(x + i, n - i, origin, inv_width, count, periodic, out + i);
}

}  // namespace shadowlab::kernels::avx2
