#include "shadowlab/kernels.hpp"

#include <cmath>

namespace shadowlab::kernels::scalar {

double max_circle_dist(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = std::fabs(a[i] - b[i]);
        d = d - std::floor(d);
        const double e = 1.0 - d;
        d = e < d ? e : d;
        m = d > m ? d : m;
    }
    return m;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::fabs(a[i] - b[i]);
        m = d > m ? d : m;
    }
    return m;
}

void box_indices(const double* x, std::size_t n, double origin, double inv_width, int count, bool periodic,
                 std::int32_t* out) {
    const double cnt = static_cast<double>(count);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (x[i] - origin) * inv_width;
        double fl = std::floor(t);
        if (periodic) {
            fl = fl - cnt * std::floor(fl / cnt);
            out[i] = static_cast<std::int32_t>(fl);
        } else {
            if (t == cnt) fl = cnt - 1.0;
            out[i] = (fl >= 0.0 && fl < cnt) ? static_cast<std::int32_t>(fl) : -1;
        }
    }
}

}  // namespace shadowlab::kernels::scalar
