// NEON lane for aarch64. float64x2_t is two doubles per vector.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cstddef>

namespace skewer::kernels::detail {

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    for (; i + 2 <= n; i += 2) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t av = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t yv = vld1q_f64(y + i);
        yv = vfmaq_f64(yv, av, vld1q_f64(x + i));
        vst1q_f64(y + i, yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void rank1_neon(double* a, const double* x, double w, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) {
        const double wxi_s = w * x[i];
        const float64x2_t wxi = vdupq_n_f64(wxi_s);
        double* row = a + i * d;
        std::size_t j = 0;
        for (; j + 2 <= d; j += 2) {
            float64x2_t rv = vld1q_f64(row + j);
            rv = vfmaq_f64(rv, wxi, vld1q_f64(x + j));
            vst1q_f64(row + j, rv);
        }
        for (; j < d; ++j) row[j] += wxi_s * x[j];
    }
}

}  // namespace skewer::kernels::detail

#endif  // aarch64
