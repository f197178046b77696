// AVX2+FMA lane. This translation unit is compiled with -mavx2 -mfma and is
// only entered after a runtime cpuid check, so it must not be called on
// hardware without those features.

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cstddef>

namespace skewer::kernels::detail {

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    }
    acc0 = _mm256_add_pd(acc0, acc1);
    __m128d lo = _mm256_castpd256_pd128(acc0);
    __m128d hi = _mm256_extractf128_pd(acc0, 1);
    lo = _mm_add_pd(lo, hi);
    double acc = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void rank1_avx2(double* a, const double* x, double w, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) {
        const __m256d wxi = _mm256_set1_pd(w * x[i]);
        double* row = a + i * d;
        std::size_t j = 0;
        for (; j + 4 <= d; j += 4) {
            __m256d rv = _mm256_loadu_pd(row + j);
            rv = _mm256_fmadd_pd(wxi, _mm256_loadu_pd(x + j), rv);
            _mm256_storeu_pd(row + j, rv);
        }
        const double wxi_s = w * x[i];
        for (; j < d; ++j) row[j] += wxi_s * x[j];
    }
}

}  // namespace skewer::kernels::detail

#endif  // x86
