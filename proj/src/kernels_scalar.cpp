#include <cstddef>

namespace skewer::kernels::detail {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void rank1_scalar(double* a, const double* x, double w, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) {
        const double wxi = w * x[i];
        double* row = a + i * d;
        for (std::size_t j = 0; j < d; ++j) row[j] += wxi * x[j];
    }
}

}  // namespace skewer::kernels::detail
