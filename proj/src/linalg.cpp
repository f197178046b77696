#include "skewer/linalg.hpp"

#include <cmath>
#include <cstring>

#include "skewer/errors.hpp"
#include "skewer/kernels.hpp"

namespace skewer::linalg {

void cholesky_factor(const double* a, double* l, std::size_t d) {
    std::memset(l, 0, d * d * sizeof(double));
    for (std::size_t i = 0; i < d; ++i) {
        double* li = l + i * d;
        for (std::size_t j = 0; j <= i; ++j) {
            const double* lj = l + j * d;
            const double s = a[i * d + j] - kernels::dot(li, lj, j);
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s)) {
                    throw RuntimeFailure("matrix not positive definite in Cholesky factorization");
                }
                li[i] = std::sqrt(s);
            } else {
                li[j] = s / lj[j];
            }
        }
    }
}

namespace {

// L y = b (forward substitution).
void forward_solve(const double* l, const double* b, double* y, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) {
        const double* li = l + i * d;
        y[i] = (b[i] - kernels::dot(li, y, i)) / li[i];
    }
}

}  // namespace

void cholesky_solve(const double* l, const double* b, double* x, std::size_t d) {
    std::vector<double> y(d);
    forward_solve(l, b, y.data(), d);
    // L^T x = y, processed bottom-up so each step touches a contiguous row.
    for (std::size_t ii = d; ii-- > 0;) {
        const double* li = l + ii * d;
        const double xi = y[ii] / li[ii];
        x[ii] = xi;
        kernels::axpy(-xi, li, y.data(), ii);
    }
}

double quad_form_inv(const double* l, const double* b, std::size_t d) {
    std::vector<double> z(d);
    forward_solve(l, b, z.data(), d);
    return kernels::dot(z.data(), z.data(), d);
}

std::vector<double> spd_solve(const std::vector<double>& a, const std::vector<double>& b,
                              std::size_t d) {
    std::vector<double> l(d * d), x(d);
    cholesky_factor(a.data(), l.data(), d);
    cholesky_solve(l.data(), b.data(), x.data(), d);
    return x;
}

}  // namespace skewer::linalg
