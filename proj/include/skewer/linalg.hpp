#pragma once

#include <cstddef>
#include <vector>

namespace skewer::linalg {

// Cholesky factorization A = L L^T of a symmetric positive definite matrix.
// A and L are row-major d x d; L is lower triangular (upper part zeroed).
// Throws RuntimeFailure if A is not numerically positive definite.
void cholesky_factor(const double* a, double* l, std::size_t d);

// Solves A x = b given the Cholesky factor L of A.
void cholesky_solve(const double* l, const double* b, double* x, std::size_t d);

// Quadratic form b^T A^{-1} b given the Cholesky factor L of A.
double quad_form_inv(const double* l, const double* b, std::size_t d);

// Convenience: solve (A) x = b for SPD A without keeping the factor.
std::vector<double> spd_solve(const std::vector<double>& a, const std::vector<double>& b,
                              std::size_t d);

}  // namespace skewer::linalg
