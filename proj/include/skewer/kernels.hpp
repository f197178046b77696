#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace skewer::kernels {

// The dense inner loops of the regression oracle (dot products, scaled
// vector adds, symmetric rank-one updates) exist as a scalar reference
// kernel plus SIMD variants. One lane is active at a time; the best
// supported lane is picked at startup and can be overridden with
// set_lane() or the SKEWER_SIMD environment variable
// (values: auto, scalar, avx2, neon).
//
// Lanes agree with the scalar reference up to reduction-order rounding;
// the equivalence tests pin the tolerance.
enum class Lane { scalar, avx2, neon };

const char* lane_name(Lane lane);

// Lanes compiled in and usable on this machine. Always contains scalar.
std::vector<Lane> available_lanes();

Lane active_lane();

// Throws ValidationError if the lane is not available.
void set_lane(Lane lane);

// x . y
double dot(const double* x, const double* y, std::size_t n);

// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);

// A += w * x * x^T, A row-major d x d (full matrix, both triangles).
void rank1_update(double* a, const double* x, double w, std::size_t d);

}  // namespace skewer::kernels
