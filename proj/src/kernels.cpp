#include "skewer/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "skewer/errors.hpp"

namespace skewer::kernels {

namespace detail {
double dot_scalar(const double*, const double*, std::size_t);
void axpy_scalar(double, const double*, double*, std::size_t);
void rank1_scalar(double*, const double*, double, std::size_t);
#if defined(__x86_64__) || defined(__i386__)
double dot_avx2(const double*, const double*, std::size_t);
void axpy_avx2(double, const double*, double*, std::size_t);
void rank1_avx2(double*, const double*, double, std::size_t);
#endif
#if defined(__aarch64__)
double dot_neon(const double*, const double*, std::size_t);
void axpy_neon(double, const double*, double*, std::size_t);
void rank1_neon(double*, const double*, double, std::size_t);
#endif
}  // namespace detail

namespace {

struct Dispatch {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*rank1)(double*, const double*, double, std::size_t);
};

constexpr Dispatch kScalar{detail::dot_scalar, detail::axpy_scalar, detail::rank1_scalar};

bool lane_supported(Lane lane) {
    switch (lane) {
        case Lane::scalar:
            return true;
        case Lane::avx2:
#if defined(__x86_64__) || defined(__i386__)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Lane::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Dispatch dispatch_for(Lane lane) {
    switch (lane) {
#if defined(__x86_64__) || defined(__i386__)
        case Lane::avx2:
            return Dispatch{detail::dot_avx2, detail::axpy_avx2, detail::rank1_avx2};
#endif
#if defined(__aarch64__)
        case Lane::neon:
            return Dispatch{detail::dot_neon, detail::axpy_neon, detail::rank1_neon};
#endif
        default:
            return kScalar;
    }
}

Lane pick_default_lane() {
    if (const char* env = std::getenv("SKEWER_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Lane::scalar;
        if (v == "avx2" && lane_supported(Lane::avx2)) return Lane::avx2;
        if (v == "neon" && lane_supported(Lane::neon)) return Lane::neon;
        // "auto" or an unsupported request falls through to detection.
    }
    if (lane_supported(Lane::avx2)) return Lane::avx2;
    if (lane_supported(Lane::neon)) return Lane::neon;
    return Lane::scalar;
}

Lane g_lane = pick_default_lane();
Dispatch g_dispatch = dispatch_for(g_lane);

}  // namespace

const char* lane_name(Lane lane) {
    switch (lane) {
        case Lane::scalar: return "scalar";
        case Lane::avx2: return "avx2";
        case Lane::neon: return "neon";
    }
    return "?";
}

std::vector<Lane> available_lanes() {
    std::vector<Lane> lanes{Lane::scalar};
    if (lane_supported(Lane::avx2)) lanes.push_back(Lane::avx2);
    if (lane_supported(Lane::neon)) lanes.push_back(Lane::neon);
    return lanes;
}

Lane active_lane() { return g_lane; }

void set_lane(Lane lane) {
    if (!lane_supported(lane)) {
        throw ValidationError(std::string("kernel lane not available on this machine: ") +
                              lane_name(lane));
    }
    g_lane = lane;
    g_dispatch = dispatch_for(lane);
}

double dot(const double* x, const double* y, std::size_t n) {
    return g_dispatch.dot(x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    g_dispatch.axpy(a, x, y, n);
}

void rank1_update(double* a, const double* x, double w, std::size_t d) {
    g_dispatch.rank1(a, x, w, d);
}

}  // namespace skewer::kernels
