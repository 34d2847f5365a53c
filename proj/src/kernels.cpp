#include "terrainwalk/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace terrainwalk::kernels {

namespace scalar {

double sum(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += v;
    return acc;
}

double dot(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

double t_tail_sum(std::span<const double> x, std::span<const double> loc,
                  std::span<const double> inv_scale, double inv_dof) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double z = (x[i] - loc[i]) * inv_scale[i];
        acc += std::log1p(z * z * inv_dof);
    }
    return acc;
}

}  // namespace scalar

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect_backend() {
    if (const char* env = std::getenv("TERRAINWALK_SIMD")) {
        const std::string_view v(env);
        if (v == "scalar") return Backend::scalar;
        if (v == "avx2" && backend_available(Backend::avx2)) return Backend::avx2;
        // Unknown or unavailable request falls through to autodetection.
    }
    return backend_available(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& backend_slot() {
    static std::atomic<Backend> slot{detect_backend()};
    return slot;
}

}  // namespace

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

bool backend_available(Backend b) {
    switch (b) {
        case Backend::scalar: return true;
        case Backend::avx2: return avx2::compiled() && cpu_has_avx2_fma();
    }
    return false;
}

void set_backend(Backend b) {
    if (!backend_available(b))
        throw std::invalid_argument(std::string("kernel backend not available: ") +
                                    std::string(backend_name(b)));
    backend_slot().store(b, std::memory_order_relaxed);
}

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "?";
}

double sum(std::span<const double> x) {
    return active_backend() == Backend::avx2 ? avx2::sum(x) : scalar::sum(x);
}

double dot(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("dot: length mismatch");
    return active_backend() == Backend::avx2 ? avx2::dot(x, y) : scalar::dot(x, y);
}

double t_tail_sum(std::span<const double> x, std::span<const double> loc,
                  std::span<const double> inv_scale, double inv_dof) {
    if (x.size() != loc.size() || x.size() != inv_scale.size())
        throw std::invalid_argument("t_tail_sum: length mismatch");
    return active_backend() == Backend::avx2 ? avx2::t_tail_sum(x, loc, inv_scale, inv_dof)
                                             : scalar::t_tail_sum(x, loc, inv_scale, inv_dof);
}

}  // namespace terrainwalk::kernels
