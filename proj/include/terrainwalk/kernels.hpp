#pragma once

#include <span>
#include <string_view>

// Reduction kernels behind the statistics hot loops (shuffled log-likelihood
// evaluation, correlation sums). Scalar reference implementations plus an
// AVX2+FMA variant selected once at runtime; the two are equivalence-tested
// against each other. Environment override: TERRAINWALK_SIMD=scalar|avx2.

namespace terrainwalk::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
bool backend_available(Backend);
// Force a backend (tests, reproducibility across machines). Throws
// std::invalid_argument if the backend is not available on this CPU.
void set_backend(Backend);
std::string_view backend_name(Backend);

double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);

// sum_i log1p(((x[i] - loc[i]) * inv_scale[i])^2 * inv_dof)
// The location-dependent part of a Student-t log density summed over steps;
// inputs must be finite and scales positive.
double t_tail_sum(std::span<const double> x, std::span<const double> loc,
                  std::span<const double> inv_scale, double inv_dof);

namespace scalar {
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double t_tail_sum(std::span<const double> x, std::span<const double> loc,
                  std::span<const double> inv_scale, double inv_dof);
}  // namespace scalar

namespace avx2 {
// False when this build carries no AVX2 translation unit (non-x86 targets).
bool compiled();
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double t_tail_sum(std::span<const double> x, std::span<const double> loc,
                  std::span<const double> inv_scale, double inv_dof);
}  // namespace avx2

}  // namespace terrainwalk::kernels
