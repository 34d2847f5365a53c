// AVX2+FMA kernel variants. Built with -mavx2 -mfma on x86-64 (the define
// below); callers go through the runtime dispatch in kernels.cpp.

#include "terrainwalk/kernels.hpp"

#include <cmath>

#if defined(TERRAINWALK_HAVE_AVX2_TU)

#include <immintrin.h>

namespace terrainwalk::kernels::avx2 {

bool compiled() { return true; }

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// signed int64 -> double for |v| < 2^51
inline __m256d to_double(__m256i v) {
    const __m256i magic = _mm256_set1_epi64x(0x4338000000000000LL);  // 2^52 + 2^51
    v = _mm256_add_epi64(v, magic);
    return _mm256_sub_pd(_mm256_castsi256_pd(v), _mm256_set1_pd(6755399441055744.0));
}

// Natural log of positive normal doubles; classic mantissa/exponent split
// with a degree-5/5 rational minimax on [sqrt(1/2), sqrt(2)). ~1-2 ulp.
inline __m256d vlog(__m256d x) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    const __m256i half_exp = _mm256_set1_epi64x(0x3FE0000000000000LL);

    const __m256i xi = _mm256_castpd_si256(x);
    const __m256i biased = _mm256_srli_epi64(xi, 52);
    __m256d e = to_double(_mm256_sub_epi64(biased, _mm256_set1_epi64x(1022)));
    __m256d m = _mm256_castsi256_pd(
        _mm256_or_si256(_mm256_and_si256(xi, mant_mask), half_exp));  // [0.5, 1)

    const __m256d sqrth = _mm256_set1_pd(0.70710678118654752440);
    const __m256d below = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
    m = _mm256_blendv_pd(m, _mm256_add_pd(m, m), below);
    e = _mm256_sub_pd(e, _mm256_and_pd(below, one));
    const __m256d z = _mm256_sub_pd(m, one);

    const __m256d p0 = _mm256_set1_pd(1.01875663804580931796e-4);
    const __m256d p1 = _mm256_set1_pd(4.97494994976747001425e-1);
    const __m256d p2 = _mm256_set1_pd(4.70579119878881725854e0);
    const __m256d p3 = _mm256_set1_pd(1.44989225341610930846e1);
    const __m256d p4 = _mm256_set1_pd(1.79368678507819816313e1);
    const __m256d p5 = _mm256_set1_pd(7.70838733755885391666e0);
    __m256d num = p0;
    num = _mm256_fmadd_pd(num, z, p1);
    num = _mm256_fmadd_pd(num, z, p2);
    num = _mm256_fmadd_pd(num, z, p3);
    num = _mm256_fmadd_pd(num, z, p4);
    num = _mm256_fmadd_pd(num, z, p5);

    const __m256d q0 = _mm256_set1_pd(1.12873587189167450590e1);
    const __m256d q1 = _mm256_set1_pd(4.52279145837532221105e1);
    const __m256d q2 = _mm256_set1_pd(8.29875266912776603211e1);
    const __m256d q3 = _mm256_set1_pd(7.11544750618563894466e1);
    const __m256d q4 = _mm256_set1_pd(2.31251620126765340583e1);
    __m256d den = _mm256_add_pd(z, q0);
    den = _mm256_fmadd_pd(den, z, q1);
    den = _mm256_fmadd_pd(den, z, q2);
    den = _mm256_fmadd_pd(den, z, q3);
    den = _mm256_fmadd_pd(den, z, q4);

    const __m256d z2 = _mm256_mul_pd(z, z);
    __m256d y = _mm256_mul_pd(_mm256_mul_pd(z, z2), _mm256_div_pd(num, den));
    y = _mm256_fnmadd_pd(z2, _mm256_set1_pd(0.5), y);  // y - z^2/2
    __m256d r = _mm256_add_pd(z, y);
    r = _mm256_fmadd_pd(e, _mm256_set1_pd(-2.121944400546905827679e-4), r);
    r = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);
    return r;
}

}  // namespace

double sum(std::span<const double> x) {
    const std::size_t n = x.size();
    std::size_t i = 0;
    __m256d acc = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x.data() + i));
    double out = hsum(acc);
    for (; i < n; ++i) out += x[i];
    return out;
}

double dot(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::size_t i = 0;
    __m256d acc = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i), acc);
    double out = hsum(acc);
    for (; i < n; ++i) out += x[i] * y[i];
    return out;
}

double t_tail_sum(std::span<const double> x, std::span<const double> loc,
                  std::span<const double> inv_scale, double inv_dof) {
    const std::size_t n = x.size();
    std::size_t i = 0;
    const __m256d vinv_dof = _mm256_set1_pd(inv_dof);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) {
        const __m256d z = _mm256_mul_pd(
            _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(loc.data() + i)),
            _mm256_loadu_pd(inv_scale.data() + i));
        const __m256d w = _mm256_fmadd_pd(_mm256_mul_pd(z, z), vinv_dof, one);
        acc = _mm256_add_pd(acc, vlog(w));
    }
    double out = hsum(acc);
    for (; i < n; ++i) {
        const double z = (x[i] - loc[i]) * inv_scale[i];
        out += std::log1p(z * z * inv_dof);
    }
    return out;
}

}  // namespace terrainwalk::kernels::avx2

#else  // !TERRAINWALK_HAVE_AVX2_TU

namespace terrainwalk::kernels::avx2 {

bool compiled() { return false; }

double sum(std::span<const double> x) { return scalar::sum(x); }

double dot(std::span<const double> x, std::span<const double> y) { return scalar::dot(x, y); }

double t_tail_sum(std::span<const double> x, std::span<const double> loc,
                  std::span<const double> inv_scale, double inv_dof) {
    return scalar::t_tail_sum(x, loc, inv_scale, inv_dof);
}

}  // namespace terrainwalk::kernels::avx2

#endif
