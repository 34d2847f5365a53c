#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "terrainwalk/kernels.hpp"

using namespace terrainwalk::kernels;

namespace {

struct Arrays {
    std::vector<double> x, y, loc, isc;
};

Arrays random_arrays(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> mag(-8.0, 8.0);
    std::uniform_real_distribution<double> sgn(-1.0, 1.0);
    Arrays a;
    a.x.resize(n);
    a.y.resize(n);
    a.loc.resize(n);
    a.isc.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        a.x[i] = std::copysign(std::pow(10.0, mag(g)), sgn(g));
        a.y[i] = std::copysign(std::pow(10.0, mag(g)), sgn(g));
        a.loc[i] = a.x[i] + sgn(g) * 0.3;
        a.isc[i] = std::pow(10.0, 0.5 * mag(g) / 4.0);
    }
    return a;
}

void check_close(double got, double want, double n) {
    const double tol = std::max({1e-12, 1e-13 * n, 1e-12 * std::abs(want)});
    CHECK(std::abs(got - want) <= tol);
}

}  // namespace

TEST_CASE("backend plumbing") {
    CHECK(backend_available(Backend::scalar));
    CHECK(backend_name(Backend::scalar) == "scalar");
    CHECK(backend_name(Backend::avx2) == "avx2");
    if (backend_available(Backend::avx2)) {
        const Backend before = active_backend();
        set_backend(Backend::avx2);
        CHECK(active_backend() == Backend::avx2);
        set_backend(Backend::scalar);
        CHECK(active_backend() == Backend::scalar);
        set_backend(before);
    } else {
        CHECK_THROWS_AS(set_backend(Backend::avx2), std::invalid_argument);
    }
}

TEST_CASE("scalar and avx2 variants agree") {
    if (!backend_available(Backend::avx2)) {
        MESSAGE("avx2 unavailable on this host; equivalence covered by forwarding stubs");
        return;
    }
    for (const std::size_t n : {0UL, 1UL, 2UL, 3UL, 4UL, 5UL, 7UL, 8UL, 31UL, 100UL, 1001UL}) {
        const Arrays a = random_arrays(n, 0xC0FFEE + n);
        check_close(avx2::sum(a.x), scalar::sum(a.x), static_cast<double>(n));
        check_close(avx2::dot(a.x, a.y), scalar::dot(a.x, a.y), static_cast<double>(n));
        for (const double dof : {1.0, 2.0, 5.0, 29.0}) {
            check_close(avx2::t_tail_sum(a.x, a.loc, a.isc, 1.0 / dof),
                        scalar::t_tail_sum(a.x, a.loc, a.isc, 1.0 / dof),
                        static_cast<double>(n));
        }
    }
}

TEST_CASE("t_tail_sum basics") {
    const std::vector<double> x{1.0, 2.0, 3.0};
    const std::vector<double> isc{2.0, 0.5, 1.0};
    // exact zero when every value sits at its location
    CHECK(scalar::t_tail_sum(x, x, isc, 0.5) == 0.0);
    if (backend_available(Backend::avx2)) CHECK(avx2::t_tail_sum(x, x, isc, 0.5) == 0.0);

    // one-element hand value: log1p((2*0.5)^2 / 4)
    const std::vector<double> v{2.0}, l{1.5}, s{2.0};
    CHECK(scalar::t_tail_sum(v, l, s, 0.25) == doctest::Approx(std::log1p(0.25)).epsilon(1e-15));
}

TEST_CASE("dispatched kernels are deterministic") {
    const Arrays a = random_arrays(257, 42);
    CHECK(sum(a.x) == sum(a.x));
    CHECK(dot(a.x, a.y) == dot(a.x, a.y));
    CHECK(t_tail_sum(a.x, a.loc, a.isc, 0.2) == t_tail_sum(a.x, a.loc, a.isc, 0.2));
    CHECK_THROWS_AS(dot(a.x, std::vector<double>(3, 1.0)), std::invalid_argument);
}
