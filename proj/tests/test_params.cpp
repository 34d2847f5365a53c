#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "terrainwalk/dynamics.hpp"
#include "terrainwalk/params.hpp"

using namespace terrainwalk;

TEST_CASE("nominal parameters are the exact periodic fixed point") {
    const ModelParams p = ModelParams::nominal();
    CHECK(p.alpha == 0.41);
    CHECK(p.pushoff_nominal == 0.0342);
    CHECK(p.step_length == 0.79);
    CHECK(p.step_time_nominal == doctest::Approx(1.6632967699898322).epsilon(1e-15));
    CHECK(p.v_pre_nominal() == doctest::Approx(0.6017375969431416).epsilon(1e-15));
    CHECK(p.v_mid_nominal == doctest::Approx(0.4404408423101867).epsilon(1e-15));

    // one level step reproduces the state to machine precision
    const double v_post = transition(p.v_pre_nominal(), p.pushoff_nominal, p.alpha);
    const double tau = step_time(v_post, 0.0, 0.0, p.alpha);
    CHECK(v_post == doctest::Approx(p.v_pre_nominal()).epsilon(1e-15));
    CHECK(tau == doctest::Approx(p.step_time_nominal).epsilon(1e-15));
    CHECK(end_of_stance_speed(v_post, 0.0, tau, p.alpha) ==
          doctest::Approx(p.v_pre_nominal()).epsilon(1e-15));

    // and sits inside the published ranges
    CHECK(std::abs(p.step_time_nominal - 1.665) < 2e-3);
    CHECK(std::abs(p.v_pre_nominal() - 0.601) < 1e-3);
    CHECK(std::abs(p.v_mid_nominal - 0.44) < 2e-3);
}

TEST_CASE("speed / step-length construction") {
    const ModelParams p = ModelParams::from_speed_step_length(1.5, 0.79);
    CHECK(p.alpha == doctest::Approx(0.4060678510574097).epsilon(1e-15));
    CHECK(p.step_time_nominal == doctest::Approx(1.6495684284078669).epsilon(1e-15));
    CHECK(p.v_pre_nominal() == doctest::Approx(0.5992158291808261).epsilon(1e-14));
    CHECK(p.pushoff_nominal == doctest::Approx(0.0331895350223783).epsilon(1e-13));
    CHECK(p.v_mid_nominal == doctest::Approx(0.4406455608292024).epsilon(1e-14));

    // average speed round-trips: S / T in SI
    const double avg = (p.step_length * p.leg_length) / (p.step_time_nominal * p.time_unit_s());
    CHECK(avg == doctest::Approx(1.5).epsilon(1e-12));

    const ModelParams q = ModelParams::from_speed_step_length(1.2, 0.7, 1.0, 9.81, 0.41);
    CHECK(q.alpha == 0.41);  // explicit override wins over the geometry
    CHECK(q.step_length == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("preferred step length follows the anchored power law") {
    CHECK(preferred_step_length_m(1.5) == doctest::Approx(0.79).epsilon(1e-15));
    CHECK(preferred_step_length_m(1.0) == doctest::Approx(0.6662983878805361).epsilon(1e-14));
    CHECK(preferred_step_length_m(1.25) == doctest::Approx(0.7317638785281683).epsilon(1e-14));
    CHECK_THROWS_AS(preferred_step_length_m(0.0), std::invalid_argument);
}

TEST_CASE("invalid parameter combinations are rejected") {
    CHECK_THROWS_AS(ModelParams::from_alpha_pushoff(0.0, 0.03), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams::from_alpha_pushoff(1.6, 0.03), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams::from_alpha_pushoff(0.41, 0.0), std::invalid_argument);
    // push-off too weak for a periodic gait at this angle
    CHECK_THROWS_AS(ModelParams::from_alpha_pushoff(0.41, 1e-5), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams::from_speed_step_length(-1.0, 0.79), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams::from_speed_step_length(1.5, 2.5), std::invalid_argument);
}

TEST_CASE("unit conversions round-trip") {
    const ModelParams p = ModelParams::nominal();
    CHECK(p.speed_unit_mps() == doctest::Approx(std::sqrt(9.81)).epsilon(1e-15));
    for (const double x : {0.3, 1.0, 2.7}) {
        CHECK(p.speed_from_si(p.speed_to_si(x)) == doctest::Approx(x).epsilon(1e-12));
        CHECK(p.time_from_si(p.time_to_si(x)) == doctest::Approx(x).epsilon(1e-12));
    }
    // the dimensionless unit anchors: 1 speed unit = 3.13 m/s, 1 time unit = 0.32 s
    CHECK(p.speed_to_si(1.0) == doctest::Approx(3.13).epsilon(1e-3));
    CHECK(p.time_to_si(1.0) == doctest::Approx(0.32).epsilon(2e-3));
}
