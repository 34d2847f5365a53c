#include "terrainwalk/params.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "terrainwalk/dynamics.hpp"

namespace terrainwalk {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

// Fill the nominal fixed-point fields from (alpha, pushoff): the level gait
// where push-off exactly restores the collision loss every step.
void derive_fixed_point(ModelParams& p) {
    const double c = std::cos(2.0 * p.alpha);
    const double s = std::sin(2.0 * p.alpha);
    const double v_pre = std::sqrt(2.0 * p.pushoff_nominal) * s / (1.0 - c);
    require(v_pre > p.alpha,
            "push-off too small for a periodic gait at this alpha (v_pre <= alpha)");
    p.step_time_nominal = std::log((p.alpha + v_pre) / (v_pre - p.alpha));
    p.v_mid_nominal = std::sqrt(v_pre * v_pre - p.alpha * p.alpha);
}

}  // namespace

ModelParams ModelParams::nominal() {
    return from_alpha_pushoff(0.41, 0.0342, 0.79, 1.0, 9.81);
}

ModelParams ModelParams::from_alpha_pushoff(double alpha, double pushoff,
                                            double step_length_l, double leg_length_m,
                                            double gravity_mps2) {
    ModelParams p;
    p.alpha = alpha;
    p.pushoff_nominal = pushoff;
    p.step_length = step_length_l;
    p.leg_length = leg_length_m;
    p.gravity = gravity_mps2;
    require(alpha > 0.0 && alpha < std::numbers::pi / 2.0, "alpha must lie in (0, pi/2)");
    require(pushoff > 0.0, "nominal push-off must be positive");
    derive_fixed_point(p);
    p.validate();
    return p;
}

ModelParams ModelParams::from_speed_step_length(double speed_mps, double step_length_m,
                                                double leg_length_m, double gravity_mps2,
                                                std::optional<double> alpha_override) {
    require(speed_mps > 0.0, "speed must be positive");
    require(step_length_m > 0.0, "step length must be positive");
    require(leg_length_m > 0.0 && gravity_mps2 > 0.0, "leg length and gravity must be positive");

    ModelParams p;
    p.leg_length = leg_length_m;
    p.gravity = gravity_mps2;
    p.step_length = step_length_m / leg_length_m;
    if (alpha_override) {
        p.alpha = *alpha_override;
        require(p.alpha > 0.0 && p.alpha < std::numbers::pi / 2.0, "alpha must lie in (0, pi/2)");
    } else {
        require(p.step_length < 2.0, "step length exceeds the leg geometry (S >= 2L)");
        p.alpha = std::asin(p.step_length / 2.0);
    }

    // Average speed = S / T fixes the nominal step time; the pre-transition
    // speed then follows from the level pendulum solution and the push-off
    // from periodicity.
    const double v_avg = speed_mps / p.speed_unit_mps();
    const double tau = p.step_length / v_avg;
    const double v_pre = p.alpha / std::tanh(tau / 2.0);
    p.step_time_nominal = tau;
    p.v_mid_nominal = std::sqrt(v_pre * v_pre - p.alpha * p.alpha);
    p.pushoff_nominal = 0.5 * std::pow(v_pre * std::tan(p.alpha), 2.0);
    p.validate();
    return p;
}

void ModelParams::validate() const {
    require(alpha > 0.0 && alpha < std::numbers::pi / 2.0, "alpha must lie in (0, pi/2)");
    require(v_mid_nominal > 0.0, "nominal mid-stance speed must be positive");
    require(step_length > 0.0, "step length must be positive");
    require(step_time_nominal > 0.0, "nominal step time must be positive");
    require(pushoff_nominal > 0.0, "nominal push-off must be positive");
    require(leg_length > 0.0 && gravity > 0.0, "leg length and gravity must be positive");

    // One nominal step must reproduce the nominal pre-transition speed.
    const double v_pre = v_pre_nominal();
    const double v_post = transition(v_pre, pushoff_nominal, alpha);
    const double tau = step_time(v_post, 0.0, 0.0, alpha);
    const double v_next = end_of_stance_speed(v_post, 0.0, tau, alpha);
    require(std::abs(v_next - v_pre) <= 1e-3 * v_pre,
            "nominal parameters are not periodic (one level step drifts by more than 1e-3)");
}

double preferred_step_length_m(double speed_mps) {
    if (speed_mps <= 0.0) throw std::invalid_argument("speed must be positive");
    return 0.79 * std::pow(speed_mps / 1.5, 0.42);
}

}  // namespace terrainwalk
