#pragma once

#include <cmath>
#include <optional>

namespace terrainwalk {

// Dimensionless walker constants in body-mass / gravity / leg-length base
// units. SI values appear only through the conversion helpers below.
//
// The stored nominal speed/time values are always the exact periodic fixed
// point of the level step map for (alpha, pushoff_nominal), so a level
// rollout with constant nominal push-off is periodic to machine precision.
struct ModelParams {
    double alpha = 0.41;             // inter-leg half-angle [rad]
    double v_mid_nominal = 0.0;      // nominal mid-stance speed [sqrt(g L)]
    double step_length = 0.79;       // S [L]; stored independently of alpha
    double step_time_nominal = 0.0;  // T [sqrt(L/g)]
    double pushoff_nominal = 0.0;    // u* [M g L]
    double leg_length = 1.0;         // [m], unit conversion only
    double gravity = 9.81;           // [m/s^2], unit conversion only

    // Typical human walking: alpha 0.41, push-off 0.0342 MgL, step length
    // 0.79 L, leg 1 m. Roughly 1.5 m/s.
    static ModelParams nominal();

    // Periodic level gait derived from (alpha, pushoff).
    static ModelParams from_alpha_pushoff(double alpha, double pushoff,
                                          double step_length_l = 0.79,
                                          double leg_length_m = 1.0,
                                          double gravity_mps2 = 9.81);

    // Match an average walking speed [m/s] at a given step length [m];
    // alpha follows from the step-length geometry unless overridden.
    static ModelParams from_speed_step_length(double speed_mps, double step_length_m,
                                              double leg_length_m = 1.0,
                                              double gravity_mps2 = 9.81,
                                              std::optional<double> alpha_override = {});

    double v_pre_nominal() const {
        return std::sqrt(v_mid_nominal * v_mid_nominal + alpha * alpha);
    }

    // Unit conversions. Work is per unit body mass [J/kg].
    double speed_unit_mps() const { return std::sqrt(gravity * leg_length); }
    double time_unit_s() const { return std::sqrt(leg_length / gravity); }
    double length_unit_m() const { return leg_length; }
    double work_unit_jpkg() const { return gravity * leg_length; }

    double speed_to_si(double v) const { return v * speed_unit_mps(); }
    double speed_from_si(double v) const { return v / speed_unit_mps(); }
    double time_to_si(double t) const { return t * time_unit_s(); }
    double time_from_si(double t) const { return t / time_unit_s(); }

    // Throws std::invalid_argument on out-of-range constants or when the
    // stored nominal values are not periodic to within 1e-3 relative.
    void validate() const;
};

// Preferred human step length [m] for a given average speed [m/s],
// S ~ v^0.42, anchored so that 1.5 m/s maps to 0.79 m.
double preferred_step_length_m(double speed_mps);

}  // namespace terrainwalk
