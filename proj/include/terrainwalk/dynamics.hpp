#pragma once

#include <span>
#include <vector>

#include "terrainwalk/params.hpp"
#include "terrainwalk/terrain.hpp"

namespace terrainwalk {

// Rollout carrier between steps. `position` counts padded steps from 0;
// the paper-aligned index is position - pad_before.
struct StepState {
    double v_pre = 0.0;    // pre-transition speed entering the next step
    double elapsed = 0.0;  // cumulative time
    int position = 0;
};

struct StepRecord {
    int index = 0;            // 0 = first terrain platform
    int height_multiple = 0;  // platform height in unit-height multiples
    double delta = 0.0;       // landing disturbance [rad]
    double pushoff = 0.0;     // u [MgL]
    double v_post = 0.0;      // post-transition speed
    double step_time = 0.0;   // stance duration
    double v_mid = 0.0;       // mid-stance speed
    double t_mid = 0.0;       // time from stance start to mid-stance
    double time_gain = 0.0;   // k*T - elapsed after this step; positive = ahead
};

struct GaitTrajectory {
    ModelParams params;
    std::vector<StepRecord> steps;
    double total_work = 0.0;
    double total_time = 0.0;
    double final_v_pre = 0.0;  // pre-transition speed leaving the last step

    std::vector<double> midstance_speeds() const;
    std::vector<double> pushoffs() const;
    std::vector<int> indices() const;
};

// Step-to-step transition: impulsive push-off along the trailing leg followed
// by an inelastic collision along the leading leg, both at inter-leg angle
// 2*alpha. Throws DynamicsError(negative_pushoff).
double transition(double v_pre, double pushoff, double alpha);

// Landing disturbance angle for a height change over one step of length S.
// Throws DynamicsError(terrain_too_steep) when |height - height_prev| >= S.
double disturbance(double height, double height_prev, double step_length);

// Stance duration of the linearized inverted pendulum from landing
// configuration -(alpha + delta) to the next landing at alpha - delta_next.
// Throws DynamicsError(fall_backward) when the speed cannot crest the leg,
// DynamicsError(insufficient_momentum) when the next landing is unreachable.
double step_time(double v_post, double delta, double delta_next, double alpha);

// Speed after pendular stance of duration tau.
double end_of_stance_speed(double v_post, double delta, double tau, double alpha);

struct Midstance {
    double speed = 0.0;
    double time = 0.0;
};

// Speed and elapsed stance time when the leg passes vertical. Throws
// DynamicsError(midstance_unreachable) when it never does.
Midstance midstance(double v_post, double delta, double alpha);

struct StepAdvance {
    double v_post = 0.0;
    double tau = 0.0;
    StepState next;
};

// One full step: transition with `pushoff`, stance between the landing
// disturbances of this and the next step.
StepAdvance advance(const ModelParams&, const StepState&, double delta,
                    double delta_next, double pushoff);

// Chain N steps over `terrain` starting from the nominal pre-transition
// speed. pushoffs.size() must equal terrain.total_steps(). Dynamics errors
// are rethrown annotated with the failing paper-aligned step index.
GaitTrajectory rollout(const ModelParams&, const TerrainProfile&,
                       std::span<const double> pushoffs);

}  // namespace terrainwalk
