#include "terrainwalk/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "terrainwalk/errors.hpp"

namespace terrainwalk {

using Kind = DynamicsError::Kind;

double transition(double v_pre, double pushoff, double alpha) {
    if (pushoff < 0.0)
        throw DynamicsError(Kind::negative_pushoff,
                            "push-off must be non-negative, got " + std::to_string(pushoff));
    if (v_pre <= 0.0)
        throw DynamicsError(Kind::fall_backward,
                            "non-positive pre-transition speed " + std::to_string(v_pre));
    return v_pre * std::cos(2.0 * alpha) + std::sqrt(2.0 * pushoff) * std::sin(2.0 * alpha);
}

double disturbance(double height, double height_prev, double step_length) {
    const double ratio = (height - height_prev) / step_length;
    if (!(std::abs(ratio) < 1.0))
        throw DynamicsError(Kind::terrain_too_steep,
                            "height change " + std::to_string(height - height_prev) +
                                " is not smaller than the step length " +
                                std::to_string(step_length));
    return std::asin(ratio);
}

double step_time(double v_post, double delta, double delta_next, double alpha) {
    const double denom = v_post - alpha - delta;
    if (denom <= 0.0)
        throw DynamicsError(Kind::fall_backward,
                            "post-transition speed " + std::to_string(v_post) +
                                " cannot crest the stance leg (needs > " +
                                std::to_string(alpha + delta) + ")");
    const double arg = v_post * v_post - 2.0 * alpha * (delta + delta_next) +
                       delta_next * delta_next - delta * delta;
    if (arg < 0.0)
        throw DynamicsError(Kind::insufficient_momentum,
                            "stance cannot reach the next landing configuration");
    const double numer = alpha - delta_next + std::sqrt(arg);
    if (numer <= 0.0)
        throw DynamicsError(Kind::insufficient_momentum,
                            "stance cannot reach the next landing configuration");
    return std::log(numer / denom);
}

double end_of_stance_speed(double v_post, double delta, double tau, double alpha) {
    const double a = v_post + alpha + delta;
    const double b = v_post - alpha - delta;
    return 0.5 * (std::exp(-tau) * a + std::exp(tau) * b);
}

Midstance midstance(double v_post, double delta, double alpha) {
    const double arg = v_post * v_post - alpha * alpha - 2.0 * alpha * delta - delta * delta;
    if (arg <= 0.0)
        throw DynamicsError(Kind::midstance_unreachable,
                            "stance never passes vertical (speed " + std::to_string(v_post) +
                                ", disturbance " + std::to_string(delta) + ")");
    const double t_mid = std::log(std::sqrt(arg) / (v_post - alpha - delta));
    return {end_of_stance_speed(v_post, delta, t_mid, alpha), t_mid};
}

StepAdvance advance(const ModelParams& p, const StepState& s, double delta,
                    double delta_next, double pushoff) {
    StepAdvance out;
    out.v_post = transition(s.v_pre, pushoff, p.alpha);
    out.tau = step_time(out.v_post, delta, delta_next, p.alpha);
    out.next.v_pre = end_of_stance_speed(out.v_post, delta, out.tau, p.alpha);
    out.next.elapsed = s.elapsed + out.tau;
    out.next.position = s.position + 1;
    return out;
}

GaitTrajectory rollout(const ModelParams& params, const TerrainProfile& terrain,
                       std::span<const double> pushoffs) {
    const int n = terrain.total_steps();
    if (static_cast<int>(pushoffs.size()) != n)
        throw std::invalid_argument("rollout needs one push-off per step: terrain has " +
                                    std::to_string(n) + " steps, got " +
                                    std::to_string(pushoffs.size()) + " push-offs");

    GaitTrajectory traj;
    traj.params = params;
    traj.final_v_pre = params.v_pre_nominal();
    traj.steps.reserve(static_cast<std::size_t>(n));
    if (n == 0) return traj;

    const std::vector<double> deltas = disturbances(terrain, params.step_length);
    const std::vector<int> multiples = terrain.padded_multiples();
    StepState state{params.v_pre_nominal(), 0.0, 0};

    for (int k = 0; k < n; ++k) {
        const int index = k - terrain.pad_before;
        const double delta_next = (k + 1 < n) ? deltas[static_cast<std::size_t>(k + 1)] : 0.0;
        try {
            const StepAdvance adv =
                advance(params, state, deltas[static_cast<std::size_t>(k)], delta_next,
                        pushoffs[static_cast<std::size_t>(k)]);
            const Midstance mid =
                midstance(adv.v_post, deltas[static_cast<std::size_t>(k)], params.alpha);
            StepRecord rec;
            rec.index = index;
            rec.height_multiple = multiples[static_cast<std::size_t>(k)];
            rec.delta = deltas[static_cast<std::size_t>(k)];
            rec.pushoff = pushoffs[static_cast<std::size_t>(k)];
            rec.v_post = adv.v_post;
            rec.step_time = adv.tau;
            rec.v_mid = mid.speed;
            rec.t_mid = mid.time;
            rec.time_gain = (k + 1) * params.step_time_nominal - adv.next.elapsed;
            traj.steps.push_back(rec);
            traj.total_work += rec.pushoff;
            state = adv.next;
        } catch (DynamicsError& e) {
            e.annotate_step(index);
            throw;
        }
    }
    traj.total_time = state.elapsed;
    traj.final_v_pre = state.v_pre;
    return traj;
}

std::vector<double> GaitTrajectory::midstance_speeds() const {
    std::vector<double> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.v_mid);
    return out;
}

std::vector<double> GaitTrajectory::pushoffs() const {
    std::vector<double> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.pushoff);
    return out;
}

std::vector<int> GaitTrajectory::indices() const {
    std::vector<int> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.index);
    return out;
}

}  // namespace terrainwalk
