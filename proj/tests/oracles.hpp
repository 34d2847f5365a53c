#pragma once

// Independent reference computations used by the test suites. Everything here
// deliberately avoids the library's closed-form stance expressions and the
// trajectory optimizer: the pendulum oracle integrates the stance ODE with
// RK4 plus event bisection, and the planner oracle is a penalized coordinate
// grid search over push-offs.

#include <vector>

#include "terrainwalk/dynamics.hpp"
#include "terrainwalk/terrain.hpp"

namespace terrainwalk::oracles {

struct StanceOde {
    double duration = 0.0;    // time to the next landing configuration
    double end_speed = 0.0;   // speed there
    bool reaches_mid = false;
    double mid_time = 0.0;    // time to the vertical-leg event
    double mid_speed = 0.0;
};

// Linearized stance pendulum from the landing configuration of a step with
// disturbance `delta` at post-transition speed `v_post`, integrated until the
// landing configuration of the next step (disturbance `delta_next`).
StanceOde integrate_stance(double v_post, double delta, double delta_next, double alpha,
                           double dt = 1e-4);

struct GridSearch {
    std::vector<double> pushoffs;
    double work = 0.0;
    double time_err = 0.0;
    double speed_err = 0.0;
};

// Derivative-free reference for the minimum-work plan: cyclic per-coordinate
// search on a fixed push-off grid under a quadratic penalty on the terminal
// speed and total time targets, penalty weight swept upward to convergence,
// several deterministic starts.
GridSearch grid_search_min_work(const ModelParams&, const TerrainProfile&,
                                double grid = 1e-3);

// Student-t log density written out directly.
double t_logpdf(double x, double loc, double scale, double dof);

}  // namespace terrainwalk::oracles
