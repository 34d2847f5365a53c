#pragma once

#include <string>
#include <vector>

#include "terrainwalk/dynamics.hpp"
#include "terrainwalk/solver.hpp"

namespace terrainwalk {

enum class Strategy {
    nominal,          // constant nominal push-off, no compensation
    tight,            // per-step push-off restoring the mid-stance speed
    reactive,         // no action until the terrain is touched, then replan
    min_energy_full,  // one minimum-work plan over the whole horizon
    finite_horizon,   // receding m-step window, first command executed
};

// What the reactive controller learns from contact. full_after_contact walks
// nominally through the first uneven step and then replans once with the
// whole remaining terrain in view; per_contact replans every step knowing
// only the landing being stepped on, the rest assumed level.
enum class RevealMode { per_contact, full_after_contact };

struct PlanSpec {
    Strategy strategy = Strategy::min_energy_full;
    int horizon = 8;  // finite_horizon only; m >= 1
    SolverSettings solver;
    // Finite-horizon window closure: require nominal speed at the window end
    // in addition to nominal cumulative timing.
    bool window_speed_constraint = true;
    RevealMode reveal = RevealMode::full_after_contact;
};

Strategy strategy_from_string(const std::string&, int* horizon);
std::string strategy_name(const PlanSpec&);

struct PlanResult {
    GaitTrajectory trajectory;
    bool converged = false;
    double residual_speed = 0.0;  // terminal pre-transition speed error
    double residual_time = 0.0;   // total time error vs N*T
    double work_excess = 0.0;     // fraction above N * nominal push-off
    std::vector<int> unconverged_windows;  // paper-aligned step indices
};

PlanResult plan(const ModelParams&, const TerrainProfile&, const PlanSpec&);

PlanResult solve_nominal(const ModelParams&, const TerrainProfile&,
                         const SolverSettings& = {});
PlanResult solve_tight(const ModelParams&, const TerrainProfile&,
                       const SolverSettings& = {});
PlanResult solve_reactive(const ModelParams&, const TerrainProfile&,
                          const SolverSettings& = {},
                          RevealMode = RevealMode::full_after_contact);
PlanResult solve_full_horizon(const ModelParams&, const TerrainProfile&,
                              const SolverSettings& = {});
PlanResult solve_finite_horizon(const ModelParams&, const TerrainProfile&, int m,
                                const SolverSettings& = {},
                                bool window_speed_constraint = true);

}  // namespace terrainwalk
