#pragma once

#include <functional>
#include <span>
#include <vector>

namespace terrainwalk {

struct SolverSettings {
    double constraint_tolerance = 1e-8;
    double optimality_tolerance = 1e-8;
    int max_iterations = 500;           // inner iterations per subproblem
    double pushoff_upper_bound = 10.0;  // multiple of the nominal push-off
    double gradient_step = 1e-7;        // central-difference step
};

// minimize f(x) subject to h(x) = 0 and lower <= x <= upper.
// eval fills f and h and returns false for an infeasible (undefined) point.
struct ConstrainedProblem {
    int n_constraints = 0;
    std::vector<double> lower;
    std::vector<double> upper;
    std::function<bool(std::span<const double> x, double& f, std::span<double> h)> eval;
};

struct SolveReport {
    std::vector<double> x;
    double objective = 0.0;
    std::vector<double> residuals;
    bool converged = false;
    int inner_iterations = 0;
    int outer_iterations = 0;
};

// Augmented-Lagrangian outer loop around a spectral projected-gradient inner
// solve; gradients by central finite differences (one-sided at the bounds).
// Infeasible trial points are rejected in the line search. Suited to the
// small (n <= ~30) smooth problems this project produces; for inconsistent
// constraint sets it converges to a bounded least-violation compromise with
// converged=false.
SolveReport augmented_lagrangian(const ConstrainedProblem&, std::vector<double> x0,
                                 const SolverSettings& = {});

}  // namespace terrainwalk
