#include "terrainwalk/plan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "terrainwalk/errors.hpp"

namespace terrainwalk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stance duration of one step for a trial push-off; +inf when infeasible.
double tau_of(const ModelParams& p, const StepState& s, double delta, double delta_next,
              double u) {
    try {
        return advance(p, s, delta, delta_next, u).tau;
    } catch (const DynamicsError&) {
        return kInf;
    }
}

// Push-off making this step take tau_target, clamped to [0, ub] when the
// timing is unreachable. tau(u) is monotone decreasing. Throws PlanError when
// no admissible push-off completes the step at all.
double timed_pushoff(const ModelParams& p, const StepState& s, double delta,
                     double delta_next, double tau_target, double ub, int step_index,
                     bool* clamped = nullptr) {
    if (clamped) *clamped = false;
    const double tau_hi = tau_of(p, s, delta, delta_next, ub);
    if (!std::isfinite(tau_hi))
        throw PlanError("step " + std::to_string(step_index) +
                            ": no admissible push-off completes the step",
                        step_index);
    if (tau_hi >= tau_target) {
        if (clamped) *clamped = true;
        return ub;  // even the hardest push is too slow
    }
    const double tau_lo = tau_of(p, s, delta, delta_next, 0.0);
    if (tau_lo <= tau_target) {
        if (clamped) *clamped = true;
        return 0.0;  // passive walking is already too fast
    }
    double lo = 0.0, hi = ub;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tau_of(p, s, delta, delta_next, mid) > tau_target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Mid-stance speed of one step for a trial push-off; -inf when infeasible.
double vmid_of(const ModelParams& p, const StepState& s, double delta, double u) {
    try {
        return midstance(transition(s.v_pre, u, p.alpha), delta, p.alpha).speed;
    } catch (const DynamicsError&) {
        return -kInf;
    }
}

// Push-off restoring this step's mid-stance speed to v_target, clamped to
// [0, ub] when unreachable. v_mid(u) is monotone increasing.
double speed_pushoff(const ModelParams& p, const StepState& s, double delta,
                     double v_target, double ub, int step_index, bool* clamped) {
    *clamped = false;
    const double hi_v = vmid_of(p, s, delta, ub);
    if (hi_v <= v_target) {
        if (!std::isfinite(hi_v))
            throw PlanError("step " + std::to_string(step_index) +
                                ": no admissible push-off completes the step",
                            step_index);
        *clamped = true;
        return ub;
    }
    if (vmid_of(p, s, delta, 0.0) >= v_target) {
        *clamped = true;
        return 0.0;  // passively already too fast
    }
    double lo = 0.0, hi = ub;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (vmid_of(p, s, delta, mid) < v_target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Receding-horizon subproblem over one window of steps.
struct Window {
    const ModelParams* params = nullptr;
    StepState s0;
    std::vector<double> deltas;  // window landings + the exit landing
    double time_target = 0.0;    // required sum of step times over the window
    double v_target = 0.0;
    bool speed_constraint = true;
};

ConstrainedProblem make_problem(const Window& w, const SolverSettings& st) {
    const std::size_t mw = w.deltas.size() - 1;
    ConstrainedProblem prob;
    prob.n_constraints = w.speed_constraint ? 2 : 1;
    prob.lower.assign(mw, 0.0);
    prob.upper.assign(mw, st.pushoff_upper_bound * w.params->pushoff_nominal);
    prob.eval = [w](std::span<const double> x, double& f, std::span<double> h) -> bool {
        StepState s = w.s0;
        double work = 0.0;
        try {
            for (std::size_t j = 0; j + 1 < w.deltas.size(); ++j) {
                s = advance(*w.params, s, w.deltas[j], w.deltas[j + 1], x[j]).next;
                work += x[j];
            }
        } catch (const DynamicsError&) {
            return false;
        }
        f = work;
        h[0] = (s.elapsed - w.s0.elapsed) - w.time_target;
        if (w.speed_constraint) h[1] = s.v_pre - w.v_target;
        return true;
    };
    return prob;
}

// All-nominal start wherever it is dynamically feasible; steps that cannot
// complete fall back to the nominal-time push-off.
std::vector<double> feasible_start(const Window& w, double ub) {
    const ModelParams& p = *w.params;
    const std::size_t mw = w.deltas.size() - 1;
    std::vector<double> u(mw, p.pushoff_nominal);
    StepState s = w.s0;
    for (std::size_t j = 0; j < mw; ++j) {
        if (!std::isfinite(tau_of(p, s, w.deltas[j], w.deltas[j + 1], u[j])))
            u[j] = timed_pushoff(p, s, w.deltas[j], w.deltas[j + 1], p.step_time_nominal, ub,
                                 s.position);
        s = advance(p, s, w.deltas[j], w.deltas[j + 1], u[j]).next;
    }
    return u;
}

struct WindowSolve {
    std::vector<double> u;
    bool converged = false;
};

// Per-step nominal-time push-offs: dynamically safe and close to the
// constraint manifold, a good basin for hard windows.
std::vector<double> timed_start(const Window& w, double ub) {
    const ModelParams& p = *w.params;
    const std::size_t mw = w.deltas.size() - 1;
    std::vector<double> u(mw, 0.0);
    StepState s = w.s0;
    for (std::size_t j = 0; j < mw; ++j) {
        u[j] = timed_pushoff(p, s, w.deltas[j], w.deltas[j + 1], p.step_time_nominal, ub,
                             s.position);
        s = advance(p, s, w.deltas[j], w.deltas[j + 1], u[j]).next;
    }
    return u;
}

bool window_feasible(const Window& w, std::span<const double> u) {
    StepState s = w.s0;
    try {
        for (std::size_t j = 0; j + 1 < w.deltas.size(); ++j)
            s = advance(*w.params, s, w.deltas[j], w.deltas[j + 1], u[j]).next;
    } catch (const DynamicsError&) {
        return false;
    }
    return true;
}

// Smallest constant push-off (on a coarse scale between nominal and the
// bound) that completes the window; a last-resort start for steep problems.
std::vector<double> constant_start(const Window& w, double ub, int step_index) {
    const std::size_t mw = w.deltas.size() - 1;
    const double u0 = w.params->pushoff_nominal;
    for (double c : {1.0, 1.5, 2.0, 3.0, 5.0, 7.0, 10.0}) {
        std::vector<double> u(mw, std::min(c * u0, ub));
        if (window_feasible(w, u)) return u;
    }
    throw PlanError("step " + std::to_string(step_index) +
                        ": no admissible push-off sequence completes the window",
                    step_index);
}

// Tries the supplied warm start first, then nominal-based, nominal-time and
// constant starts; returns the first converged solve, else the
// least-violating one.
WindowSolve solve_window(const Window& w, const SolverSettings& st,
                         const std::vector<double>* warm = nullptr) {
    const ConstrainedProblem prob = make_problem(w, st);
    const double ub = st.pushoff_upper_bound * w.params->pushoff_nominal;

    std::vector<std::vector<double>> starts;
    if (warm && warm->size() == prob.lower.size() && window_feasible(w, *warm))
        starts.push_back(*warm);
    try {
        starts.push_back(feasible_start(w, ub));
    } catch (const PlanError&) {}
    try {
        starts.push_back(timed_start(w, ub));
    } catch (const PlanError&) {}
    if (starts.empty()) starts.push_back(constant_start(w, ub, w.s0.position));

    SolveReport best;
    bool have = false;
    for (const auto& x0 : starts) {
        SolveReport rep = augmented_lagrangian(prob, x0, st);
        if (rep.converged) return {rep.x, true};
        double rmax = 0.0, bmax = 0.0;
        for (double r : rep.residuals) rmax = std::max(rmax, std::abs(r));
        for (double r : best.residuals) bmax = std::max(bmax, std::abs(r));
        if (!have || rmax < bmax || (rmax == bmax && rep.objective < best.objective)) {
            best = std::move(rep);
            have = true;
        }
    }
    return {best.x, false};
}

// Landing disturbances over the padded terrain plus the level exit step.
std::vector<double> landing_deltas(const ModelParams& p, const TerrainProfile& t) {
    std::vector<double> d = disturbances(t, p.step_length);
    d.push_back(0.0);
    return d;
}

PlanResult finish(const ModelParams& p, const TerrainProfile& t,
                  std::span<const double> pushoffs, bool solver_converged,
                  std::vector<int> unconverged, const SolverSettings& st) {
    PlanResult r;
    r.trajectory = rollout(p, t, pushoffs);
    const int n = t.total_steps();
    const double nominal_work = n * p.pushoff_nominal;
    r.residual_time = r.trajectory.total_time - n * p.step_time_nominal;
    r.residual_speed = r.trajectory.final_v_pre - p.v_pre_nominal();
    r.work_excess = nominal_work > 0.0
                        ? (r.trajectory.total_work - nominal_work) / nominal_work
                        : 0.0;
    r.unconverged_windows = std::move(unconverged);
    r.converged = solver_converged && r.unconverged_windows.empty() &&
                  std::abs(r.residual_time) <= st.constraint_tolerance &&
                  std::abs(r.residual_speed) <= st.constraint_tolerance;
    return r;
}

}  // namespace

PlanResult solve_nominal(const ModelParams& p, const TerrainProfile& t,
                         const SolverSettings&) {
    PlanResult r;
    const int n = t.total_steps();
    r.trajectory = rollout(p, t, std::vector<double>(static_cast<std::size_t>(n),
                                                     p.pushoff_nominal));
    r.residual_time = r.trajectory.total_time - n * p.step_time_nominal;
    r.residual_speed = r.trajectory.final_v_pre - p.v_pre_nominal();
    r.work_excess = 0.0;
    r.converged = true;  // nothing enforced; residuals report the drift
    return r;
}

// High-gain one-step regulation: each push-off is chosen so the step's
// mid-stance speed is back at nominal, whatever it costs. A speed-flat
// profile, near-nominal timing, no plan beyond the step being taken.
PlanResult solve_tight(const ModelParams& p, const TerrainProfile& t,
                       const SolverSettings& st) {
    const int n = t.total_steps();
    const std::vector<double> deltas = landing_deltas(p, t);
    const double ub = st.pushoff_upper_bound * p.pushoff_nominal;

    std::vector<double> u(static_cast<std::size_t>(n), 0.0);
    std::vector<int> clamped_steps;
    StepState s{p.v_pre_nominal(), 0.0, 0};
    for (int k = 0; k < n; ++k) {
        bool clamped = false;
        u[static_cast<std::size_t>(k)] =
            speed_pushoff(p, s, deltas[static_cast<std::size_t>(k)], p.v_mid_nominal, ub,
                          k - t.pad_before, &clamped);
        if (clamped) clamped_steps.push_back(k - t.pad_before);
        s = advance(p, s, deltas[static_cast<std::size_t>(k)],
                    deltas[static_cast<std::size_t>(k + 1)], u[static_cast<std::size_t>(k)])
                .next;
    }
    return finish(p, t, u, true, std::move(clamped_steps), st);
}

PlanResult solve_full_horizon(const ModelParams& p, const TerrainProfile& t,
                              const SolverSettings& st) {
    const int n = t.total_steps();
    if (n == 0) return finish(p, t, {}, true, {}, st);

    Window w;
    w.params = &p;
    w.s0 = StepState{p.v_pre_nominal(), 0.0, 0};
    w.deltas = landing_deltas(p, t);
    w.time_target = n * p.step_time_nominal;
    w.v_target = p.v_pre_nominal();
    w.speed_constraint = true;

    const WindowSolve sol = solve_window(w, st);
    return finish(p, t, sol.u, sol.converged, {}, st);
}

PlanResult solve_finite_horizon(const ModelParams& p, const TerrainProfile& t, int m,
                                const SolverSettings& st, bool window_speed_constraint) {
    if (m < 1) throw std::invalid_argument("finite horizon needs m >= 1");
    const int n = t.total_steps();
    const std::vector<double> deltas = landing_deltas(p, t);

    std::vector<double> executed;
    executed.reserve(static_cast<std::size_t>(n));
    std::vector<int> unconverged;
    StepState s{p.v_pre_nominal(), 0.0, 0};
    std::vector<double> warm;

    for (int k = 0; k < n; ++k) {
        const int mw = std::min(m, n - k);
        Window w;
        w.params = &p;
        w.s0 = s;
        w.deltas.assign(deltas.begin() + k, deltas.begin() + k + mw);
        w.deltas.push_back(0.0);  // beyond the horizon the terrain is taken level
        w.time_target = (k + mw) * p.step_time_nominal - s.elapsed;
        w.v_target = p.v_pre_nominal();
        // A window with fewer push-offs than constraints would be
        // over-determined; the timing goal alone then pins it exactly.
        w.speed_constraint = window_speed_constraint && mw >= 2;

        // Warm start: the previous plan shifted one step, topped up nominal.
        if (!warm.empty()) {
            warm.erase(warm.begin());
            warm.resize(static_cast<std::size_t>(mw), p.pushoff_nominal);
        }
        const WindowSolve sol = solve_window(w, st, warm.empty() ? nullptr : &warm);
        warm = sol.u;
        if (!sol.converged) unconverged.push_back(k - t.pad_before);
        const double u_exec = sol.u.front();
        executed.push_back(u_exec);
        try {
            s = advance(p, s, deltas[static_cast<std::size_t>(k)],
                        deltas[static_cast<std::size_t>(k + 1)], u_exec)
                    .next;
        } catch (DynamicsError& e) {
            e.annotate_step(k - t.pad_before);
            throw;
        }
    }
    return finish(p, t, executed, true, std::move(unconverged), st);
}

PlanResult solve_reactive(const ModelParams& p, const TerrainProfile& t,
                          const SolverSettings& st, RevealMode reveal) {
    const int n = t.total_steps();
    const std::vector<double> deltas = landing_deltas(p, t);

    int first_contact = n;  // first step whose landing differs from level
    for (int k = 0; k < n; ++k)
        if (deltas[static_cast<std::size_t>(k)] != 0.0) {
            first_contact = k;
            break;
        }
    if (first_contact == n) return solve_nominal(p, t, st);

    std::vector<double> executed;
    executed.reserve(static_cast<std::size_t>(n));
    std::vector<int> unconverged;
    StepState s{p.v_pre_nominal(), 0.0, 0};

    auto advance_true = [&](int k, double u) {
        try {
            s = advance(p, s, deltas[static_cast<std::size_t>(k)],
                        deltas[static_cast<std::size_t>(k + 1)], u)
                    .next;
        } catch (DynamicsError& e) {
            e.annotate_step(k - t.pad_before);
            throw;
        }
        executed.push_back(u);
    };

    if (reveal == RevealMode::full_after_contact) {
        // The push-off into the first uneven step fires before its landing,
        // so nominal walking runs through that step; the replan happens once
        // it has been touched, with the remaining terrain then in view.
        for (int k = 0; k <= first_contact && k < n; ++k)
            advance_true(k, p.pushoff_nominal);
        const int start = first_contact + 1;
        if (start < n) {
            Window w;
            w.params = &p;
            w.s0 = s;
            w.deltas.assign(deltas.begin() + start, deltas.end());
            w.time_target = n * p.step_time_nominal - s.elapsed;
            w.v_target = p.v_pre_nominal();
            w.speed_constraint = true;
            const WindowSolve sol = solve_window(w, st);
            if (!sol.converged) unconverged.push_back(start - t.pad_before);
            for (std::size_t j = 0; j < sol.u.size(); ++j)
                advance_true(start + static_cast<int>(j), sol.u[j]);
        }
        return finish(p, t, executed, true, std::move(unconverged), st);
    }

    // per_contact: replan every step; the landing being stepped on is known,
    // anything farther is assumed to stay level at the current height.
    for (int k = 0; k < first_contact; ++k) advance_true(k, p.pushoff_nominal);
    std::vector<double> warm;
    for (int k = first_contact; k < n; ++k) {
        Window w;
        w.params = &p;
        w.s0 = s;
        w.deltas.assign(static_cast<std::size_t>(n - k + 1), 0.0);
        w.deltas[0] = deltas[static_cast<std::size_t>(k)];
        w.time_target = n * p.step_time_nominal - s.elapsed;
        w.v_target = p.v_pre_nominal();
        w.speed_constraint = (n - k) >= 2;
        if (!warm.empty()) warm.erase(warm.begin());
        const WindowSolve sol = solve_window(w, st, warm.empty() ? nullptr : &warm);
        warm = sol.u;
        if (!sol.converged) unconverged.push_back(k - t.pad_before);
        advance_true(k, sol.u.front());
    }
    return finish(p, t, executed, true, std::move(unconverged), st);
}

PlanResult plan(const ModelParams& p, const TerrainProfile& t, const PlanSpec& spec) {
    switch (spec.strategy) {
        case Strategy::nominal: return solve_nominal(p, t, spec.solver);
        case Strategy::tight: return solve_tight(p, t, spec.solver);
        case Strategy::reactive: return solve_reactive(p, t, spec.solver, spec.reveal);
        case Strategy::min_energy_full: return solve_full_horizon(p, t, spec.solver);
        case Strategy::finite_horizon:
            return solve_finite_horizon(p, t, spec.horizon, spec.solver,
                                        spec.window_speed_constraint);
    }
    throw std::invalid_argument("unknown strategy");
}

Strategy strategy_from_string(const std::string& s, int* horizon) {
    if (s == "nominal") return Strategy::nominal;
    if (s == "tight") return Strategy::tight;
    if (s == "reactive") return Strategy::reactive;
    if (s == "min-energy" || s == "min_energy" || s == "full") return Strategy::min_energy_full;
    if (s.rfind("horizon:", 0) == 0) {
        const std::string num = s.substr(8);
        try {
            const int m = std::stoi(num);
            if (m < 1) throw std::invalid_argument("m < 1");
            if (horizon) *horizon = m;
        } catch (const std::exception&) {
            throw std::invalid_argument("bad horizon length in '" + s + "'");
        }
        return Strategy::finite_horizon;
    }
    throw std::invalid_argument(
        "unknown strategy '" + s +
        "' (expected nominal|tight|reactive|min-energy|horizon:<m>)");
}

std::string strategy_name(const PlanSpec& spec) {
    switch (spec.strategy) {
        case Strategy::nominal: return "nominal";
        case Strategy::tight: return "tight";
        case Strategy::reactive: return "reactive";
        case Strategy::min_energy_full: return "min-energy";
        case Strategy::finite_horizon: return "horizon:" + std::to_string(spec.horizon);
    }
    return "?";
}

}  // namespace terrainwalk
