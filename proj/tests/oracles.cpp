#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>

#include "terrainwalk/errors.hpp"

namespace terrainwalk::oracles {

namespace {

struct PendulumState {
    double theta;
    double omega;
};

// theta'' = theta (inverted pendulum, linearized, dimensionless)
PendulumState rk4_step(const PendulumState& s, double dt) {
    auto f = [](const PendulumState& y) { return PendulumState{y.omega, y.theta}; };
    const PendulumState k1 = f(s);
    const PendulumState k2 = f({s.theta + 0.5 * dt * k1.theta, s.omega + 0.5 * dt * k1.omega});
    const PendulumState k3 = f({s.theta + 0.5 * dt * k2.theta, s.omega + 0.5 * dt * k2.omega});
    const PendulumState k4 = f({s.theta + dt * k3.theta, s.omega + dt * k3.omega});
    return {s.theta + dt / 6.0 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta),
            s.omega + dt / 6.0 * (k1.omega + 2 * k2.omega + 2 * k3.omega + k4.omega)};
}

// Bisect the crossing time of `level` within (t, t+dt].
double refine_crossing(PendulumState s, double dt, double level) {
    double lo = 0.0, hi = dt;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (rk4_step(s, mid).theta < level)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

StanceOde integrate_stance(double v_post, double delta, double delta_next, double alpha,
                           double dt) {
    StanceOde out;
    PendulumState s{-(alpha + delta), v_post};
    const double theta_end = alpha - delta_next;
    double t = 0.0;
    const double t_max = 100.0;

    while (t < t_max) {
        if (!out.reaches_mid && s.theta < 0.0) {
            const PendulumState next = rk4_step(s, dt);
            if (next.theta >= 0.0) {
                const double tc = refine_crossing(s, dt, 0.0);
                PendulumState at = s;
                at = rk4_step(at, tc);
                out.reaches_mid = true;
                out.mid_time = t + tc;
                out.mid_speed = at.omega;
            }
        }
        const PendulumState next = rk4_step(s, dt);
        if (next.theta >= theta_end && s.theta < theta_end) {
            const double tc = refine_crossing(s, dt, theta_end);
            const PendulumState at = rk4_step(s, tc);
            out.duration = t + tc;
            out.end_speed = at.omega;
            return out;
        }
        s = next;
        t += dt;
    }
    out.duration = std::numeric_limits<double>::quiet_NaN();
    return out;
}

GridSearch grid_search_min_work(const ModelParams& p, const TerrainProfile& t, double grid) {
    const int n = t.total_steps();
    std::vector<double> deltas = disturbances(t, p.step_length);
    deltas.push_back(0.0);
    const double ub = 10.0 * p.pushoff_nominal;
    const int n_grid = static_cast<int>(std::floor(ub / grid)) + 1;
    const double time_target = n * p.step_time_nominal;
    const double v_target = p.v_pre_nominal();

    struct Eval {
        double work;
        double h_time;
        double h_speed;
        bool ok;
    };
    auto evaluate = [&](const std::vector<double>& u) -> Eval {
        StepState s{p.v_pre_nominal(), 0.0, 0};
        double work = 0.0;
        try {
            for (int k = 0; k < n; ++k) {
                s = advance(p, s, deltas[static_cast<std::size_t>(k)],
                            deltas[static_cast<std::size_t>(k + 1)],
                            u[static_cast<std::size_t>(k)])
                        .next;
                work += u[static_cast<std::size_t>(k)];
            }
        } catch (const DynamicsError&) {
            return {0.0, 0.0, 0.0, false};
        }
        return {work, s.elapsed - time_target, s.v_pre - v_target, true};
    };
    auto penalized = [&](const std::vector<double>& u, double weight) {
        const Eval e = evaluate(u);
        if (!e.ok) return std::numeric_limits<double>::infinity();
        return e.work + weight * (e.h_time * e.h_time + e.h_speed * e.h_speed);
    };

    auto snap = [&](double v) {
        return std::clamp(std::round(v / grid) * grid, 0.0, (n_grid - 1) * grid);
    };

    // Global stage: exhaustive enumeration on a coarse sub-lattice, keeping
    // the best handful of basins for fine-grid refinement. The basins of this
    // problem are far wider than the coarse pitch.
    const double coarse = 0.02;
    const int n_coarse = static_cast<int>(std::floor(ub / coarse)) + 1;
    struct Candidate {
        double pen;
        std::vector<double> u;
    };
    std::vector<Candidate> top;
    const std::size_t keep = 40;
    std::vector<double> probe(static_cast<std::size_t>(n), 0.0);
    const double coarse_weight = 1e2;
    auto consider = [&](const std::vector<double>& u) {
        const double f = penalized(u, coarse_weight);
        if (!std::isfinite(f)) return;
        if (top.size() < keep) {
            top.push_back({f, u});
            std::push_heap(top.begin(), top.end(),
                           [](const Candidate& a, const Candidate& b) { return a.pen < b.pen; });
        } else if (f < top.front().pen) {
            std::pop_heap(top.begin(), top.end(),
                          [](const Candidate& a, const Candidate& b) { return a.pen < b.pen; });
            top.back() = {f, u};
            std::push_heap(top.begin(), top.end(),
                           [](const Candidate& a, const Candidate& b) { return a.pen < b.pen; });
        }
    };
    const std::function<void(int)> enumerate = [&](int k) {
        if (k == n) {
            consider(probe);
            return;
        }
        for (int g = 0; g < n_coarse; ++g) {
            probe[static_cast<std::size_t>(k)] = g * coarse;
            enumerate(k + 1);
        }
    };
    enumerate(0);

    std::vector<std::vector<double>> starts;
    for (const auto& c : top) {
        std::vector<double> u = c.u;
        for (double& v : u) v = snap(v);
        starts.push_back(std::move(u));
    }
    for (double c : {1.0, 1.5, 2.0, 0.5})
        starts.emplace_back(static_cast<std::size_t>(n), snap(c * p.pushoff_nominal));

    // Moves at a given penalty weight: full per-coordinate grid scans, paired
    // exchanges (shift work between two steps) and uniform shifts. Exchanges
    // are what let the search slide along the constraint manifold.
    const int exchange_steps[] = {1, 2, 5, 10, 20, 50, 100};
    auto improve = [&](std::vector<double>& u, double weight) {
        bool changed_any = false;
        int sweeps = 0;
        bool changed = true;
        while (changed && sweeps < 200) {
            changed = false;
            ++sweeps;
            double f_cur = penalized(u, weight);
            for (int k = 0; k < n; ++k) {
                double best_v = u[static_cast<std::size_t>(k)];
                double best_f = f_cur;
                const double saved = u[static_cast<std::size_t>(k)];
                for (int gidx = 0; gidx < n_grid; ++gidx) {
                    const double cand = gidx * grid;
                    if (cand == saved) continue;
                    u[static_cast<std::size_t>(k)] = cand;
                    const double f = penalized(u, weight);
                    if (f < best_f) {
                        best_f = f;
                        best_v = cand;
                    }
                }
                u[static_cast<std::size_t>(k)] = best_v;
                if (best_v != saved) {
                    changed = true;
                    f_cur = best_f;
                }
            }
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    for (const int ks : exchange_steps) {
                        const double di = u[static_cast<std::size_t>(i)] + ks * grid;
                        const double dj = u[static_cast<std::size_t>(j)] - ks * grid;
                        if (di > ub + 1e-12 || dj < -1e-12) continue;
                        const double si = u[static_cast<std::size_t>(i)];
                        const double sj = u[static_cast<std::size_t>(j)];
                        u[static_cast<std::size_t>(i)] = di;
                        u[static_cast<std::size_t>(j)] = std::max(0.0, dj);
                        const double f = penalized(u, weight);
                        if (f < f_cur) {
                            f_cur = f;
                            changed = true;
                        } else {
                            u[static_cast<std::size_t>(i)] = si;
                            u[static_cast<std::size_t>(j)] = sj;
                        }
                    }
                }
            }
            for (const int ks : exchange_steps) {
                for (const double sign : {1.0, -1.0}) {
                    std::vector<double> cand = u;
                    bool valid = true;
                    for (double& v : cand) {
                        v += sign * ks * grid;
                        if (v < -1e-12 || v > ub + 1e-12) valid = false;
                        v = std::clamp(v, 0.0, ub);
                    }
                    if (!valid) continue;
                    const double f = penalized(cand, weight);
                    if (f < f_cur) {
                        f_cur = f;
                        u = cand;
                        changed = true;
                    }
                }
            }
            changed_any = changed_any || changed;
        }
        return changed_any;
    };

    // The 1e-3 lattice bottoms out around |h| ~ 1e-4..1e-3, so the winner is
    // the least work among candidates inside that feasibility band (falling
    // back to least penalty if the band stays empty).
    const double band = 1.5e-3;
    GridSearch best;
    best.work = std::numeric_limits<double>::infinity();
    double best_pen = std::numeric_limits<double>::infinity();
    bool have_feasible = false;

    for (auto u : starts) {
        if (!evaluate(u).ok) continue;
        for (double weight : {1e2, 1e3, 1e4, 1e5, 1e6}) improve(u, weight);
        const Eval e = evaluate(u);
        const double pen = penalized(u, 1e6);
        const bool in_band = std::abs(e.h_time) <= band && std::abs(e.h_speed) <= band;
        const bool better = in_band ? (!have_feasible || e.work < best.work)
                                    : (!have_feasible && pen < best_pen);
        if (better) {
            have_feasible = have_feasible || in_band;
            best_pen = pen;
            best.pushoffs = u;
            best.work = e.work;
            best.time_err = e.h_time;
            best.speed_err = e.h_speed;
        }
    }
    return best;
}

double t_logpdf(double x, double loc, double scale, double dof) {
    const double z = (x - loc) / scale;
    return std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
           0.5 * std::log(dof * std::numbers::pi) - std::log(scale) -
           (dof + 1.0) / 2.0 * std::log(1.0 + z * z / dof);
}

}  // namespace terrainwalk::oracles
