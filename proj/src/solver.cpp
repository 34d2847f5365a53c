#include "terrainwalk/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <limits>
#include <stdexcept>

namespace terrainwalk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Augmented-Lagrangian merit for fixed multipliers and penalty.
class Merit {
public:
    Merit(const ConstrainedProblem& p) : prob_(p), h_(p.n_constraints, 0.0) {}

    void set(std::span<const double> lambda, double mu) {
        lambda_.assign(lambda.begin(), lambda.end());
        mu_ = mu;
    }

    // +inf marks an infeasible point.
    double operator()(std::span<const double> x) {
        double f = 0.0;
        if (!prob_.eval(x, f, h_)) return kInf;
        double m = f;
        for (int i = 0; i < prob_.n_constraints; ++i)
            m += lambda_[static_cast<std::size_t>(i)] * h_[static_cast<std::size_t>(i)] +
                 0.5 * mu_ * h_[static_cast<std::size_t>(i)] * h_[static_cast<std::size_t>(i)];
        return m;
    }

    // Constraint values at the last evaluated point.
    const std::vector<double>& last_h() const { return h_; }

    bool raw(std::span<const double> x, double& f, std::vector<double>& h) {
        h.resize(static_cast<std::size_t>(prob_.n_constraints));
        return prob_.eval(x, f, h);
    }

private:
    const ConstrainedProblem& prob_;
    std::vector<double> lambda_;
    double mu_ = 0.0;
    std::vector<double> h_;
};

void project(std::vector<double>& x, std::span<const double> lo, std::span<const double> hi) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

// Central differences, one-sided at the box edges or next to infeasible
// territory; zero when boxed in on both sides.
void fd_gradient(Merit& merit, std::vector<double>& x, double fx, double step,
                 std::span<const double> lo, std::span<const double> hi,
                 std::vector<double>& g) {
    const std::size_t n = x.size();
    g.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        const double up = std::min(xi + step, hi[i]);
        const double dn = std::max(xi - step, lo[i]);
        double fu = kInf, fd = kInf;
        if (up > xi) {
            x[i] = up;
            fu = merit(x);
        }
        if (dn < xi) {
            x[i] = dn;
            fd = merit(x);
        }
        x[i] = xi;
        if (std::isfinite(fu) && std::isfinite(fd)) {
            g[i] = (fu - fd) / (up - dn);
        } else if (std::isfinite(fu)) {
            g[i] = (fu - fx) / (up - xi);
        } else if (std::isfinite(fd)) {
            g[i] = (fx - fd) / (xi - dn);
        } else {
            g[i] = 0.0;
        }
    }
}

struct SpgOutcome {
    double merit_value = kInf;
    double pg_norm = kInf;
    int iterations = 0;
};

// Spectral projected gradient with a nonmonotone (10-step) Armijo search.
SpgOutcome spg_minimize(Merit& merit, std::vector<double>& x, std::span<const double> lo,
                        std::span<const double> hi, double tol, int max_iter, double fd_step) {
    constexpr double kGamma = 1e-4;
    constexpr std::size_t kMemory = 10;

    SpgOutcome out;
    const std::size_t n = x.size();
    double fx = merit(x);
    if (!std::isfinite(fx)) return out;  // caller must supply a feasible start

    std::vector<double> g(n), x_prev(n), g_prev(n), trial(n), d(n);
    std::deque<double> recent{fx};
    double alpha = 1.0;
    int floored = 0;

    for (int it = 0; it < max_iter; ++it) {
        fd_gradient(merit, x, fx, fd_step, lo, hi, g);
        if (it > 0) {
            double ss = 0.0, sy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double s = x[i] - x_prev[i];
                ss += s * s;
                sy += s * (g[i] - g_prev[i]);
            }
            alpha = (sy > 1e-30) ? std::clamp(ss / sy, 1e-10, 1e10) : 1e4;
        } else {
            alpha = 1.0 / std::max(1e-10, inf_norm(g));
        }
        // A brush with the steep barrier region can crush the spectral step;
        // restart the estimate instead of crawling at the safeguard floor.
        if (alpha <= 1.01e-10) {
            if (++floored >= 3) {
                alpha = 1.0 / std::max(1e-10, inf_norm(g));
                floored = 0;
            }
        } else {
            floored = 0;
        }

        double pg = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            pg = std::max(pg, std::abs(std::clamp(x[i] - g[i], lo[i], hi[i]) - x[i]));
        out.pg_norm = pg;
        out.iterations = it;
        if (pg <= tol) break;

        double gd = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = std::clamp(x[i] - alpha * g[i], lo[i], hi[i]) - x[i];
            gd += g[i] * d[i];
        }
        if (gd >= 0.0) break;  // descent exhausted at this scale

        const double f_ref = *std::max_element(recent.begin(), recent.end());
        double t = 1.0;
        double ft = kInf;
        while (t > 1e-14) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + t * d[i];
            ft = merit(trial);
            if (ft <= f_ref + kGamma * t * gd) break;
            t *= 0.5;
        }
        if (std::getenv("TERRAINWALK_SPG_TRACE") && it % 25 == 0)
            std::fprintf(stderr, "    [spg] it=%d f=%.10f pg=%.3e alpha=%.2e t=%.2e gd=%.2e\n",
                         it, fx, pg, alpha, t, gd);
        if (t <= 1e-14) break;  // stuck at the finite-difference noise floor

        x_prev = x;
        g_prev = g;
        x = trial;
        fx = ft;
        recent.push_back(fx);
        if (recent.size() > kMemory) recent.pop_front();
    }
    out.merit_value = fx;
    return out;
}

}  // namespace

SolveReport augmented_lagrangian(const ConstrainedProblem& prob, std::vector<double> x0,
                                 const SolverSettings& st) {
    const std::size_t n = x0.size();
    if (prob.lower.size() != n || prob.upper.size() != n)
        throw std::invalid_argument("augmented_lagrangian: bound size mismatch");

    SolveReport rep;
    project(x0, prob.lower, prob.upper);
    Merit merit(prob);

    std::vector<double> lambda(static_cast<std::size_t>(prob.n_constraints), 0.0);
    double mu = 10.0;
    constexpr double kMuMax = 1e12;
    constexpr int kMaxOuter = 60;

    std::vector<double> x = x0;
    double f = 0.0;
    std::vector<double> h;
    if (!merit.raw(x, f, h)) {
        // Infeasible start: nothing to optimize from here.
        rep.x = std::move(x);
        rep.objective = kInf;
        rep.residuals.assign(static_cast<std::size_t>(prob.n_constraints), kInf);
        rep.converged = false;
        return rep;
    }

    double best_hnorm = kInf;
    double pg = kInf;
    int stalled_at_cap = 0;
    int f_stalls = 0;
    double f_prev = kInf;
    for (int outer = 0; outer < kMaxOuter; ++outer) {
        merit.set(lambda, mu);
        const double inner_tol =
            std::max(st.optimality_tolerance, std::min(1e-3, 0.1 * best_hnorm));
        const SpgOutcome inner =
            spg_minimize(merit, x, prob.lower, prob.upper, inner_tol, st.max_iterations,
                         st.gradient_step);
        rep.inner_iterations += inner.iterations;
        rep.outer_iterations = outer + 1;

        merit.raw(x, f, h);
        const double hnorm = inf_norm(h);
        pg = inner.pg_norm;
        if (std::getenv("TERRAINWALK_SOLVER_TRACE"))
            std::fprintf(stderr, "  [al] outer=%d mu=%.1e f=%.8f |h|=%.3e pg=%.3e it=%d\n",
                         outer, mu, f, hnorm, pg, inner.iterations);
        // Near a steep barrier face the finite-difference gradient over-reads
        // the true slope, so the projected-gradient check can stay above
        // tolerance at an optimal point. A feasible iterate whose objective
        // no longer moves across multiplier updates counts as converged.
        f_stalls = (hnorm <= st.constraint_tolerance &&
                    std::abs(f - f_prev) <= 1e-11 * (1.0 + std::abs(f)))
                       ? f_stalls + 1
                       : 0;
        f_prev = f;
        if (hnorm <= st.constraint_tolerance &&
            (pg <= st.optimality_tolerance || f_stalls >= 2)) {
            rep.converged = true;
            break;
        }
        if (hnorm <= std::max(st.constraint_tolerance, 0.25 * best_hnorm)) {
            for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] += mu * h[i];
            best_hnorm = std::max(hnorm, 1e-300);
            // Accelerate a slowly contracting multiplier tail.
            if (outer >= 6) mu = std::min(mu * 3.0, kMuMax);
        } else {
            if (mu >= kMuMax && ++stalled_at_cap >= 3) break;  // least-violation compromise
            mu = std::min(mu * 10.0, kMuMax);
        }
    }

    rep.x = std::move(x);
    rep.objective = f;
    rep.residuals = h;
    return rep;
}

}  // namespace terrainwalk
