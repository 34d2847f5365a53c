#include "terrainwalk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "terrainwalk/errors.hpp"
#include "terrainwalk/kernels.hpp"

namespace terrainwalk {

namespace {

// Index-aligned value pairs of two series.
struct Aligned {
    std::vector<int> indices;
    std::vector<double> a;
    std::vector<double> b;
};

Aligned align(const SpeedSeries& x, const SpeedSeries& y, bool fluctuations) {
    const std::vector<double> xv = fluctuations ? x.fluctuations() : x.speeds;
    const std::vector<double> yv = fluctuations ? y.fluctuations() : y.speeds;
    Aligned out;
    std::size_t i = 0, j = 0;
    while (i < x.indices.size() && j < y.indices.size()) {
        if (x.indices[i] < y.indices[j]) {
            ++i;
        } else if (x.indices[i] > y.indices[j]) {
            ++j;
        } else {
            out.indices.push_back(x.indices[i]);
            out.a.push_back(xv[i]);
            out.b.push_back(yv[j]);
            ++i;
            ++j;
        }
    }
    return out;
}

struct PearsonParts {
    double rho;
    int n;
};

PearsonParts pearson_raw(std::span<const double> a, std::span<const double> b) {
    const int n = static_cast<int>(a.size());
    if (n < 3) throw SeriesError("need at least 3 common steps, got " + std::to_string(n));
    const double ma = kernels::sum(a) / n;
    const double mb = kernels::sum(b) / n;
    std::vector<double> da(a.size()), db(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        da[i] = a[i] - ma;
        db[i] = b[i] - mb;
    }
    const double saa = kernels::dot(da, da);
    const double sbb = kernels::dot(db, db);
    if (saa <= 0.0 || sbb <= 0.0) throw SeriesError("zero variance in a correlated series");
    return {kernels::dot(da, db) / std::sqrt(saa * sbb), n};
}

double two_sided_p(double rho, int n) {
    const double d = 1.0 - rho * rho;
    if (d <= 0.0) return 0.0;
    const double t = std::abs(rho) * std::sqrt((n - 2) / d);
    const boost::math::students_t dist(n - 2);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t bounded(std::mt19937_64& g, std::uint64_t n) {
    // Lemire multiply-shift with rejection; unbiased and portable.
    const std::uint64_t threshold = (-n) % n;
    while (true) {
        const unsigned __int128 m = static_cast<unsigned __int128>(g()) * n;
        const std::uint64_t low = static_cast<std::uint64_t>(m);
        if (low >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
}

// Deterministic permutation for shuffle r of a given seed; independent of
// any shared RNG state so evaluations can run in any order.
void permutation(std::uint64_t seed, int r, std::vector<std::size_t>& perm) {
    std::mt19937_64 g(splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(r) + 1))));
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (std::size_t i = perm.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(bounded(g, i));
        std::swap(perm[i - 1], perm[j]);
    }
}

}  // namespace

PearsonResult pearson(const SpeedSeries& x, const SpeedSeries& y, CorrelationMode mode) {
    const Aligned al = align(x, y, mode == CorrelationMode::fluctuations);
    const PearsonParts parts = pearson_raw(al.a, al.b);
    return {parts.rho, two_sided_p(parts.rho, parts.n), parts.n};
}

AffineFit fit_scale(const SpeedSeries& model, const SpeedSeries& data) {
    const Aligned al = align(model, data, false);
    const int n = static_cast<int>(al.a.size());
    if (n < 2) throw SeriesError("need at least 2 common steps to fit a scale");
    const double mm = kernels::sum(al.a) / n;
    const double md = kernels::sum(al.b) / n;
    double sdd = 0.0, sdm = 0.0, smm = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dd = al.b[static_cast<std::size_t>(i)] - md;
        const double dm = al.a[static_cast<std::size_t>(i)] - mm;
        sdd += dd * dd;
        sdm += dd * dm;
        smm += dm * dm;
    }
    if (smm <= 0.0) throw SeriesError("model series is constant; amplitude fit is degenerate");
    if (sdd <= 0.0) throw SeriesError("data series is constant; amplitude fit is degenerate");
    const double slope = sdm / sdd;
    return {slope, mm - slope * md};
}

ComparisonReport loglik_ratio(const SpeedSeries& model,
                              const std::vector<SpeedSeries>& scaled_subjects,
                              const LoglikOptions& opts) {
    if (scaled_subjects.size() < 2) throw SeriesError("need at least 2 subject series");
    if (opts.n_shuffles < 1) throw SeriesError("need at least 1 shuffle");

    // Steps present in the model and every subject.
    std::vector<int> common = model.indices;
    for (const auto& s : scaled_subjects) {
        std::vector<int> next;
        std::set_intersection(common.begin(), common.end(), s.indices.begin(), s.indices.end(),
                              std::back_inserter(next));
        common.swap(next);
    }
    const int n_steps = static_cast<int>(common.size());
    if (n_steps < 1) throw SeriesError("no common steps between model and subjects");
    const int n_subj = static_cast<int>(scaled_subjects.size());

    auto values_at = [&](const SpeedSeries& s) {
        std::vector<double> v(static_cast<std::size_t>(n_steps));
        std::size_t j = 0;
        for (int k = 0; k < n_steps; ++k) {
            while (s.indices[j] != common[static_cast<std::size_t>(k)]) ++j;
            v[static_cast<std::size_t>(k)] = s.speeds[j];
        }
        return v;
    };

    const std::vector<double> model_vals = values_at(model);
    std::vector<std::vector<double>> subj(static_cast<std::size_t>(n_subj));
    for (int s = 0; s < n_subj; ++s) subj[static_cast<std::size_t>(s)] = values_at(scaled_subjects[static_cast<std::size_t>(s)]);

    // Per-step location = model prediction, scale = across-subject sample sd,
    // floored at a fraction of the model fluctuation RMS.
    const double model_mean = kernels::sum(model_vals) / n_steps;
    double rms = 0.0;
    for (double v : model_vals) rms += (v - model_mean) * (v - model_mean);
    rms = std::sqrt(rms / n_steps);
    const double floor = opts.scale_floor_rel * (rms > 0.0 ? rms : 1.0);

    ComparisonReport rep;
    rep.n_steps = n_steps;
    rep.n_subjects = n_subj;
    rep.dof = n_subj - 1;
    rep.seed = opts.seed;
    rep.n_shuffles = opts.n_shuffles;
    rep.scale_floor = floor;

    std::vector<double> inv_scale(static_cast<std::size_t>(n_steps));
    double sum_log_scale = 0.0;
    for (int k = 0; k < n_steps; ++k) {
        double mean = 0.0;
        for (int s = 0; s < n_subj; ++s) mean += subj[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
        mean /= n_subj;
        double ss = 0.0;
        for (int s = 0; s < n_subj; ++s) {
            const double d = subj[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] - mean;
            ss += d * d;
        }
        double sd = std::sqrt(ss / (n_subj - 1));
        if (sd < floor) {
            sd = floor;
            ++rep.floored_steps;
        }
        inv_scale[static_cast<std::size_t>(k)] = 1.0 / sd;
        sum_log_scale += std::log(sd);
    }

    // Flatten subjects once; retile shuffled locations per evaluation.
    const std::size_t total = static_cast<std::size_t>(n_subj) * static_cast<std::size_t>(n_steps);
    std::vector<double> x_all(total), isc_all(total), loc_all(total);
    for (int s = 0; s < n_subj; ++s)
        for (int k = 0; k < n_steps; ++k) {
            const std::size_t at = static_cast<std::size_t>(s) * n_steps + static_cast<std::size_t>(k);
            x_all[at] = subj[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
            isc_all[at] = inv_scale[static_cast<std::size_t>(k)];
        }

    const double nu = rep.dof;
    const double inv_nu = 1.0 / nu;
    auto tail_of = [&](const std::vector<double>& locs) {
        for (int s = 0; s < n_subj; ++s)
            std::copy(locs.begin(), locs.end(), loc_all.begin() + static_cast<std::ptrdiff_t>(s) * n_steps);
        return kernels::t_tail_sum(x_all, loc_all, isc_all, inv_nu);
    };

    const double tail_model = tail_of(model_vals);
    const double t_const = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
                           0.5 * std::log(nu * std::numbers::pi);
    rep.loglik_model = static_cast<double>(n_subj) * n_steps * t_const -
                       static_cast<double>(n_subj) * sum_log_scale -
                       0.5 * (nu + 1.0) * tail_model;

    std::vector<std::size_t> perm(static_cast<std::size_t>(n_steps));
    std::vector<double> shuffled(static_cast<std::size_t>(n_steps));
    double llr_sum = 0.0, llr_sq = 0.0;
    for (int r = 0; r < opts.n_shuffles; ++r) {
        permutation(opts.seed, r, perm);
        for (int k = 0; k < n_steps; ++k)
            shuffled[static_cast<std::size_t>(k)] = model_vals[perm[static_cast<std::size_t>(k)]];
        const double llr = 0.5 * (nu + 1.0) * (tail_of(shuffled) - tail_model);
        llr_sum += llr;
        llr_sq += llr * llr;
    }
    rep.llr_mean = llr_sum / opts.n_shuffles;
    rep.llr_sd = opts.n_shuffles > 1
                     ? std::sqrt(std::max(0.0, (llr_sq - llr_sum * llr_sum / opts.n_shuffles) /
                                                   (opts.n_shuffles - 1)))
                     : 0.0;
    rep.bits_per_step = rep.llr_mean / (n_steps * std::numbers::ln2);
    rep.bayes_factor = std::exp(rep.llr_mean);
    return rep;
}

ComparisonReport compare_series(const SpeedSeries& model,
                                const std::vector<SpeedSeries>& subjects,
                                const LoglikOptions& opts) {
    if (subjects.empty()) throw SeriesError("no subject series");
    for (const auto& s : subjects)
        if (!s.terrain.empty() && !model.terrain.empty() && s.terrain != model.terrain)
            throw SeriesError("terrain mismatch: model '" + model.terrain + "' vs subject '" +
                              s.label + "' on '" + s.terrain + "'");

    // Pooled correlation/regression over all subjects.
    std::vector<double> pool_m_fl, pool_s_fl, pool_m_raw, pool_s_raw;
    for (const auto& s : subjects) {
        const Aligned fl = align(model, s, true);
        pool_m_fl.insert(pool_m_fl.end(), fl.a.begin(), fl.a.end());
        pool_s_fl.insert(pool_s_fl.end(), fl.b.begin(), fl.b.end());
        const Aligned raw = align(model, s, false);
        pool_m_raw.insert(pool_m_raw.end(), raw.a.begin(), raw.a.end());
        pool_s_raw.insert(pool_s_raw.end(), raw.b.begin(), raw.b.end());
    }
    const PearsonParts parts = pearson_raw(pool_m_fl, pool_s_fl);

    // Per-subject amplitude scaling onto the model, then the shuffled-null
    // likelihood ratio on the scaled series.
    std::vector<SpeedSeries> scaled;
    scaled.reserve(subjects.size());
    for (const auto& s : subjects) {
        const AffineFit f = fit_scale(model, s);
        SpeedSeries t = s;
        for (double& v : t.speeds) v = f.slope * v + f.intercept;
        t.si_units = model.si_units;
        scaled.push_back(std::move(t));
    }

    ComparisonReport rep = loglik_ratio(model, scaled, opts);
    rep.pearson_rho = parts.rho;
    rep.n_points = parts.n;
    rep.p_value = two_sided_p(parts.rho, parts.n);
    const int n = static_cast<int>(pool_m_raw.size());
    const double mm = kernels::sum(pool_m_raw) / n;
    const double md = kernels::sum(pool_s_raw) / n;
    double sdd = 0.0, sdm = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dd = pool_s_raw[static_cast<std::size_t>(i)] - md;
        sdd += dd * dd;
        sdm += dd * (pool_m_raw[static_cast<std::size_t>(i)] - mm);
    }
    if (sdd > 0.0) {
        rep.slope = sdm / sdd;
        rep.intercept = mm - rep.slope * md;
    }
    return rep;
}

std::vector<HorizonRow> horizon_sweep(const ModelParams& params, const TerrainProfile& terrain,
                                      std::span<const int> m_values, const SolverSettings& st) {
    const PlanResult full = solve_full_horizon(params, terrain, st);
    const SpeedSeries full_series =
        SpeedSeries::from_trajectory(full.trajectory, "full", terrain.name);

    std::vector<HorizonRow> rows;
    rows.reserve(m_values.size());
    for (int m : m_values) {
        const PlanResult r = solve_finite_horizon(params, terrain, m, st);
        const SpeedSeries s = SpeedSeries::from_trajectory(r.trajectory, "m", terrain.name);
        HorizonRow row;
        row.m = m;
        row.work_excess = r.work_excess;
        row.rho_vs_full = pearson(s, full_series).rho;
        row.converged = r.converged;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace terrainwalk
