#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "terrainwalk/plan.hpp"
#include "terrainwalk/series.hpp"

namespace terrainwalk {

enum class CorrelationMode { fluctuations, raw };

struct PearsonResult {
    double rho = 0.0;
    double p_value = 1.0;  // two-sided, t transform with n-2 dof
    int n = 0;
};

// Product-moment correlation over the index intersection of the two series
// (>= 3 common steps required). Throws SeriesError on short overlap or zero
// variance.
PearsonResult pearson(const SpeedSeries&, const SpeedSeries&,
                      CorrelationMode = CorrelationMode::fluctuations);

struct AffineFit {
    double slope = 1.0;
    double intercept = 0.0;
};

// Least-squares affine map taking `data` onto the model's amplitude:
// model ~= slope * data + intercept. Throws SeriesError when either series
// is constant.
AffineFit fit_scale(const SpeedSeries& model, const SpeedSeries& data);

struct LoglikOptions {
    int n_shuffles = 1000;
    std::uint64_t seed = 12345;
    double scale_floor_rel = 1e-6;  // times the model fluctuation RMS
};

struct ComparisonReport {
    // pooled correlation / regression over all subjects
    double pearson_rho = 0.0;
    int n_points = 0;
    double p_value = 1.0;
    double slope = 1.0;
    double intercept = 0.0;
    // shuffled-null log-likelihood ratio
    double loglik_model = 0.0;
    double llr_mean = 0.0;
    double llr_sd = 0.0;
    double bits_per_step = 0.0;
    double bayes_factor = 1.0;
    int n_steps = 0;
    int n_subjects = 0;
    double dof = 1.0;
    std::uint64_t seed = 0;
    int n_shuffles = 0;
    double scale_floor = 0.0;
    int floored_steps = 0;
};

// Per-step Student-t log likelihood of the subject series (already scaled to
// model amplitude) centered at the model prediction, scale = across-subject
// sample sd per step, dof = subjects - 1; compared against sequence-shuffled
// model predictions. Requires >= 2 subjects and >= 1 shuffle. Fills only the
// likelihood-related fields.
ComparisonReport loglik_ratio(const SpeedSeries& model,
                              const std::vector<SpeedSeries>& scaled_subjects,
                              const LoglikOptions& = {});

// Full model-vs-data comparison: pooled Pearson + regression, per-subject
// amplitude scaling, then loglik_ratio on the scaled subjects.
ComparisonReport compare_series(const SpeedSeries& model,
                                const std::vector<SpeedSeries>& subjects,
                                const LoglikOptions& = {});

struct HorizonRow {
    int m = 0;
    double work_excess = 0.0;
    double rho_vs_full = 0.0;
    bool converged = false;
};

// One finite-horizon solve per m; rho against the full-horizon mid-stance
// fluctuation profile.
std::vector<HorizonRow> horizon_sweep(const ModelParams&, const TerrainProfile&,
                                      std::span<const int> m_values,
                                      const SolverSettings& = {});

}  // namespace terrainwalk
