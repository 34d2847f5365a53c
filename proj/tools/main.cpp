// terrainwalk: pendulum-walker push-off planning over uneven terrain.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "terrainwalk/errors.hpp"
#include "terrainwalk/plan.hpp"
#include "terrainwalk/series.hpp"
#include "terrainwalk/stats.hpp"
#include "terrainwalk/terrain.hpp"

namespace tw = terrainwalk;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitConfig = 2;
constexpr int kExitNoConverge = 3;
constexpr int kExitInfeasible = 4;

std::string fmt(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct Options {
    std::optional<double> alpha;
    std::optional<double> speed;        // m/s
    std::optional<double> step_length;  // m
    std::string policy = "fixed";       // fixed | preferred
    double leg_length = 1.0;
    double gravity = 9.81;
    std::optional<int> pad;
    std::uint64_t seed = 12345;
    std::string out;
    std::string format = "csv";  // csv | json

    std::string terrain;   // builtin name or file path
    std::string strategy = "min-energy";
    std::string reveal = "full-after-contact";
    bool window_speed_constraint = true;

    tw::SolverSettings solver;

    int m_min = 1, m_max = 0;
    std::string speeds_out;

    std::string model_file;
    std::string data_file;
    int shuffles = 1000;

    std::string canonical() const {
        std::ostringstream os;
        os << "alpha=" << (alpha ? fmt(*alpha) : "-") << ";speed=" << (speed ? fmt(*speed) : "-")
           << ";step_length=" << (step_length ? fmt(*step_length) : "-") << ";policy=" << policy
           << ";leg=" << fmt(leg_length) << ";g=" << fmt(gravity)
           << ";pad=" << (pad ? std::to_string(*pad) : "-") << ";seed=" << seed
           << ";terrain=" << terrain << ";strategy=" << strategy << ";reveal=" << reveal
           << ";wsc=" << window_speed_constraint << ";ctol=" << fmt(solver.constraint_tolerance)
           << ";otol=" << fmt(solver.optimality_tolerance) << ";maxit=" << solver.max_iterations
           << ";ub=" << fmt(solver.pushoff_upper_bound) << ";fd=" << fmt(solver.gradient_step)
           << ";m=" << m_min << ".." << m_max << ";model=" << model_file << ";data=" << data_file
           << ";shuffles=" << shuffles << ";format=" << format;
        return os.str();
    }
    std::string config_hash() const { return hex16(fnv1a(canonical())); }
    std::string provenance_comment() const {
        return std::string("# terrainwalk ") + kVersion + " config=" + config_hash();
    }
};

tw::ModelParams make_params(const Options& o) {
    const bool custom = o.speed || o.step_length || o.policy == "preferred";
    if (!custom) {
        if (o.alpha)
            return tw::ModelParams::from_alpha_pushoff(*o.alpha, 0.0342, 2.0 * std::sin(*o.alpha),
                                                       o.leg_length, o.gravity);
        tw::ModelParams p = tw::ModelParams::nominal();
        p.leg_length = o.leg_length;
        p.gravity = o.gravity;
        return p;
    }
    const double v = o.speed.value_or(1.5);
    double s_m = 0.0;
    if (o.policy == "preferred") {
        s_m = tw::preferred_step_length_m(v);
    } else {
        s_m = o.step_length.value_or(0.79);
    }
    return tw::ModelParams::from_speed_step_length(v, s_m, o.leg_length, o.gravity, o.alpha);
}

tw::TerrainProfile load_terrain(const Options& o, std::vector<std::string>& warnings) {
    if (o.terrain.empty()) throw CLI::ValidationError("--terrain", "a terrain is required");
    const auto& catalog = tw::builtin_terrains();
    if (const auto it = catalog.find(o.terrain); it != catalog.end()) {
        tw::TerrainProfile t = it->second.profile;
        if (o.pad) t.pad_before = t.pad_after = *o.pad;
        return t;
    }
    std::ifstream in(o.terrain);
    if (!in)
        throw CLI::ValidationError(
            "--terrain", "'" + o.terrain + "' is neither a built-in name nor a readable file");
    std::stringstream buf;
    buf << in.rdbuf();
    tw::ParsedTerrain parsed = tw::parse_terrain(buf.str());
    warnings.insert(warnings.end(), parsed.warnings.begin(), parsed.warnings.end());
    if (o.pad) parsed.profile.pad_before = parsed.profile.pad_after = *o.pad;
    return parsed.profile;
}

tw::PlanSpec make_spec(const Options& o) {
    tw::PlanSpec spec;
    spec.strategy = tw::strategy_from_string(o.strategy, &spec.horizon);
    spec.solver = o.solver;
    spec.window_speed_constraint = o.window_speed_constraint;
    if (o.reveal == "per-contact")
        spec.reveal = tw::RevealMode::per_contact;
    else if (o.reveal == "full-after-contact")
        spec.reveal = tw::RevealMode::full_after_contact;
    else
        throw CLI::ValidationError("--reveal", "expected per-contact|full-after-contact");
    return spec;
}

// Output stream selection: --out file (summary to stdout) or stdout (summary
// to stderr), so piped CSV stays clean.
struct Sink {
    std::ofstream file;
    std::ostream* data = nullptr;
    std::ostream* summary = nullptr;

    explicit Sink(const std::string& out) {
        if (out.empty()) {
            data = &std::cout;
            summary = &std::cerr;
        } else {
            file.open(out);
            if (!file) throw std::runtime_error("cannot open '" + out + "' for writing");
            data = &file;
            summary = &std::cout;
        }
    }
};

int cmd_simulate(const Options& o) {
    std::vector<std::string> warnings;
    const tw::ModelParams params = make_params(o);
    const tw::TerrainProfile terrain = load_terrain(o, warnings);
    const tw::PlanSpec spec = make_spec(o);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    const tw::PlanResult result = tw::plan(params, terrain, spec);
    const tw::GaitTrajectory& traj = result.trajectory;

    Sink sink(o.out);
    if (o.format == "json") {
        json steps = json::array();
        for (const auto& s : traj.steps)
            steps.push_back({{"i", s.index},
                             {"b_multiple", s.height_multiple},
                             {"delta", s.delta},
                             {"u", s.pushoff},
                             {"v_plus", s.v_post},
                             {"tau", s.step_time},
                             {"v_mid", s.v_mid},
                             {"t_mid", s.t_mid},
                             {"time_gain", s.time_gain}});
        json doc{{"provenance", {{"version", kVersion}, {"config_hash", o.config_hash()}}},
                 {"terrain", terrain.name},
                 {"strategy", tw::strategy_name(spec)},
                 {"steps", steps},
                 {"summary",
                  {{"total_work", traj.total_work},
                   {"work_excess", result.work_excess},
                   {"total_time", traj.total_time},
                   {"time_gain", -result.residual_time},
                   {"converged", result.converged}}}};
        *sink.data << doc.dump(2) << "\n";
    } else {
        *sink.data << o.provenance_comment() << "\n";
        *sink.data << "i,b_multiple,delta,u,v_plus,tau,v_mid,t_mid,time_gain\n";
        for (const auto& s : traj.steps)
            *sink.data << s.index << ',' << s.height_multiple << ',' << fmt(s.delta) << ','
                       << fmt(s.pushoff) << ',' << fmt(s.v_post) << ',' << fmt(s.step_time) << ','
                       << fmt(s.v_mid) << ',' << fmt(s.t_mid) << ',' << fmt(s.time_gain) << "\n";
    }
    *sink.summary << "terrain=" << terrain.name << " strategy=" << tw::strategy_name(spec)
                  << " steps=" << traj.steps.size() << " total_work=" << fmt(traj.total_work)
                  << " work_excess=" << fmt(result.work_excess)
                  << " total_time=" << fmt(traj.total_time)
                  << " time_gain=" << fmt(-result.residual_time)
                  << " converged=" << (result.converged ? "yes" : "no") << "\n";

    const bool optimizing = spec.strategy == tw::Strategy::min_energy_full ||
                            spec.strategy == tw::Strategy::finite_horizon ||
                            spec.strategy == tw::Strategy::reactive;
    if (optimizing && !result.converged) return kExitNoConverge;
    return 0;
}

int cmd_sweep_horizon(Options& o) {
    std::vector<std::string> warnings;
    const tw::ModelParams params = make_params(o);
    const tw::TerrainProfile terrain = load_terrain(o, warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    if (o.m_max <= 0) o.m_max = terrain.total_steps();
    if (o.m_min < 1 || o.m_max < o.m_min)
        throw CLI::ValidationError("--m-min/--m-max", "need 1 <= m-min <= m-max");
    std::vector<int> ms;
    for (int m = o.m_min; m <= o.m_max; ++m) ms.push_back(m);

    const auto rows = tw::horizon_sweep(params, terrain, ms, o.solver);

    Sink sink(o.out);
    if (o.format == "json") {
        json jrows = json::array();
        for (const auto& r : rows)
            jrows.push_back({{"m", r.m},
                             {"work_excess", r.work_excess},
                             {"rho_vs_full", r.rho_vs_full},
                             {"converged", r.converged}});
        json doc{{"provenance", {{"version", kVersion}, {"config_hash", o.config_hash()}}},
                 {"terrain", terrain.name},
                 {"rows", jrows}};
        *sink.data << doc.dump(2) << "\n";
    } else {
        *sink.data << o.provenance_comment() << "\n";
        *sink.data << "m,work_excess,rho_vs_full,converged\n";
        for (const auto& r : rows)
            *sink.data << r.m << ',' << fmt(r.work_excess) << ',' << fmt(r.rho_vs_full) << ','
                       << (r.converged ? 1 : 0) << "\n";
    }

    if (!o.speeds_out.empty()) {
        // long-format normalized mid-stance speeds for plotting
        std::ofstream sp(o.speeds_out);
        if (!sp) throw std::runtime_error("cannot open '" + o.speeds_out + "' for writing");
        sp << o.provenance_comment() << "\n";
        sp << "m,i,v_norm\n";
        for (int m : ms) {
            const auto r =
                tw::solve_finite_horizon(params, terrain, m, o.solver, o.window_speed_constraint);
            const auto s = tw::SpeedSeries::from_trajectory(r.trajectory, "m", terrain.name);
            const auto fl = s.fluctuations();
            double rms = 0.0;
            for (double f : fl) rms += f * f;
            rms = std::sqrt(rms / fl.size());
            for (std::size_t k = 0; k < fl.size(); ++k)
                sp << m << ',' << s.indices[k] << ',' << fmt(rms > 0 ? fl[k] / rms : 0.0) << "\n";
        }
    }

    bool all_ok = true;
    for (const auto& r : rows) all_ok = all_ok && r.converged;
    *sink.summary << "terrain=" << terrain.name << " m=" << o.m_min << ".." << o.m_max
                  << " rows=" << rows.size() << " all_converged=" << (all_ok ? "yes" : "no")
                  << "\n";
    return all_ok ? 0 : kExitNoConverge;
}

int cmd_compare(const Options& o) {
    if (o.data_file.empty()) throw CLI::ValidationError("--data", "a data CSV is required");

    tw::SpeedSeries model;
    if (!o.model_file.empty()) {
        tw::SeriesFile mf = tw::read_series_file(o.model_file);
        for (const auto& w : mf.warnings) std::cerr << "warning: " << w << "\n";
        if (mf.series.size() != 1)
            throw tw::SeriesError("model file must hold exactly one series, got " +
                                  std::to_string(mf.series.size()));
        model = mf.series.front();
    } else {
        std::vector<std::string> warnings;
        const tw::ModelParams params = make_params(o);
        const tw::TerrainProfile terrain = load_terrain(o, warnings);
        const tw::PlanSpec spec = make_spec(o);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        const tw::PlanResult result = tw::plan(params, terrain, spec);
        model = tw::SpeedSeries::from_trajectory(result.trajectory, "model", terrain.name);
    }

    tw::SeriesFile df = tw::read_series_file(o.data_file);
    for (const auto& w : df.warnings) std::cerr << "warning: " << w << "\n";
    if (df.series.empty()) throw tw::SeriesError("data file holds no series");

    tw::LoglikOptions lo;
    lo.n_shuffles = o.shuffles;
    lo.seed = o.seed;
    const tw::ComparisonReport rep = tw::compare_series(model, df.series, lo);

    // Fisher 95% CI for the pooled correlation
    const double z = std::atanh(rep.pearson_rho);
    const double se = 1.0 / std::sqrt(static_cast<double>(rep.n_points - 3));
    const double lo_ci = std::tanh(z - 1.959963984540054 * se);
    const double hi_ci = std::tanh(z + 1.959963984540054 * se);

    json doc{{"provenance",
              {{"version", kVersion},
               {"config_hash", o.config_hash()},
               {"seed", rep.seed},
               {"n_shuffles", rep.n_shuffles},
               {"dof", rep.dof},
               {"scale_floor", rep.scale_floor}}},
             {"terrain", model.terrain},
             {"pearson_rho", rep.pearson_rho},
             {"rho_ci95", {lo_ci, hi_ci}},
             {"n_points", rep.n_points},
             {"p_value", rep.p_value},
             {"regression", {{"slope", rep.slope}, {"intercept", rep.intercept}}},
             {"loglik_model", rep.loglik_model},
             {"llr_mean", rep.llr_mean},
             {"llr_sd", rep.llr_sd},
             {"bits_per_step", rep.bits_per_step},
             {"bayes_factor", rep.bayes_factor},
             {"n_steps", rep.n_steps},
             {"n_subjects", rep.n_subjects},
             {"floored_steps", rep.floored_steps}};

    Sink sink(o.out);
    *sink.data << doc.dump(2) << "\n";
    *sink.summary << "rho=" << fmt(rep.pearson_rho) << " ci95=[" << fmt(lo_ci) << "," << fmt(hi_ci)
                  << "]"
                  << " p=" << fmt(rep.p_value) << " bits_per_step=" << fmt(rep.bits_per_step)
                  << " n=" << rep.n_points << "\n";
    return 0;
}

int cmd_terrains(const Options& o, const std::string& action, const std::string& name) {
    const auto& catalog = tw::builtin_terrains();
    if (action == "list") {
        std::printf("name      steps  N   flag         note\n");
        for (const auto& [key, entry] : catalog)
            std::printf("%-9s %-6zu %-3d %-12s %s\n", key.c_str(),
                        entry.profile.height_multiples.size(), entry.profile.total_steps(),
                        entry.canonical ? "canonical" : "approximate", entry.note.c_str());
        return 0;
    }
    if (name.empty()) throw CLI::ValidationError("terrains", action + " needs a terrain name");
    const tw::CatalogEntry& entry = tw::builtin_terrain(name);
    if (action == "show") {
        std::cout << tw::serialize_terrain(entry.profile);
        std::cout << "# " << (entry.canonical ? "canonical" : "approximate") << ": " << entry.note
                  << "\n# N = " << entry.profile.total_steps() << ", first uneven step at i = 0\n";
        std::cout << "# padded multiples:";
        for (int m : entry.profile.padded_multiples()) std::cout << ' ' << m;
        std::cout << "\n";
        return 0;
    }
    // export
    Sink sink(o.out);
    *sink.data << tw::serialize_terrain(entry.profile);
    return 0;
}

int cmd_plot_script(const Options& o, const std::string& table, const std::string& kind) {
    Sink sink(o.out);
    std::ostream& os = *sink.data;
    os << "# gnuplot script generated by terrainwalk " << kVersion << "\n";
    os << "set datafile separator ','\n";
    os << "set key outside\n";
    os << "set grid\n";
    if (kind == "traj") {
        os << "set xlabel 'step index i'\n";
        os << "set ylabel 'mid-stance speed (sqrt(gL))'\n";
        os << "plot '" << table << "' every ::1 using 1:7 with linespoints title 'v mid', \\\n";
        os << "     '" << table << "' every ::1 using 1:4 with impulses title 'push-off'\n";
    } else {
        os << "set xlabel 'horizon m (steps)'\n";
        os << "set ylabel 'work excess (fraction)'\n";
        os << "set y2label 'correlation with full horizon'\n";
        os << "set y2tics\n";
        os << "plot '" << table << "' every ::1 using 1:2 with linespoints title 'work excess', \\\n";
        os << "     '" << table << "' every ::1 using 1:3 axes x1y2 with linespoints title 'rho'\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pendulum-walker push-off planning and analysis over uneven terrain"};
    app.set_config("--config", "", "read options from a key = value file");
    app.require_subcommand(1);

    Options o;
    app.add_option("--alpha", o.alpha, "inter-leg half-angle [rad]");
    app.add_option("--speed", o.speed, "average walking speed [m/s]");
    app.add_option("--step-length", o.step_length, "step length [m]");
    app.add_option("--policy", o.policy, "step-length policy: fixed|preferred")
        ->check(CLI::IsMember({"fixed", "preferred"}));
    app.add_option("--leg-length", o.leg_length, "leg length [m]");
    app.add_option("--gravity", o.gravity, "gravity [m/s^2]");
    app.add_option("--pad", o.pad, "override both padding counts");
    app.add_option("--seed", o.seed, "RNG seed for shuffles");
    app.add_option("--out", o.out, "output file (default: stdout)");
    app.add_option("--format", o.format, "output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--constraint-tol", o.solver.constraint_tolerance, "equality tolerance");
    app.add_option("--opt-tol", o.solver.optimality_tolerance, "optimality tolerance");
    app.add_option("--max-iterations", o.solver.max_iterations, "inner iterations per subproblem");
    app.add_option("--pushoff-bound", o.solver.pushoff_upper_bound,
                   "push-off bound as a multiple of nominal");
    app.add_option("--gradient-step", o.solver.gradient_step, "finite-difference step");

    CLI::App* sim = app.add_subcommand("simulate", "roll out one strategy over a terrain");
    sim->fallthrough();
    sim->add_option("--terrain", o.terrain, "built-in name or terrain file")->required();
    sim->add_option("--strategy", o.strategy, "nominal|tight|reactive|min-energy|horizon:<m>");
    sim->add_option("--reveal", o.reveal, "reactive mode: per-contact|full-after-contact");
    sim->add_flag("--window-speed-constraint,!--no-window-speed-constraint",
                  o.window_speed_constraint, "require nominal speed at finite-horizon window ends");

    CLI::App* sweep = app.add_subcommand("sweep-horizon", "finite-horizon sweep on one terrain");
    sweep->fallthrough();
    sweep->add_option("--terrain", o.terrain, "built-in name or terrain file")->required();
    sweep->add_option("--m-min", o.m_min, "smallest horizon");
    sweep->add_option("--m-max", o.m_max, "largest horizon (default: N)");
    sweep->add_option("--speeds-out", o.speeds_out, "also write normalized speeds (long format)");
    sweep->add_flag("--window-speed-constraint,!--no-window-speed-constraint",
                    o.window_speed_constraint,
                    "require nominal speed at finite-horizon window ends");

    CLI::App* cmp = app.add_subcommand("compare", "correlate a model run against a data CSV");
    cmp->fallthrough();
    cmp->add_option("--model", o.model_file, "model series CSV (else solve live)");
    cmp->add_option("--terrain", o.terrain, "terrain for a live solve");
    cmp->add_option("--strategy", o.strategy, "strategy for a live solve");
    cmp->add_option("--reveal", o.reveal, "reactive mode: per-contact|full-after-contact");
    cmp->add_option("--data", o.data_file, "subject series CSV")->required();
    cmp->add_option("--shuffles", o.shuffles, "number of shuffled null models");

    std::string terrains_action = "list", terrains_name;
    CLI::App* ter = app.add_subcommand("terrains", "list, show or export built-in terrains");
    ter->fallthrough();
    ter->add_option("action", terrains_action, "list|show|export")
        ->check(CLI::IsMember({"list", "show", "export"}));
    ter->add_option("name", terrains_name, "terrain name for show/export");

    std::string plot_table, plot_kind = "traj";
    CLI::App* plot = app.add_subcommand("plot-script", "emit a gnuplot script for a table");
    plot->fallthrough();
    plot->add_option("--table", plot_table, "CSV produced by simulate or sweep-horizon")
        ->required();
    plot->add_option("--kind", plot_kind, "traj|sweep")->check(CLI::IsMember({"traj", "sweep"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (sim->parsed()) return cmd_simulate(o);
        if (sweep->parsed()) return cmd_sweep_horizon(o);
        if (cmp->parsed()) return cmd_compare(o);
        if (ter->parsed()) return cmd_terrains(o, terrains_action, terrains_name);
        if (plot->parsed()) return cmd_plot_script(o, plot_table, plot_kind);
    } catch (const tw::DynamicsError& e) {
        std::cerr << "dynamics error";
        if (e.step_index()) std::cerr << " at step " << *e.step_index();
        std::cerr << ": " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const tw::PlanError& e) {
        std::cerr << "planner error: " << e.what() << "\n";
        return kExitNoConverge;
    } catch (const tw::ParseError& e) {
        std::cerr << "terrain parse error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const tw::SeriesError& e) {
        std::cerr << "series error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
