#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli_config.hpp"
#include "hinf_autopilot/hinf_autopilot.hpp"

namespace hinf_autopilot::cli {

enum ExitCode : int { kOk = 0, kConfig = 2, kInfeasible = 3, kDiverged = 4 };

[[nodiscard]] inline int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::NoStabilizingSolution:
        case ErrorCode::IndefiniteSolution:
        case ErrorCode::ClosedLoopUnstable:
        case ErrorCode::SynthesisFailed:
            return kInfeasible;
        case ErrorCode::NonFiniteDerivative:
        case ErrorCode::NonFiniteState:
            return kDiverged;
        default:
            return kConfig;
    }
}

/// Four-decimal rendering for human-readable tables.
[[nodiscard]] inline std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v == 0.0 ? 0.0 : v);
    std::string s(buf);
    return s == "-0.0000" ? "0.0000" : s;
}

[[nodiscard]] inline std::string sci4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4e", v);
    return buf;
}

/// Writes through a temporary sibling and renames, so `path` is either the
/// complete new content or untouched.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw config_error("cannot create output directory '" + path.parent_path().string() + "'");
        }
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp, ec);
            throw config_error("cannot write '" + path.string() + "'");
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw config_error("cannot move output into place at '" + path.string() + "'");
    }
}

[[nodiscard]] inline json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(row);
    }
    return rows;
}

[[nodiscard]] inline json eigs_json(const ComplexVector& v) {
    json out = json::array();
    for (const auto& l : v) {
        out.push_back({l.real(), l.imag()});
    }
    return out;
}

[[nodiscard]] inline json metrics_json(const Metrics& m) {
    json j = json::object();
    j["rms_e"] = m.rms_e;
    j["max_abs_e"] = m.max_abs_e;
    j["rms_theta_err"] = m.rms_theta_err;
    j["max_abs_delta"] = m.max_abs_delta;
    j["servo_saturation_fraction"] = m.servo_saturation_fraction;
    j["energy_ratio"] = m.energy_ratio;
    return j;
}

inline void print_row(std::ostream& out, const std::string& label, const Eigen::RowVectorXd& v) {
    out << label << " [";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out << (i > 0 ? ", " : "") << fixed4(v(i));
    }
    out << "]\n";
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline int run_synthesize(const RunConfig& cfg, const std::string& out_dir, std::ostream& out) {
    const Scenario sc = build_scenario(cfg);
    const Synthesis s = synthesize(sc.design);
    const CareProblem problem = design_problem(sc.design);

    json doc = json::object();
    doc["design_time"] = sc.design.t_design;
    doc["gamma"] = sc.design.gamma;
    doc["weighting"] = sc.design.weighting_name;
    doc["C_perf"] = matrix_json(sc.design.C_perf);
    doc["K"] = matrix_json(Matrix(s.gain.K));
    doc["X"] = matrix_json(s.solution.X);
    doc["closed_loop_eigs"] = eigs_json(s.solution.closed_loop_eigs);
    doc["state_feedback_eigs"] = eigs_json(s.solution.state_feedback_eigs);
    doc["residual"] = s.solution.residual;
    doc["residual_scale"] = care_residual_scale(problem, s.solution.X);
    doc["warnings"] = s.solution.warnings;
    const std::filesystem::path path = std::filesystem::path(out_dir) / "synthesis.json";
    write_atomic(path, doc.dump(2) + "\n");

    out << "design t = " << fixed4(sc.design.t_design) << " s, gamma = " << fixed4(sc.design.gamma)
        << ", weighting " << sc.design.weighting_name << "\n";
    print_row(out, "K =", s.gain.K);
    for (Eigen::Index i = 0; i < 3; ++i) {
        print_row(out, i == 0 ? "X =" : "   ", s.solution.X.row(i));
    }
    out << "residual = " << sci4(s.solution.residual) << "\n";
    for (const auto& w : s.solution.warnings) {
        out << "warning: " << w << "\n";
    }
    out << "wrote " << path.string() << "\n";
    return kOk;
}

inline int run_simulate(const RunConfig& cfg, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    const Scenario sc = build_scenario(cfg);
    const SimulationResult r = simulate(sc);

    std::ostringstream trace;
    csv::write_trace(trace, r.trace);
    const std::filesystem::path dir(out_dir);
    write_atomic(dir / "trace.csv", trace.str());
    write_atomic(dir / "metrics.json", metrics_json(r.metrics).dump(2) + "\n");

    out << "scenario " << sc.name << ": " << r.trace.samples.size() << " samples\n";
    out << "rms_e = " << sci4(r.metrics.rms_e) << " rad/s, max_abs_e = " << sci4(r.metrics.max_abs_e)
        << " rad/s, max_abs_delta = " << fixed4(r.metrics.max_abs_delta * kRadToDeg) << " deg\n";
    out << "wrote " << (dir / "trace.csv").string() << " and " << (dir / "metrics.json").string() << "\n";
    if (r.diverged_at) {
        err << "error: " << to_string(ErrorCode::NonFiniteState) << ": simulation diverged at t = "
            << csv::format_double(*r.diverged_at) << " s\n";
        return kDiverged;
    }
    return kOk;
}

[[nodiscard]] inline StateSpace builtin_system(const RunConfig& cfg) {
    if (cfg.system == "gyro") {
        Matrix a(2, 2);
        a << 0.0, 1.0, -kGyroNaturalFrequency * kGyroNaturalFrequency, -kGyroTwoZetaOmega;
        Matrix b(2, 1);
        b << 0.0, kGyroNaturalFrequency * kGyroNaturalFrequency;
        Matrix c(1, 2);
        c << 1.0, 0.0;
        return StateSpace{a, b, c, Matrix::Zero(1, 1)};
    }
    if (cfg.system == "servo") {
        return StateSpace{Matrix::Constant(1, 1, -1.0 / kServoTimeConstant),
                          Matrix::Constant(1, 1, 1.0 / kServoTimeConstant), Matrix::Identity(1, 1),
                          Matrix::Zero(1, 1)};
    }
    if (cfg.system == "closed-loop" || cfg.system == "closed-loop-e") {
        const Scenario sc = build_scenario(cfg);
        const Synthesis s = synthesize(sc.design);
        const PlantModel plant = assemble_pitch_plant(sc.design.coeffs);
        const Matrix acl = plant.A - plant.B * s.gain.K;
        const Matrix c = cfg.system == "closed-loop" ? sc.design.C_perf : Matrix(plant.C_meas);
        return StateSpace{acl, plant.B_w, c, Matrix::Zero(c.rows(), 2)};
    }
    throw config_error("unknown system '" + cfg.system + "' (expected gyro, servo, closed-loop or closed-loop-e)");
}

inline int run_norm(const RunConfig& cfg, std::ostream& out) {
    const double n = hinf_norm(builtin_system(cfg));
    out << "hinf_norm(" << cfg.system << ") = " << fixed4(n) << " (" << csv::format_double(n) << ")\n";
    return kOk;
}

inline int run_gamma_search(const RunConfig& cfg, std::ostream& out) {
    const Scenario sc = build_scenario(cfg);
    const CareProblem p = design_problem(sc.design);
    const GammaSearchResult r = gamma_search(p.A, p.B, p.B_w, p.C, {cfg.lower, cfg.upper}, cfg.tol);
    out << "design t = " << fixed4(sc.design.t_design) << " s, weighting " << sc.design.weighting_name << "\n";
    out << "probe gamma feasible\n";
    for (std::size_t i = 0; i < r.history.size(); ++i) {
        out << i << " " << csv::format_double(r.history[i].gamma) << " " << (r.history[i].feasible ? "yes" : "no")
            << "\n";
    }
    out << "gamma_min = " << fixed4(r.gamma_min) << " (" << csv::format_double(r.gamma_min) << ")\n";
    return kOk;
}

inline void report_design(std::ostream& out, const char* label, const DesignPoint& design, const Matrix3& paper_x,
                          const Eigen::RowVector3d& paper_k) {
    const Synthesis s = synthesize(design);
    const CareProblem problem = design_problem(design);
    out << label << ": t = " << fixed4(design.t_design) << " s, gamma = " << fixed4(design.gamma) << ", weighting "
        << design.weighting_name << "\n";
    out << "  X computed                      | X paper                         | deviation\n";
    for (Eigen::Index i = 0; i < 3; ++i) {
        std::string line = "  ";
        for (Eigen::Index j = 0; j < 3; ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%10s ", fixed4(s.solution.X(i, j)).c_str());
            line += buf;
        }
        line += "| ";
        for (Eigen::Index j = 0; j < 3; ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%10s ", fixed4(paper_x(i, j)).c_str());
            line += buf;
        }
        line += "| ";
        for (Eigen::Index j = 0; j < 3; ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%10s ", fixed4(s.solution.X(i, j) - paper_x(i, j)).c_str());
            line += buf;
        }
        out << line << "\n";
    }
    print_row(out, "  K computed ", s.gain.K);
    print_row(out, "  K paper    ", paper_k);
    print_row(out, "  K deviation", s.gain.K - paper_k);
    out << "  max |dX| = " << sci4((s.solution.X - Matrix(paper_x)).cwiseAbs().maxCoeff())
        << ", max |dK| = " << sci4((s.gain.K - paper_k).cwiseAbs().maxCoeff()) << "\n";
    out << "  Riccati residual: computed X " << sci4(s.solution.residual) << ", paper X "
        << sci4(care_residual(problem, paper_x)) << " (scale " << sci4(care_residual_scale(problem, paper_x))
        << ")\n";
}

inline int run_reproduce_paper(std::ostream& out) {
    report_design(out, "LTI design point", published_lti_design(), reference::printed_x_t60(),
                  reference::printed_k_t60());
    out << "\n";
    report_design(out, "LTV design point", published_ltv_design(), reference::printed_x_t100(),
                  reference::printed_k_t100());

    out << "\nLTV vs LTI tracking comparison (placeholder disturbances; for inspection, not a pass/fail check)\n";
    out << "  scenario    rms_e[deg/s]  max|e|[deg/s]  rms_theta_err[deg]  max|delta|[deg]  saturation\n";
    for (const Scenario& sc : {paper_ltv_scenario(), paper_lti_scenario()}) {
        const SimulationResult r = simulate(sc);
        const Metrics& m = r.metrics;
        char buf[256];
        std::snprintf(buf, sizeof(buf), "  %-10s  %12s  %13s  %18s  %15s  %10s%s\n", sc.name.c_str(),
                      fixed4(m.rms_e * kRadToDeg).c_str(), fixed4(m.max_abs_e * kRadToDeg).c_str(),
                      fixed4(m.rms_theta_err * kRadToDeg).c_str(), fixed4(m.max_abs_delta * kRadToDeg).c_str(),
                      fixed4(m.servo_saturation_fraction).c_str(), r.diverged_at ? "  (diverged)" : "");
        out << buf;
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

struct FlagValues {
    std::string config;
    std::string out;
    double gamma = 0.0;
    double design_time = 0.0;
    std::string plant_mode;
    std::string feedback;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::string scenario;
    double t0 = 0.0;
    double tf = 0.0;
    std::string system;
    double lower = 0.0;
    double upper = 0.0;
    double tol = 0.0;
};

struct Options {
    CLI::Option* config = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* gamma = nullptr;
    CLI::Option* design_time = nullptr;
    CLI::Option* plant_mode = nullptr;
    CLI::Option* feedback = nullptr;
    CLI::Option* dt = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* scenario = nullptr;
    CLI::Option* t0 = nullptr;
    CLI::Option* tf = nullptr;
    CLI::Option* system = nullptr;
    CLI::Option* lower = nullptr;
    CLI::Option* upper = nullptr;
    CLI::Option* tol = nullptr;
};

inline Options add_common_options(CLI::App& cmd, FlagValues& v) {
    Options o;
    o.config = cmd.add_option("--config", v.config, "JSON run configuration");
    o.out = cmd.add_option("--out", v.out, "Output directory (default $HINF_AUTOPILOT_OUT, else ./out)");
    o.gamma = cmd.add_option("--gamma", v.gamma, "Attenuation level gamma > 0");
    o.design_time = cmd.add_option("--design-time", v.design_time, "Design time on the schedule, s");
    o.plant_mode = cmd.add_option("--plant-mode", v.plant_mode, "Plant mode")->check(CLI::IsMember({"ltv", "lti"}));
    o.feedback = cmd.add_option("--feedback", v.feedback, "Controller rate source")
                     ->check(CLI::IsMember({"true", "gyro"}));
    o.dt = cmd.add_option("--dt", v.dt, "Integration step, s (at most 1e-3)");
    o.seed = cmd.add_option("--seed", v.seed, "Seed for noise disturbances without an explicit seed");
    o.scenario = cmd.add_option("--scenario", v.scenario, "Base scenario")
                     ->check(CLI::IsMember({"paper-ltv", "paper-lti", "zero"}));
    o.t0 = cmd.add_option("--t0", v.t0, "Simulation start, s");
    o.tf = cmd.add_option("--tf", v.tf, "Simulation end, s");
    return o;
}

inline void apply_flags(const Options& o, const FlagValues& v, RunConfig& cfg) {
    if (o.out != nullptr && o.out->count() > 0) {
        cfg.out_dir = v.out;
    }
    if (o.gamma != nullptr && o.gamma->count() > 0) {
        cfg.gamma = v.gamma;
    }
    if (o.design_time != nullptr && o.design_time->count() > 0) {
        cfg.design_time = v.design_time;
    }
    if (o.plant_mode != nullptr && o.plant_mode->count() > 0) {
        cfg.plant_mode = parse_plant_mode(v.plant_mode);
    }
    if (o.feedback != nullptr && o.feedback->count() > 0) {
        cfg.feedback = parse_feedback(v.feedback);
    }
    if (o.dt != nullptr && o.dt->count() > 0) {
        cfg.dt = v.dt;
    }
    if (o.seed != nullptr && o.seed->count() > 0) {
        cfg.seed = v.seed;
    }
    if (o.scenario != nullptr && o.scenario->count() > 0) {
        cfg.scenario = v.scenario;
    }
    if (o.t0 != nullptr && o.t0->count() > 0) {
        cfg.t0 = v.t0;
    }
    if (o.tf != nullptr && o.tf->count() > 0) {
        cfg.tf = v.tf;
    }
    if (o.system != nullptr && o.system->count() > 0) {
        cfg.system = v.system;
    }
    if (o.lower != nullptr && o.lower->count() > 0) {
        cfg.lower = v.lower;
    }
    if (o.upper != nullptr && o.upper->count() > 0) {
        cfg.upper = v.upper;
    }
    if (o.tol != nullptr && o.tol->count() > 0) {
        cfg.tol = v.tol;
    }
}

[[nodiscard]] inline std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return s;
}

/// Parses `args` (without the program name), runs the command and returns the
/// process exit status. Failures print one `error: CODE: message` line to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               const char* out_env = std::getenv(kOutEnv)) {
    CLI::App app{"H-infinity pitch autopilot: synthesis, norm computation and closed-loop simulation",
                 "hinf-autopilot"};
    app.require_subcommand(1);
    FlagValues values;

    CLI::App* synth = app.add_subcommand("synthesize", "Solve the Riccati equation at a design point, write JSON");
    CLI::App* sim = app.add_subcommand("simulate", "Run a closed-loop scenario, write trace CSV and metrics JSON");
    CLI::App* norm = app.add_subcommand("norm", "Print the H-infinity norm of a built-in system");
    CLI::App* gsearch = app.add_subcommand("gamma-search", "Bisect for the smallest feasible gamma");
    CLI::App* repro = app.add_subcommand("reproduce-paper", "Compare both published design points with this build");

    std::vector<std::pair<CLI::App*, Options>> commands;
    for (CLI::App* cmd : {synth, sim, norm, gsearch, repro}) {
        commands.emplace_back(cmd, add_common_options(*cmd, values));
    }
    Options& norm_opts = commands[2].second;
    norm_opts.system = norm->add_option("--system", values.system, "System: gyro, servo, closed-loop, closed-loop-e")
                           ->check(CLI::IsMember({"gyro", "servo", "closed-loop", "closed-loop-e"}));
    Options& search_opts = commands[3].second;
    search_opts.lower = gsearch->add_option("--lower", values.lower, "Lower end of the gamma bracket");
    search_opts.upper = gsearch->add_option("--upper", values.upper, "Upper end of the gamma bracket (feasible)");
    search_opts.tol = gsearch->add_option("--tol", values.tol, "Relative tolerance on gamma_min");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << to_string(ErrorCode::ConfigError) << ": " << one_line(e.what()) << "\n";
        return kConfig;
    }

    try {
        for (const auto& [cmd, opts] : commands) {
            if (!cmd->parsed()) {
                continue;
            }
            RunConfig cfg;
            cfg.command = cmd->get_name();
            if (cmd == repro) {
                cfg.scenario = "paper-ltv";
            }
            if (opts.config->count() > 0) {
                load_config_file(values.config, cfg);
            }
            apply_flags(opts, values, cfg);
            const std::string out_dir = resolve_out_dir(cfg, out_env);
            if (cmd == synth) {
                return run_synthesize(cfg, out_dir, out);
            }
            if (cmd == sim) {
                return run_simulate(cfg, out_dir, out, err);
            }
            if (cmd == norm) {
                return run_norm(cfg, out);
            }
            if (cmd == gsearch) {
                return run_gamma_search(cfg, out);
            }
            return run_reproduce_paper(out);
        }
    } catch (const Error& e) {
        err << "error: " << one_line(e.what()) << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << to_string(ErrorCode::ConfigError) << ": " << one_line(e.what()) << "\n";
        return kConfig;
    }
    err << "error: " << to_string(ErrorCode::ConfigError) << ": no command given\n";
    return kConfig;
}

} // namespace hinf_autopilot::cli
