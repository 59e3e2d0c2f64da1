#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hinf_autopilot/hinf_autopilot.hpp"

// Run configuration: a JSON file plus command-line overrides (flags win).
// Angles are degrees at this boundary and radians everywhere inside.
namespace hinf_autopilot::cli {

using json = nlohmann::json;

inline constexpr const char* kOutEnv = "HINF_AUTOPILOT_OUT";
inline constexpr const char* kDefaultOutDir = "out";

struct RunConfig {
    std::string command;
    std::string scenario = "paper-ltv";
    std::optional<std::string> schedule_csv;
    std::optional<std::string> profile_csv;
    std::optional<double> design_time;
    std::optional<double> gamma;
    std::optional<std::string> weighting_name;
    std::optional<Matrix> weighting;
    std::optional<double> t0;
    std::optional<double> tf;
    std::optional<double> dt;
    std::optional<PlantMode> plant_mode;
    std::optional<FeedbackSource> feedback;
    std::optional<bool> servo_enabled;
    std::optional<double> servo_rate_limit_deg_s;
    std::optional<Vector3> initial_state; // internal units
    std::optional<DisturbanceSpec> disturbances;
    std::vector<std::pair<std::size_t, std::size_t>> unseeded_noise; // (channel, index) drawing from `seed`
    std::uint64_t seed = 0;
    std::optional<std::string> out_dir;
    std::string system = "gyro";
    double lower = 0.1;
    double upper = 100.0;
    double tol = 1e-4;
};

[[nodiscard]] inline Error config_error(const std::string& msg) { return Error(ErrorCode::ConfigError, msg); }

[[nodiscard]] inline PlantMode parse_plant_mode(const std::string& s) {
    if (s == "ltv") {
        return PlantMode::Ltv;
    }
    if (s == "lti") {
        return PlantMode::LtiFrozen;
    }
    throw config_error("plant mode must be 'ltv' or 'lti', got '" + s + "'");
}

[[nodiscard]] inline FeedbackSource parse_feedback(const std::string& s) {
    if (s == "true") {
        return FeedbackSource::TrueState;
    }
    if (s == "gyro") {
        return FeedbackSource::GyroRate;
    }
    throw config_error("feedback must be 'true' or 'gyro', got '" + s + "'");
}

namespace config_detail {

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw config_error(where + " must be an object");
    }
    for (const auto& [key, value] : obj.items()) {
        if (allowed.count(key) == 0) {
            throw config_error(where + ": unknown key '" + key + "'");
        }
    }
}

[[nodiscard]] inline double number(const json& v, const std::string& where) {
    if (!v.is_number()) {
        throw config_error(where + " must be a number");
    }
    return v.get<double>();
}

[[nodiscard]] inline double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
    return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

[[nodiscard]] inline std::string string(const json& v, const std::string& where) {
    if (!v.is_string()) {
        throw config_error(where + " must be a string");
    }
    return v.get<std::string>();
}

[[nodiscard]] inline Matrix matrix(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty() || !v.front().is_array()) {
        throw config_error(where + " must be a non-empty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(v.size());
    const auto cols = static_cast<Eigen::Index>(v.front().size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = v.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw config_error(where + ": rows must have equal length");
        }
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = number(row.at(static_cast<std::size_t>(j)), where);
        }
    }
    return m;
}

[[nodiscard]] inline std::string resolve_path(const std::string& path, const std::filesystem::path& base) {
    const std::filesystem::path p(path);
    return p.is_absolute() ? path : (base / p).string();
}

inline void parse_primitives(const json& list, std::size_t channel, RunConfig& cfg, DisturbanceSpec& spec) {
    const std::string where = "disturbances.w" + std::to_string(channel + 1);
    if (!list.is_array()) {
        throw config_error(where + " must be an array");
    }
    for (const auto& item : list) {
        if (!item.is_object() || !item.contains("type")) {
            throw config_error(where + ": each entry needs a 'type'");
        }
        const std::string type = string(item.at("type"), where + ".type");
        if (type == "step") {
            reject_unknown_keys(item, {"type", "t0", "amplitude"}, where);
            spec.channels[channel].push_back(
                StepSignal{number_or(item, "t0", 0.0, where), number_or(item, "amplitude", 0.0, where)});
        } else if (type == "sine") {
            reject_unknown_keys(item, {"type", "amplitude", "frequency_rad_s", "phase_deg"}, where);
            spec.channels[channel].push_back(SineSignal{number_or(item, "amplitude", 0.0, where),
                                                        number_or(item, "frequency_rad_s", 0.0, where),
                                                        number_or(item, "phase_deg", 0.0, where) * kDegToRad});
        } else if (type == "ramp") {
            reject_unknown_keys(item, {"type", "t0", "slope"}, where);
            spec.channels[channel].push_back(
                RampSignal{number_or(item, "t0", 0.0, where), number_or(item, "slope", 0.0, where)});
        } else if (type == "noise") {
            reject_unknown_keys(item, {"type", "amplitude", "seed"}, where);
            NoiseSignal n{number_or(item, "amplitude", 0.0, where), 0};
            if (item.contains("seed")) {
                if (!item.at("seed").is_number_unsigned()) {
                    throw config_error(where + ".seed must be a non-negative integer");
                }
                n.seed = item.at("seed").get<std::uint64_t>();
            } else {
                cfg.unseeded_noise.emplace_back(channel, spec.channels[channel].size());
            }
            spec.channels[channel].push_back(n);
        } else {
            throw config_error(where + ": unknown disturbance type '" + type + "'");
        }
    }
}

} // namespace config_detail

/// Merges a JSON document into `cfg`. Relative CSV paths resolve against `base_dir`.
inline void apply_json(const json& doc, RunConfig& cfg, const std::filesystem::path& base_dir) {
    using namespace config_detail;
    reject_unknown_keys(doc,
                        {"scenario", "schedule_csv", "profile_csv", "design", "t_span", "dt", "plant_mode", "feedback",
                         "servo", "initial_state", "disturbances", "seed", "out", "system", "bracket", "tol"},
                        "config");
    if (doc.contains("scenario")) {
        cfg.scenario = string(doc.at("scenario"), "scenario");
    }
    if (doc.contains("schedule_csv")) {
        cfg.schedule_csv = resolve_path(string(doc.at("schedule_csv"), "schedule_csv"), base_dir);
    }
    if (doc.contains("profile_csv")) {
        cfg.profile_csv = resolve_path(string(doc.at("profile_csv"), "profile_csv"), base_dir);
    }
    if (doc.contains("design")) {
        const json& d = doc.at("design");
        reject_unknown_keys(d, {"time", "gamma", "weighting"}, "design");
        if (d.contains("time")) {
            cfg.design_time = number(d.at("time"), "design.time");
        }
        if (d.contains("gamma")) {
            cfg.gamma = number(d.at("gamma"), "design.gamma");
        }
        if (d.contains("weighting")) {
            const json& w = d.at("weighting");
            if (w.is_string()) {
                cfg.weighting_name = w.get<std::string>();
                cfg.weighting.reset();
            } else {
                cfg.weighting = matrix(w, "design.weighting");
                cfg.weighting_name = "custom";
            }
        }
    }
    if (doc.contains("t_span")) {
        const json& span = doc.at("t_span");
        if (!span.is_array() || span.size() != 2) {
            throw config_error("t_span must be [t0, tf]");
        }
        cfg.t0 = number(span.at(0), "t_span[0]");
        cfg.tf = number(span.at(1), "t_span[1]");
    }
    if (doc.contains("dt")) {
        cfg.dt = number(doc.at("dt"), "dt");
    }
    if (doc.contains("plant_mode")) {
        cfg.plant_mode = parse_plant_mode(string(doc.at("plant_mode"), "plant_mode"));
    }
    if (doc.contains("feedback")) {
        cfg.feedback = parse_feedback(string(doc.at("feedback"), "feedback"));
    }
    if (doc.contains("servo")) {
        const json& s = doc.at("servo");
        reject_unknown_keys(s, {"enabled", "rate_limit_deg_s"}, "servo");
        if (s.contains("enabled")) {
            if (!s.at("enabled").is_boolean()) {
                throw config_error("servo.enabled must be a boolean");
            }
            cfg.servo_enabled = s.at("enabled").get<bool>();
        }
        if (s.contains("rate_limit_deg_s")) {
            cfg.servo_rate_limit_deg_s = number(s.at("rate_limit_deg_s"), "servo.rate_limit_deg_s");
        }
    }
    if (doc.contains("initial_state")) {
        const json& x = doc.at("initial_state");
        reject_unknown_keys(x, {"int_e_deg", "e_deg_s", "vz"}, "initial_state");
        cfg.initial_state = Vector3(number_or(x, "int_e_deg", 0.0, "initial_state") * kDegToRad,
                                    number_or(x, "e_deg_s", 0.0, "initial_state") * kDegToRad,
                                    number_or(x, "vz", 0.0, "initial_state"));
    }
    if (doc.contains("disturbances")) {
        const json& d = doc.at("disturbances");
        reject_unknown_keys(d, {"w1", "w2"}, "disturbances");
        DisturbanceSpec spec;
        cfg.unseeded_noise.clear();
        if (d.contains("w1")) {
            parse_primitives(d.at("w1"), 0, cfg, spec);
        }
        if (d.contains("w2")) {
            parse_primitives(d.at("w2"), 1, cfg, spec);
        }
        cfg.disturbances = std::move(spec);
    }
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned()) {
            throw config_error("seed must be a non-negative integer");
        }
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("out")) {
        cfg.out_dir = resolve_path(string(doc.at("out"), "out"), base_dir);
    }
    if (doc.contains("system")) {
        cfg.system = string(doc.at("system"), "system");
    }
    if (doc.contains("bracket")) {
        const json& b = doc.at("bracket");
        if (!b.is_array() || b.size() != 2) {
            throw config_error("bracket must be [lower, upper]");
        }
        cfg.lower = number(b.at(0), "bracket[0]");
        cfg.upper = number(b.at(1), "bracket[1]");
    }
    if (doc.contains("tol")) {
        cfg.tol = number(doc.at("tol"), "tol");
    }
}

inline void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) {
        throw config_error("cannot open config '" + path + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw config_error(path + ": " + e.what());
    }
    apply_json(doc, cfg, std::filesystem::path(path).parent_path());
}

[[nodiscard]] inline Scenario base_scenario(const std::string& name) {
    if (name == "paper-ltv") {
        return paper_ltv_scenario();
    }
    if (name == "paper-lti") {
        return paper_lti_scenario();
    }
    if (name == "zero") {
        return zero_scenario();
    }
    throw config_error("unknown scenario '" + name + "' (expected paper-ltv, paper-lti or zero)");
}

[[nodiscard]] inline Matrix named_weighting(const std::string& name, double t_design) {
    if (name == kPaperCalibrated) {
        return paper_calibrated_weighting(t_design);
    }
    if (name == "identity") {
        return Matrix::Identity(3, 3);
    }
    if (name == "rate") {
        return Matrix(Eigen::RowVector3d(0.0, 1.0, 0.0));
    }
    throw config_error("unknown weighting '" + name + "' (expected paper-calibrated, identity, rate or a matrix)");
}

/// Scenario after defaults, the JSON document and the flags have been merged.
[[nodiscard]] inline Scenario build_scenario(const RunConfig& cfg) {
    Scenario sc = base_scenario(cfg.scenario);
    try {
        if (cfg.schedule_csv) {
            sc.schedule = csv::read_schedule_file(*cfg.schedule_csv);
        }
        if (cfg.profile_csv) {
            sc.profile = csv::read_profile_file(*cfg.profile_csv);
        }
        if (cfg.schedule_csv || cfg.design_time || cfg.gamma || cfg.weighting_name) {
            DesignPoint d = sc.design;
            d.t_design = cfg.design_time.value_or(d.t_design);
            d.gamma = cfg.gamma.value_or(d.gamma);
            if (!(d.gamma > 0.0)) {
                throw config_error("gamma must be positive");
            }
            d.coeffs = coefficients_at(sc.schedule, d.t_design);
            if (cfg.weighting) {
                d.C_perf = *cfg.weighting;
                d.weighting_name = "custom";
            } else {
                d.weighting_name = cfg.weighting_name.value_or(d.weighting_name);
                d.C_perf = named_weighting(d.weighting_name, d.t_design);
            }
            sc.design = std::move(d);
        }
        sc.t0 = cfg.t0.value_or(sc.t0);
        sc.tf = cfg.tf.value_or(sc.tf);
        sc.dt = cfg.dt.value_or(sc.dt);
        sc.plant_mode = cfg.plant_mode.value_or(sc.plant_mode);
        sc.feedback_source = cfg.feedback.value_or(sc.feedback_source);
        sc.servo_enabled = cfg.servo_enabled.value_or(sc.servo_enabled);
        if (cfg.servo_rate_limit_deg_s) {
            sc.servo_rate_limit = *cfg.servo_rate_limit_deg_s * kDegToRad;
        }
        sc.initial_state = cfg.initial_state.value_or(sc.initial_state);
        if (cfg.disturbances) {
            sc.disturbances = *cfg.disturbances;
            std::uint64_t k = 0;
            for (const auto& [ch, idx] : cfg.unseeded_noise) {
                std::get<NoiseSignal>(sc.disturbances.channels[ch][idx]).seed = cfg.seed + k++;
            }
        }
        if (sc.design.C_perf.cols() != 3) {
            throw config_error("weighting must have 3 columns");
        }
        sc.validate();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) {
            throw;
        }
        throw config_error(e.what());
    }
    return sc;
}

[[nodiscard]] inline std::string resolve_out_dir(const RunConfig& cfg, const char* env_value) {
    if (cfg.out_dir) {
        return *cfg.out_dir;
    }
    if (env_value != nullptr && *env_value != '\0') {
        return env_value;
    }
    return kDefaultOutDir;
}

} // namespace hinf_autopilot::cli
