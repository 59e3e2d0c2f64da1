#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"
#include "simulator.hpp"
#include "vehicle_model.hpp"

// CSV surfaces: coefficient schedules, pitch-rate command profiles, traces.
namespace hinf_autopilot::csv {

inline constexpr std::string_view kScheduleHeader = "t,Zv,Zq,Ztheta,Zdelta,Mv,Mq,Mdelta";
inline constexpr std::string_view kProfileHeader = "t,qc_deg_per_s";
inline constexpr std::string_view kTraceHeader = "t,int_e,e,vz,theta_rad,q_rad_s,delta_rad,u_rad,w1,w2,q_meas_rad_s";

/// Shortest decimal that round-trips to the same double.
[[nodiscard]] inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) {
        throw Error(ErrorCode::InvalidArgument, "cannot format number");
    }
    return std::string(buf.data(), end);
}

namespace detail {

[[nodiscard]] inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

[[nodiscard]] inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

[[nodiscard]] inline double parse_number(std::string_view field, const std::string& where) {
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw Error(ErrorCode::ConfigError, where + ": invalid number '" + std::string(field) + "'");
    }
    return value;
}

// Rows of numbers below an exact header; blank lines are skipped.
[[nodiscard]] inline std::vector<std::vector<double>> read_table(std::istream& in, std::string_view header,
                                                                 const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    const std::size_t columns = split(header).size();
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty()) {
            continue;
        }
        const std::string where = source + ":" + std::to_string(line_no);
        if (!have_header) {
            if (view != header) {
                throw Error(ErrorCode::ConfigError, where + ": expected header '" + std::string(header) + "'");
            }
            have_header = true;
            continue;
        }
        const auto fields = split(view);
        if (fields.size() != columns) {
            throw Error(ErrorCode::ConfigError, where + ": expected " + std::to_string(columns) + " columns, got " +
                                                    std::to_string(fields.size()));
        }
        std::vector<double> row;
        row.reserve(columns);
        for (const auto f : fields) {
            row.push_back(parse_number(f, where));
        }
        rows.push_back(std::move(row));
    }
    if (!have_header) {
        throw Error(ErrorCode::ConfigError, source + ": missing header '" + std::string(header) + "'");
    }
    if (rows.empty()) {
        throw Error(ErrorCode::ConfigError, source + ": no data rows");
    }
    return rows;
}

[[nodiscard]] inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ConfigError, "cannot open '" + path + "'");
    }
    return in;
}

template <typename Fn>
[[nodiscard]] auto rethrow_as_config(const std::string& source, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) {
            throw;
        }
        throw Error(ErrorCode::ConfigError, source + ": " + e.what());
    }
}

} // namespace detail

[[nodiscard]] inline CoefficientSchedule read_schedule(std::istream& in, const std::string& source = "schedule") {
    const auto rows = detail::read_table(in, kScheduleHeader, source);
    std::vector<CoefficientSchedule::Breakpoint> bps;
    for (const auto& r : rows) {
        bps.emplace_back(r[0], DynamicCoefficients{r[1], r[2], r[3], r[4], r[5], r[6], r[7]});
    }
    return detail::rethrow_as_config(source, [&] { return CoefficientSchedule(std::move(bps)); });
}

[[nodiscard]] inline CoefficientSchedule read_schedule_file(const std::string& path) {
    auto in = detail::open_input(path);
    return read_schedule(in, path);
}

/// Command profile rows are in deg/s; the returned profile is in rad/s.
[[nodiscard]] inline CommandProfile read_profile(std::istream& in, const std::string& source = "profile") {
    const auto rows = detail::read_table(in, kProfileHeader, source);
    std::vector<CommandProfile::Breakpoint> bps;
    for (const auto& r : rows) {
        bps.emplace_back(r[0], r[1] * kDegToRad);
    }
    return detail::rethrow_as_config(source, [&] { return CommandProfile(std::move(bps)); });
}

[[nodiscard]] inline CommandProfile read_profile_file(const std::string& path) {
    auto in = detail::open_input(path);
    return read_profile(in, path);
}

inline void write_schedule(std::ostream& out, const CoefficientSchedule& schedule) {
    out << kScheduleHeader << '\n';
    for (const auto& [t, c] : schedule.breakpoints()) {
        out << format_double(t);
        for (double v : c.as_array()) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

inline void write_trace(std::ostream& out, const SimulationTrace& trace) {
    out << kTraceHeader << '\n';
    for (const auto& s : trace.samples) {
        const std::array<double, 11> row{s.t,     s.x(0),  s.x(1), s.x(2), s.theta,     s.q,
                                         s.delta, s.u,     s.w(0), s.w(1), s.q_measured};
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) {
                out << ',';
            }
            out << format_double(row[i]);
        }
        out << '\n';
    }
}

} // namespace hinf_autopilot::csv
