#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csv.hpp"
#include "trial.hpp"
#include "version.hpp"

namespace plume {

/// Resolved run description: the full configuration with every default
/// materialized, plus provenance. Loading the emitted manifest back yields
/// the identical configuration, so any run can be reproduced from its
/// manifest alone (timestamps aside).
struct Manifest {
    TrialConfig cfg;
    std::string command;
    std::string version = kVersion;
    std::string created_utc;
    std::string out_dir;
    std::vector<std::string> outputs;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view v, const std::string& where) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw ConfigError(where + ": invalid number '" + std::string(v) + "'");
    return out;
}

inline long parse_int(std::string_view v, const std::string& where) {
    long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw ConfigError(where + ": invalid integer '" + std::string(v) + "'");
    return out;
}

inline std::uint64_t parse_u64(std::string_view v, const std::string& where) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw ConfigError(where + ": invalid seed '" + std::string(v) + "'");
    return out;
}

}  // namespace detail

/// Parse the flat key-value configuration format: one `name = value` per
/// line, '#' comments, blank lines allowed. Unknown and duplicate keys are
/// rejected with the offending line number; missing keys keep their
/// defaults. Validation of the resolved configuration is the caller's call
/// (load_config performs it).
inline Manifest parse_config(std::istream& in, const std::string& source_name) {
    Manifest m;
    TrialConfig& c = m.cfg;
    std::map<std::string, int> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = detail::trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto eq = s.find('=');
        const std::string where = source_name + ":" + std::to_string(lineno);
        if (eq == std::string_view::npos)
            throw ConfigError(where + ": expected 'name = value'");
        const std::string key(detail::trim(s.substr(0, eq)));
        const std::string_view val = detail::trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (auto [it, inserted] = seen.emplace(key, lineno); !inserted)
            throw ConfigError(where + ": duplicate key '" + key + "' (first at line " +
                              std::to_string(it->second) + ")");

        if (key == "modes") c.flow.modes = static_cast<int>(detail::parse_int(val, where));
        else if (key == "peak_lengthscale") c.flow.peak_lengthscale = detail::parse_double(val, where);
        else if (key == "rms_velocity") c.flow.rms_velocity = detail::parse_double(val, where);
        else if (key == "mean_flow_x") c.flow.mean_flow.x = detail::parse_double(val, where);
        else if (key == "mean_flow_y") c.flow.mean_flow.y = detail::parse_double(val, where);
        else if (key == "correlation_time") c.flow.correlation_time = detail::parse_double(val, where);
        else if (key == "grid") c.scalar.grid = static_cast<int>(detail::parse_int(val, where));
        else if (key == "source_x") c.scalar.source.x = detail::parse_double(val, where);
        else if (key == "source_y") c.scalar.source.y = detail::parse_double(val, where);
        else if (key == "source_amplitude") c.scalar.amplitude = detail::parse_double(val, where);
        else if (key == "decay_rate") c.scalar.decay_rate = detail::parse_double(val, where);
        else if (key == "source_width_cells") c.scalar.width_cells = detail::parse_double(val, where);
        else if (key == "agents") c.swarm.n_agents = static_cast<int>(detail::parse_int(val, where));
        else if (key == "speed") c.swarm.speed = detail::parse_double(val, where);
        else if (key == "turn_rate") c.swarm.turn_rate = detail::parse_double(val, where);
        else if (key == "turn_gain") c.swarm.turn_gain = detail::parse_double(val, where);
        else if (key == "repulsion_radius") c.swarm.repulsion_radius = detail::parse_double(val, where);
        else if (key == "orientation_radius_max") c.swarm.orient_radius_max = detail::parse_double(val, where);
        else if (key == "attraction_radius_max") c.swarm.attract_radius_max = detail::parse_double(val, where);
        else if (key == "memory_timescale") c.swarm.memory_timescale = detail::parse_double(val, where);
        else if (key == "dt") c.swarm.dt = detail::parse_double(val, where);
        else if (key == "concentration_floor") c.swarm.concentration_floor = detail::parse_double(val, where);
        else if (key == "spin_up_time") c.spin_up_time = detail::parse_double(val, where);
        else if (key == "max_time") c.max_time = detail::parse_double(val, where);
        else if (key == "success_radius") c.success_radius = detail::parse_double(val, where);
        else if (key == "start_distance") c.start_distance = detail::parse_double(val, where);
        else if (key == "trials") c.n_trials = static_cast<int>(detail::parse_int(val, where));
        else if (key == "record_interval") c.record_interval = detail::parse_double(val, where);
        else if (key == "seed") c.base_seed = detail::parse_u64(val, where);
        else if (key == "command") m.command = std::string(val);
        else if (key == "version") m.version = std::string(val);
        else if (key == "created_utc") m.created_utc = std::string(val);
        else if (key == "out_dir") m.out_dir = std::string(val);
        else if (key == "outputs") {
            m.outputs.clear();
            std::string item;
            std::stringstream ss{std::string(val)};
            while (std::getline(ss, item, ','))
                if (auto t = detail::trim(item); !t.empty()) m.outputs.emplace_back(t);
        } else {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
    return m;
}

/// Parse and validate; errors carry either the line number (parse) or the
/// violated invariant (validation).
inline Manifest load_config(std::istream& in, const std::string& source_name) {
    Manifest m = parse_config(in, source_name);
    m.cfg.validate();
    return m;
}

/// Emit the manifest in the same flat format load_config reads.
inline void write_manifest(std::ostream& os, const Manifest& m) {
    const TrialConfig& c = m.cfg;
    os << "# plume run manifest; reload with --config to reproduce\n";
    if (!m.command.empty()) os << "command = " << m.command << "\n";
    os << "version = " << m.version << "\n";
    if (!m.created_utc.empty()) os << "created_utc = " << m.created_utc << "\n";
    if (!m.out_dir.empty()) os << "out_dir = " << m.out_dir << "\n";
    if (!m.outputs.empty()) {
        os << "outputs = ";
        for (std::size_t i = 0; i < m.outputs.size(); ++i)
            os << (i ? "," : "") << m.outputs[i];
        os << "\n";
    }
    os << "seed = " << c.base_seed << "\n";
    os << "modes = " << c.flow.modes << "\n";
    os << "peak_lengthscale = " << csv::fmt(c.flow.peak_lengthscale) << "\n";
    os << "rms_velocity = " << csv::fmt(c.flow.rms_velocity) << "\n";
    os << "mean_flow_x = " << csv::fmt(c.flow.mean_flow.x) << "\n";
    os << "mean_flow_y = " << csv::fmt(c.flow.mean_flow.y) << "\n";
    os << "correlation_time = " << csv::fmt(c.flow.correlation_time) << "\n";
    os << "grid = " << c.scalar.grid << "\n";
    os << "source_x = " << csv::fmt(c.scalar.source.x) << "\n";
    os << "source_y = " << csv::fmt(c.scalar.source.y) << "\n";
    os << "source_amplitude = " << csv::fmt(c.scalar.amplitude) << "\n";
    os << "decay_rate = " << csv::fmt(c.scalar.decay_rate) << "\n";
    os << "source_width_cells = " << csv::fmt(c.scalar.width_cells) << "\n";
    os << "agents = " << c.swarm.n_agents << "\n";
    os << "speed = " << csv::fmt(c.swarm.speed) << "\n";
    os << "turn_rate = " << csv::fmt(c.swarm.turn_rate) << "\n";
    os << "turn_gain = " << csv::fmt(c.swarm.turn_gain) << "\n";
    os << "repulsion_radius = " << csv::fmt(c.swarm.repulsion_radius) << "\n";
    os << "orientation_radius_max = " << csv::fmt(c.swarm.orient_radius_max) << "\n";
    os << "attraction_radius_max = " << csv::fmt(c.swarm.attract_radius_max) << "\n";
    os << "memory_timescale = " << csv::fmt(c.swarm.memory_timescale) << "\n";
    os << "dt = " << csv::fmt(c.swarm.dt) << "\n";
    os << "concentration_floor = " << csv::fmt(c.swarm.concentration_floor) << "\n";
    os << "spin_up_time = " << csv::fmt(c.spin_up_time) << "\n";
    os << "max_time = " << csv::fmt(c.max_time) << "\n";
    os << "success_radius = " << csv::fmt(c.success_radius) << "\n";
    os << "start_distance = " << csv::fmt(c.start_distance) << "\n";
    os << "trials = " << c.n_trials << "\n";
    os << "record_interval = " << csv::fmt(c.record_interval) << "\n";
}

}  // namespace plume
