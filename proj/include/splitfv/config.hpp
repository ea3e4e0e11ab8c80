#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "splitfv/errors.hpp"
#include "splitfv/factory.hpp"
#include "splitfv/flux.hpp"

namespace splitfv {

enum class Mode { simulate, verify, converge };
enum class SourceKind { none, constant_rate, piecewise_linear };

/// Flat `key = value` run configuration.
struct RunConfig {
    Mode mode = Mode::simulate;
    std::optional<std::string> preset;
    std::optional<std::string> problem;
    FluxKind flux = FluxKind::godunov;
    SourceKind source_kind = SourceKind::none;
    double source_rate = 0.03;
    std::vector<std::pair<double, double>> profile_breakpoints;
    double v0 = 1.0;
    double L_m = 10.0;
    double influx_before = 2.016;
    double influx_after = 2.139;
    double jump_time = 0.0;
    std::size_t n_cells = 200;
    double t_final = 5.0;
    double cfl_number = 0.9;
    double dt_max = std::numeric_limits<double>::infinity();
    std::vector<double> snapshot_times{1.25};
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    std::size_t levels = 3;
    std::size_t quadrature = 8;

    std::set<std::string> explicit_keys;  ///< keys present in the text

    [[nodiscard]] bool has(std::string_view key) const { return explicit_keys.count(std::string(key)) > 0; }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_real(std::string_view v, int line, std::string_view key) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || p != end) {
        throw ConfigError(line, std::string(key) + ": expected a number, got '" + std::string(v) + "'");
    }
    if (std::isnan(out)) throw ConfigError(line, std::string(key) + ": NaN not allowed");
    return out;
}

inline long long parse_int(std::string_view v, int line, std::string_view key) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || p != end) {
        throw ConfigError(line, std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
    }
    return out;
}

inline std::vector<std::string_view> split_list(std::string_view v) {
    std::vector<std::string_view> out;
    while (!v.empty()) {
        const auto c = v.find(',');
        const auto item = trim(v.substr(0, c));
        if (!item.empty()) out.push_back(item);
        if (c == std::string_view::npos) break;
        v.remove_prefix(c + 1);
    }
    return out;
}

inline void require(bool ok, int line, std::string_view key, std::string_view what) {
    if (!ok) throw ConfigError(line, std::string(key) + " " + std::string(what));
}

}  // namespace detail

/// Applies one `key = value` assignment. `line` is used in error messages (0 for command-line overrides).
inline void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value, int line) {
    using detail::parse_int;
    using detail::parse_real;
    using detail::require;
    const std::string k(key);
    if (k == "mode") {
        if (value == "simulate") cfg.mode = Mode::simulate;
        else if (value == "verify") cfg.mode = Mode::verify;
        else if (value == "converge") cfg.mode = Mode::converge;
        else throw ConfigError(line, "mode: expected simulate, verify or converge");
    } else if (k == "preset") {
        require(value == "testcase1" || value == "testcase2", line, k, "must be testcase1 or testcase2");
        cfg.preset = std::string(value);
    } else if (k == "problem") {
        require(value == "advection_decay" || value == "burgers_shock" || value == "burgers_rarefaction", line, k,
                "must be advection_decay, burgers_shock or burgers_rarefaction");
        cfg.problem = std::string(value);
    } else if (k == "flux") {
        try {
            cfg.flux = parse_flux_kind(value);
        } catch (const std::exception& e) {
            throw ConfigError(line, std::string("flux: ") + e.what());
        }
    } else if (k == "source_kind") {
        if (value == "none") cfg.source_kind = SourceKind::none;
        else if (value == "constant") cfg.source_kind = SourceKind::constant_rate;
        else if (value == "piecewise") cfg.source_kind = SourceKind::piecewise_linear;
        else throw ConfigError(line, "source_kind: expected none, constant or piecewise");
    } else if (k == "source_rate") {
        cfg.source_rate = parse_real(value, line, k);
        require(cfg.source_rate >= 0.0, line, k, "must be nonnegative");
    } else if (k == "profile_breakpoints") {
        cfg.profile_breakpoints.clear();
        for (auto item : detail::split_list(value)) {
            const auto c = item.find(':');
            require(c != std::string_view::npos, line, k, "entries must look like x:rate");
            cfg.profile_breakpoints.emplace_back(parse_real(detail::trim(item.substr(0, c)), line, k),
                                                 parse_real(detail::trim(item.substr(c + 1)), line, k));
        }
        require(!cfg.profile_breakpoints.empty(), line, k, "is empty");
        try {
            (void)factory::YieldLoss::piecewise(cfg.profile_breakpoints);
        } catch (const std::exception& e) {
            throw ConfigError(line, std::string("profile_breakpoints: ") + e.what());
        }
    } else if (k == "v0") {
        cfg.v0 = parse_real(value, line, k);
        require(cfg.v0 > 0.0, line, k, "must be positive");
    } else if (k == "L_m") {
        cfg.L_m = parse_real(value, line, k);
        require(cfg.L_m > 0.0, line, k, "must be positive");
    } else if (k == "influx_before") {
        cfg.influx_before = parse_real(value, line, k);
        require(cfg.influx_before >= 0.0, line, k, "must be nonnegative");
    } else if (k == "influx_after") {
        cfg.influx_after = parse_real(value, line, k);
        require(cfg.influx_after >= 0.0, line, k, "must be nonnegative");
    } else if (k == "jump_time") {
        cfg.jump_time = parse_real(value, line, k);
    } else if (k == "n_cells") {
        const auto n = parse_int(value, line, k);
        require(n >= 2, line, k, "must be at least 2");
        cfg.n_cells = static_cast<std::size_t>(n);
    } else if (k == "t_final") {
        cfg.t_final = parse_real(value, line, k);
        require(cfg.t_final >= 0.0 && std::isfinite(cfg.t_final), line, k, "must be finite and nonnegative");
    } else if (k == "cfl_number") {
        cfg.cfl_number = parse_real(value, line, k);
        require(cfg.cfl_number > 0.0, line, k, "must be positive");
    } else if (k == "dt_max") {
        cfg.dt_max = parse_real(value, line, k);
        require(cfg.dt_max > 0.0, line, k, "must be positive");
    } else if (k == "snapshot_times") {
        cfg.snapshot_times.clear();
        for (auto item : detail::split_list(value)) {
            const double t = parse_real(item, line, k);
            require(t >= 0.0, line, k, "must be nonnegative");
            cfg.snapshot_times.push_back(t);
        }
    } else if (k == "output_dir") {
        require(!value.empty(), line, k, "is empty");
        cfg.output_dir = std::string(value);
    } else if (k == "seed") {
        const auto s = parse_int(value, line, k);
        require(s >= 0, line, k, "must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(s);
    } else if (k == "levels") {
        const auto n = parse_int(value, line, k);
        require(n >= 2 && n <= 12, line, k, "must be between 2 and 12");
        cfg.levels = static_cast<std::size_t>(n);
    } else if (k == "quadrature") {
        const auto n = parse_int(value, line, k);
        require(n >= 1, line, k, "must be positive");
        cfg.quadrature = static_cast<std::size_t>(n);
    } else {
        throw ConfigError(line, "unknown key '" + k + "'");
    }
    cfg.explicit_keys.insert(k);
}

/// Cross-key checks run after all assignments.
inline void validate(const RunConfig& cfg) {
    if (cfg.preset && cfg.problem) throw ConfigError(0, "preset and problem are mutually exclusive");
    if (cfg.mode == Mode::converge && !cfg.problem) throw ConfigError(0, "converge mode needs a problem");
    if (cfg.mode == Mode::simulate && cfg.problem) {
        throw ConfigError(0, "simulate mode runs the factory model; problem is for verify and converge");
    }
    if (cfg.source_kind == SourceKind::piecewise_linear && cfg.profile_breakpoints.empty() && !cfg.preset) {
        throw ConfigError(0, "source_kind = piecewise needs profile_breakpoints");
    }
    if (cfg.flux == FluxKind::upwind_linear && cfg.problem && *cfg.problem != "advection_decay") {
        throw ConfigError(0, "upwind flux needs a linear physical flux");
    }
}

/// Parses `key = value` lines; `#` starts a comment. Errors carry the 1-based line number.
inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        ++line_no;
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, "expected key = value");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(line_no, "missing key");
        if (cfg.has(key)) throw ConfigError(line_no, "duplicate key '" + std::string(key) + "'");
        apply_setting(cfg, key, value, line_no);
    }
    validate(cfg);
    return cfg;
}

/// Applies `key=value` overrides on top of a parsed config and re-validates.
inline void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError(0, "override '" + o + "' is not key=value");
        apply_setting(cfg, detail::trim(std::string_view(o).substr(0, eq)),
                      detail::trim(std::string_view(o).substr(eq + 1)), 0);
    }
    validate(cfg);
}

/// Lower root of rho v0 (1 - rho / L_m) = lambda: the free-flow steady density.
inline double free_flow_density(double lambda, double v0, double L_m) {
    const double disc = 1.0 - 4.0 * lambda / (v0 * L_m);
    if (disc < 0.0) throw std::domain_error("influx exceeds the line capacity v0 L_m / 4");
    return 0.5 * L_m * (1.0 - std::sqrt(disc));
}

/// The factory scenario described by a config: the preset (if any) with explicit keys layered on top.
inline factory::Scenario scenario_from(const RunConfig& cfg) {
    factory::Scenario s = cfg.preset ? factory::preset(*cfg.preset) : factory::Scenario{};
    if (!cfg.preset) {
        s.name = "custom";
        s.model.yield = factory::YieldLoss::none();
    }
    const bool model_keys = cfg.has("v0") || cfg.has("L_m") || cfg.has("influx_before");
    if (!cfg.preset || cfg.has("v0")) s.model.v0 = cfg.v0;
    if (!cfg.preset || cfg.has("L_m")) s.model.L_m = cfg.L_m;
    factory::StepInflux influx;
    influx.before = cfg.influx_before;
    influx.after = cfg.influx_after;
    influx.jump_time = cfg.jump_time;
    s.model.influx = influx;
    if (!cfg.preset || model_keys) s.initial_density = free_flow_density(influx.before, s.model.v0, s.model.L_m);

    std::optional<SourceKind> kind;
    if (cfg.has("source_kind")) kind = cfg.source_kind;
    else if (cfg.has("profile_breakpoints")) kind = SourceKind::piecewise_linear;
    else if (cfg.has("source_rate")) kind = SourceKind::constant_rate;
    else if (!cfg.preset) kind = SourceKind::none;
    if (kind) {
        switch (*kind) {
            case SourceKind::none: s.model.yield = factory::YieldLoss::none(); break;
            case SourceKind::constant_rate: s.model.yield = factory::YieldLoss::constant(cfg.source_rate); break;
            case SourceKind::piecewise_linear:
                s.model.yield = cfg.profile_breakpoints.empty() ? factory::YieldLoss::testcase2_profile()
                                                                : factory::YieldLoss::piecewise(cfg.profile_breakpoints);
                s.illustrative_data = true;
                break;
        }
    }
    return s;
}

}  // namespace splitfv
