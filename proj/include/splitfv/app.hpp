#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "splitfv/config.hpp"
#include "splitfv/diagnostics.hpp"
#include "splitfv/factory.hpp"
#include "splitfv/verify.hpp"

namespace splitfv {

/// %.17g: re-parsing gives back the same double.
inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Shortest round-trip representation, used in file names.
inline std::string short_real(double v) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, p) : format_real(v);
}

/// Comma-separated writer with a header row and LF line endings.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
        row_strings(header);
    }

    void row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_real(v));
        row_strings(cells);
    }

    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

inline void write_snapshot(const std::filesystem::path& dir, const CellField& u) {
    CsvWriter csv(dir / ("snapshot_" + short_real(u.time) + ".csv"), {"x", "u"});
    for (std::size_t j = 0; j < u.size(); ++j) csv.row({u.grid.center(static_cast<std::ptrdiff_t>(j)), u[j]});
}

/// Per-step entropy residual and bound margins.
inline void write_verification(const std::filesystem::path& path, const RunReport& report,
                               const EntropyMonitor& entropy, const BoundCheck& linf, const BoundCheck& tv) {
    CsvWriter csv(path, {"step", "t", "dt", "entropy_residual_max", "entropy_threshold", "linf_margin", "tv_margin"});
    for (std::size_t n = 0; n < report.steps.size(); ++n) {
        const auto& s = report.steps[n];
        const auto& e = entropy.per_step()[n];
        csv.row({static_cast<double>(s.index), s.t, s.dt, e.max_residual, e.threshold, linf.margins[n], tv.margins[n]});
    }
}

/// Collects named PASS/FAIL checks and prints them as they arrive.
class CheckList {
public:
    explicit CheckList(std::ostream& log) : log_(log) {}

    void add(const std::string& name, bool pass, const std::string& detail) {
        entries_.push_back({name, pass, detail});
        log_ << (pass ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    }

    [[nodiscard]] bool all_pass() const {
        for (const auto& e : entries_) {
            if (!e.pass) return false;
        }
        return true;
    }

    void write(const std::filesystem::path& path) const {
        CsvWriter csv(path, {"check", "pass", "detail"});
        for (const auto& e : entries_) csv.row_strings({e.name, e.pass ? "1" : "0", "\"" + e.detail + "\""});
    }

private:
    struct Entry {
        std::string name;
        bool pass;
        std::string detail;
    };
    std::ostream& log_;
    std::vector<Entry> entries_;
};

namespace detail {

inline TimeAxis axis_from(const RunConfig& cfg) {
    TimeAxis axis{cfg.t_final};
    axis.cfl_number = cfg.cfl_number;
    axis.dt_max = cfg.dt_max;
    return axis;
}

struct FactoryDiagnostics {
    factory::FactoryRun run;
    EntropyMonitor entropy;
    BoundCheck linf;
    BoundCheck tv;
};

inline FactoryDiagnostics run_factory_with_diagnostics(const RunConfig& cfg, const factory::Scenario& s) {
    const CellField u0 = CellField::constant(build_grid(0.0, 1.0, cfg.n_cells), s.initial_density);
    EntropyMonitor entropy{factory::as_source(s.model.yield, linf_norm(u0)), EntropyProbe::breakpoints()};
    RunOptions opts;
    opts.output_times = cfg.snapshot_times;
    auto run = factory::simulate(s.model, u0, axis_from(cfg), cfg.flux, {[&entropy](const StepRecord& r) { entropy(r); }},
                                 opts);
    const auto bounds = factory::bound_config(run, s.model);
    auto linf = check_linf_bound(run.report, bounds);
    auto tv = check_tv_bound(run.report, bounds);
    return {std::move(run), std::move(entropy), std::move(linf), std::move(tv)};
}

inline std::string margin_text(const BoundCheck& b) {
    return "worst margin " + format_real(b.worst_margin) + (b.extended ? " (extended)" : "");
}

}  // namespace detail

/// Factory simulation: timeseries.csv, snapshot_<t>.csv and verification.csv in cfg.output_dir.
inline int run_simulate(const RunConfig& cfg, std::ostream& log) {
    const auto scenario = scenario_from(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path dir(cfg.output_dir);
    if (scenario.illustrative_data) {
        log << "note: the piecewise yield profile is illustrative data, not a measured profile\n";
    }
    auto d = detail::run_factory_with_diagnostics(cfg, scenario);

    {
        CsvWriter csv(dir / "timeseries.csv", {"t", "wip", "velocity", "influx", "outflux", "tv", "linf"});
        for (const auto& s : d.run.series) csv.row({s.t, s.wip, s.velocity, s.influx, s.outflux, s.tv, s.linf});
    }
    for (const auto& snap : d.run.report.snapshots) write_snapshot(dir, snap);
    write_verification(dir / "verification.csv", d.run.report, d.entropy, d.linf, d.tv);
    {
        std::ofstream info(dir / "run_info.txt", std::ios::binary);
        info << "scenario = " << scenario.name << '\n'
             << "flux = " << to_string(cfg.flux) << '\n'
             << "n_cells = " << cfg.n_cells << '\n'
             << "steps = " << d.run.report.n_steps() << '\n'
             << "illustrative_profile = " << (scenario.illustrative_data ? "yes" : "no") << '\n';
    }

    const auto& last = d.run.series.back();
    log << "simulate " << scenario.name << ": " << d.run.report.n_steps() << " steps to t = " << format_real(last.t)
        << ", outflux " << format_real(last.outflux) << ", wip " << format_real(last.wip) << '\n';
    log << "entropy " << (d.entropy.pass() ? "ok" : "VIOLATED") << ", linf bound " << detail::margin_text(d.linf)
        << ", tv bound " << detail::margin_text(d.tv) << '\n';
    return 0;
}

/// Random implicit-solver checks: 1000 samples over the none, constant and piecewise yield sources with L dt <= 0.5.
inline void check_source_solver(CheckList& checks, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::vector<SourceDescriptor> sources{
        factory::as_source(factory::YieldLoss::none()), factory::as_source(factory::YieldLoss::constant(0.03), 5.0),
        factory::as_source(factory::YieldLoss::testcase2_profile(), 5.0)};
    int worst_iters = 0;
    double worst_residual = 0.0;
    double worst_linear = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto& src = sources[static_cast<std::size_t>(i % 3)];
        const double u = 10.0 * unit(rng) - 2.0;
        const double x = unit(rng);
        const double t = 50.0 * unit(rng);
        const double dt = src.lipschitz_u > 0.0 ? 0.5 * unit(rng) / src.lipschitz_u : 10.0 * unit(rng) + 1e-6;
        const auto r = implicit_source_step(u, x, t, dt, src);
        worst_iters = std::max(worst_iters, r.iterations);
        worst_residual = std::max(worst_residual, r.residual);

        const double c = (2.0 * unit(rng) - 1.0);
        const double dtl = 0.5 * unit(rng) / std::abs(c);
        const auto lin = implicit_source_step(u, x, t, dtl, SourceDescriptor::linear(c));
        worst_linear = std::max(worst_linear, std::abs(lin.value - u / (1.0 - c * dtl)));
    }
    checks.add("source solver iterations", worst_iters <= 60, "max " + std::to_string(worst_iters) + " (limit 60)");
    checks.add("source solver residual", worst_residual <= 1e-12, "max " + format_real(worst_residual));
    checks.add("source solver linear closed form", worst_linear <= 1e-12, "max error " + format_real(worst_linear));
}

inline void check_source(CheckList& checks, const std::string& name, const SourceDescriptor& src, double u_max,
                         double t_max) {
    std::vector<double> xs, ts, us;
    for (int i = 0; i <= 64; ++i) xs.push_back(i / 64.0);
    for (int i = 0; i <= 4; ++i) ts.push_back(t_max * i / 4.0);
    for (int i = 0; i <= 16; ++i) us.push_back(u_max * i / 16.0);
    const auto r = verify_source_properties(src, xs, ts, us);
    checks.add(name + " properties", r.pass(),
               "lipschitz margin " + format_real(r.lipschitz_margin) + ", tv margin " + format_real(r.tv_worst_margin) +
                   ", growth margin " + format_real(r.growth_margin));
}

inline void check_flux(CheckList& checks, FluxKind kind, const PhysicalFlux& f, const std::string& name, Interval range,
                       double viscosity) {
    const NumericalFlux flux{kind, f, viscosity};
    const auto m = check_monotone(flux, range, 41);
    double consistency = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double s = range.lo + (range.hi - range.lo) * i / 200.0;
        consistency = std::max(consistency, std::abs(flux(s, s) - f.eval(s)));
    }
    checks.add(std::string(to_string(kind)) + " flux on " + name, m.pass && consistency <= 1e-12,
               "monotonicity worst steps " + format_real(m.worst_a_step) + " / " + format_real(m.worst_b_step) +
                   ", consistency " + format_real(consistency));
}

/// Verification suite. Exit status 0 iff every check passes; report in verify_report.csv.
inline int run_verify(const RunConfig& cfg, std::ostream& log) {
    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path dir(cfg.output_dir);
    CheckList checks(log);
    check_source_solver(checks, cfg.seed);

    if (cfg.problem) {
        const auto p = verify::problem_by_name(*cfg.problem);
        check_source(checks, "source", p.source, 4.0, p.t_final);
        check_flux(checks, cfg.flux, p.flux, p.name, {-2.0, 4.0}, p.flux.lipschitz({-2.0, 4.0}));
        const auto lvl = verify::solve_level(p, cfg.n_cells, cfg.flux, cfg.cfl_number, cfg.quadrature);
        double scale = std::max(1.0, linf_norm(lvl.report.initial));
        for (const auto& st : lvl.report.steps) scale = std::max(scale, st.linf_bar);
        checks.add("entropy inequality", lvl.level.entropy_worst <= 1e-10 * scale,
                   std::to_string(lvl.report.n_steps()) + " steps, worst residual " +
                       format_real(lvl.level.entropy_worst));
        const auto bounds = bound_config(lvl.report, p.source);
        const auto linf = check_linf_bound(lvl.report, bounds);
        const auto tv = check_tv_bound(lvl.report, bounds);
        checks.add("linf bound", linf.pass, detail::margin_text(linf));
        checks.add("tv bound", tv.pass, detail::margin_text(tv));
    } else {
        const auto scenario = scenario_from(cfg);
        const double u_max = scenario.model.L_m;
        check_source(checks, "yield source", factory::as_source(scenario.model.yield, u_max), u_max, cfg.t_final);
        const PhysicalFlux transport = PhysicalFlux::linear(factory::velocity(scenario.initial_density, scenario.model));
        check_flux(checks, cfg.flux, transport, "transport", {0.0, u_max}, *transport.linear_speed);
        if (cfg.flux != FluxKind::upwind_linear) {
            check_flux(checks, cfg.flux, PhysicalFlux::burgers(), "burgers", {-2.0, 2.0}, 2.0);
        }
        try {
            auto d = detail::run_factory_with_diagnostics(cfg, scenario);
            write_verification(dir / "verification.csv", d.run.report, d.entropy, d.linf, d.tv);
            checks.add("entropy inequality", d.entropy.pass(),
                       std::to_string(d.entropy.per_step().size()) + " steps, worst residual " +
                           format_real(d.entropy.per_step().empty() ? 0.0 : d.entropy.worst().max_residual));
            checks.add("linf bound", d.linf.pass, detail::margin_text(d.linf));
            checks.add("tv bound", d.tv.pass, detail::margin_text(d.tv));
        } catch (const SolverError& e) {
            checks.add("simulation", false, e.what());
        }
    }
    checks.write(dir / "verify_report.csv");
    log << (checks.all_pass() ? "verify: all checks passed\n" : "verify: FAILED\n");
    return checks.all_pass() ? 0 : 1;
}

/// Minimum acceptable observed order for a problem.
inline double order_threshold(const std::string& problem) { return problem == "burgers_rarefaction" ? 0.6 : 0.8; }

/// Refinement study at n_cells * 2^l, l < levels; writes convergence.csv (order is empty on the first row).
inline int run_converge(const RunConfig& cfg, std::ostream& log) {
    std::filesystem::create_directories(cfg.output_dir);
    const auto p = verify::problem_by_name(*cfg.problem);
    const auto res = verify::refinement_study(p, cfg.n_cells, cfg.levels, cfg.flux, cfg.cfl_number, cfg.quadrature);
    CsvWriter csv(std::filesystem::path(cfg.output_dir) / "convergence.csv", {"n_cells", "error", "order"});
    bool ok = true;
    const double threshold = order_threshold(p.name);
    for (std::size_t l = 0; l < res.levels.size(); ++l) {
        const auto& lv = res.levels[l];
        std::vector<std::string> row{std::to_string(lv.n_cells), format_real(lv.l1_error), ""};
        if (l > 0) {
            row[2] = format_real(res.orders[l - 1]);
            if (!(res.orders[l - 1] >= threshold)) ok = false;
        }
        if (!lv.diagnostics_pass) ok = false;
        csv.row_strings(row);
        log << lv.n_cells << " cells: L1 error " << format_real(lv.l1_error)
            << (l > 0 ? ", order " + format_real(res.orders[l - 1]) : std::string()) << ", diagnostics "
            << (lv.diagnostics_pass ? "ok" : "FAILED") << '\n';
    }
    log << (ok ? "converge: PASS" : "converge: FAIL") << " (order threshold " << format_real(threshold) << ")\n";
    return ok ? 0 : 1;
}

inline int run_mode(const RunConfig& cfg, std::ostream& log) {
    switch (cfg.mode) {
        case Mode::simulate: return run_simulate(cfg, log);
        case Mode::verify: return run_verify(cfg, log);
        case Mode::converge: return run_converge(cfg, log);
    }
    return 2;
}

}  // namespace splitfv
