#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "splitfv/diagnostics.hpp"
#include "splitfv/errors.hpp"
#include "splitfv/flux.hpp"
#include "splitfv/mesh.hpp"
#include "splitfv/source.hpp"
#include "splitfv/splitting.hpp"

namespace splitfv::factory {

/// Yield loss y_l = rate(x) * u.
class YieldLoss {
public:
    enum class Kind { none, constant_rate, piecewise_linear };

    static YieldLoss none() { return YieldLoss{Kind::none, 0.0, {}}; }

    static YieldLoss constant(double rate) {
        if (!(rate >= 0.0)) throw std::invalid_argument("YieldLoss: rate must be nonnegative");
        return YieldLoss{Kind::constant_rate, rate, {}};
    }

    /// Breakpoints (x, rate), sorted in x, inside [0, 1]; linear in between, constant beyond the ends.
    static YieldLoss piecewise(std::vector<std::pair<double, double>> breakpoints) {
        if (breakpoints.empty()) throw std::invalid_argument("YieldLoss: no breakpoints");
        for (std::size_t i = 0; i < breakpoints.size(); ++i) {
            const auto [x, r] = breakpoints[i];
            if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("YieldLoss: breakpoint outside [0, 1]");
            if (!(r >= 0.0)) throw std::invalid_argument("YieldLoss: negative rate");
            if (i > 0 && !(x > breakpoints[i - 1].first)) throw std::invalid_argument("YieldLoss: breakpoints not sorted");
        }
        return YieldLoss{Kind::piecewise_linear, 0.0, std::move(breakpoints)};
    }

    /// Illustrative spatially varying profile used by the testcase2 preset.
    static YieldLoss testcase2_profile() { return piecewise({{0.0, 0.01}, {0.5, 0.05}, {1.0, 0.02}}); }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::vector<std::pair<double, double>>& breakpoints() const noexcept { return points_; }

    [[nodiscard]] double rate(double x) const {
        switch (kind_) {
            case Kind::none: return 0.0;
            case Kind::constant_rate: return rate_;
            case Kind::piecewise_linear: break;
        }
        if (x <= points_.front().first) return points_.front().second;
        if (x >= points_.back().first) return points_.back().second;
        auto it = std::upper_bound(points_.begin(), points_.end(), x,
                                   [](double v, const std::pair<double, double>& p) { return v < p.first; });
        const auto& [x1, r1] = *it;
        const auto& [x0, r0] = *(it - 1);
        return r0 + (r1 - r0) * (x - x0) / (x1 - x0);
    }

    [[nodiscard]] double max_rate() const {
        if (kind_ != Kind::piecewise_linear) return rate_;
        double m = 0.0;
        for (const auto& p : points_) m = std::max(m, p.second);
        return m;
    }

    /// Total variation of rate(.) over [0, 1].
    [[nodiscard]] double total_variation() const {
        if (kind_ != Kind::piecewise_linear) return 0.0;
        double tv = 0.0;
        for (std::size_t i = 1; i < points_.size(); ++i) tv += std::abs(points_[i].second - points_[i - 1].second);
        return tv;
    }

private:
    YieldLoss(Kind k, double r, std::vector<std::pair<double, double>> p) : kind_(k), rate_(r), points_(std::move(p)) {}

    Kind kind_;
    double rate_;
    std::vector<std::pair<double, double>> points_;
};

/// As a source of u_t + f_x = g: g = -rate(x) u. B(t) = TV(rate) * u_max.
inline SourceDescriptor as_source(const YieldLoss& yield, double u_max = 0.0) {
    if (yield.kind() == YieldLoss::Kind::none) return SourceDescriptor::zero();
    const double L = yield.max_rate();
    const double B = yield.total_variation() * u_max;
    return {[yield](double x, double, double u) { return -yield.rate(x) * u; }, L, 0.0, [B](double) { return B; }, L};
}

/// Step influx: `before` for t < jump_time, `after` from jump_time on.
struct StepInflux {
    double before = 2.016;
    double after = 2.139;
    double jump_time = 0.0;

    double operator()(double t) const noexcept { return t < jump_time ? before : after; }
};

struct FactoryModel {
    double v0 = 1.0;
    double L_m = 10.0;
    std::function<double(double)> influx;
    YieldLoss yield = YieldLoss::none();

    void validate() const {
        if (!(v0 > 0.0)) throw std::invalid_argument("FactoryModel: v0 must be positive");
        if (!(L_m > 0.0)) throw std::invalid_argument("FactoryModel: L_m must be positive");
        if (!influx) throw std::invalid_argument("FactoryModel: influx schedule missing");
    }
};

/// Work in progress: integral of u over the unit line.
inline double wip(const CellField& field) {
    constexpr double kTol = 1e-12;
    if (std::abs(field.grid.x_min()) > kTol || std::abs(field.grid.x_max() - 1.0) > kTol) {
        throw std::invalid_argument("wip: field domain must be [0, 1]");
    }
    double s = 0.0;
    for (double v : field.values) s += v;
    return field.grid.dx() * s;
}

inline double velocity(double wip_value, const FactoryModel& model) noexcept {
    return model.v0 * (1.0 - wip_value / model.L_m);
}

/// Outflux w = v * u(1), with u(1) read from the last cell.
inline double outflux(const CellField& field, double v) noexcept { return v * field.values.back(); }

/// Named setups. `testcase1` starts from the pre-jump steady state and applies the influx jump with 3% yield loss.
struct Scenario {
    FactoryModel model;
    double initial_density = 2.8;
    std::string name;
    bool illustrative_data = false;
};

inline Scenario testcase1() {
    return {FactoryModel{1.0, 10.0, StepInflux{}, YieldLoss::constant(0.03)}, 2.8, "testcase1", false};
}

inline Scenario testcase2() {
    return {FactoryModel{1.0, 10.0, StepInflux{}, YieldLoss::testcase2_profile()}, 2.8, "testcase2", true};
}

inline Scenario preset(std::string_view name) {
    if (name == "testcase1") return testcase1();
    if (name == "testcase2") return testcase2();
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

/// One splitting step of the factory line with velocity frozen at v(WIP(ubar)).
inline StepRecord factory_step(const FactoryModel& model, const CellField& u, double dt, FluxKind kind,
                               const SourceDescriptor& src) {
    auto stage = source_stage(u, dt, src);
    const double v = velocity(wip(stage.field_bar), model);
    if (!(v > kJamVelocity)) {
        throw JamError("factory velocity " + std::to_string(v) + " is not positive (WIP at or above L_m)");
    }
    NumericalFlux flux{kind, PhysicalFlux::linear(v), v};
    const BoundarySpec bc{Influx{model.influx}, Outflow{}};
    const auto [gl, gr] = fill_ghosts(stage.field_bar, bc, u.time, v);
    auto after = transport_update(stage.field_bar, gl, gr, dt, flux);
    return StepRecord{u.time, dt, u, std::move(stage.field_bar), std::move(after), gl, gr, std::move(flux),
                      stage.max_iterations, v};
}

/// Observables at one instant.
struct FactorySample {
    double t = 0.0;
    double wip = 0.0;
    double velocity = 0.0;
    double influx = 0.0;
    double outflux = 0.0;
    double tv = 0.0;
    double linf = 0.0;
};

inline FactorySample sample(const FactoryModel& model, const CellField& u) {
    const double w = wip(u);
    const double v = velocity(w, model);
    return {u.time, w, v, model.influx(u.time), outflux(u, v), total_variation(u), linf_norm(u)};
}

struct FactoryRun {
    RunReport report;
    std::vector<FactorySample> series;  ///< initial state, then one entry per step
    SourceDescriptor source;
};

/// Runs the factory line from `initial` to axis.t_final.
///
/// The source descriptor's B(t) is formed with u_max = ||u0||; `bound_config(run, model)` recomputes
/// ||B||_1 from the post-source maxima the run actually reached.
inline FactoryRun simulate(const FactoryModel& model, const CellField& initial, const TimeAxis& axis,
                           FluxKind kind = FluxKind::godunov, std::vector<StepObserver> observers = {},
                           const RunOptions& options = {}) {
    model.validate();
    FactoryRun out{RunReport{initial, initial, {}, {}, {}, 0}, {}, SourceDescriptor::zero()};
    out.series.push_back(sample(model, initial));

    const double u_max = linf_norm(initial);
    out.source = as_source(model.yield, u_max);

    auto propose = [&](const CellField& u) {
        const double v = velocity(wip(u), model);
        if (!(v > kJamVelocity)) throw JamError("factory line jammed: velocity " + std::to_string(v));
        const double dt = max_dt(NumericalFlux{kind, PhysicalFlux::linear(v), v}, Interval{0.0, 0.0}, u.grid.dx(),
                                 axis.cfl_number, axis.dt_max);
        const Interval r = range_of(u.values).hull(model.influx(u.time) / v);
        return std::pair{dt, r.widened(options.range_margin * std::max(std::abs(r.lo), std::abs(r.hi)))};
    };
    auto advance_one = [&](const CellField& u, double dt) { return factory_step(model, u, dt, kind, out.source); };

    observers.push_back([&](const StepRecord& rec) {
        auto s = sample(model, rec.field_after);
        out.series.push_back(s);
    });
    out.report = drive(initial, axis, options, observers, propose, advance_one);
    return out;
}

inline FactoryRun simulate(const Scenario& scenario, std::size_t n_cells, const TimeAxis& axis,
                           FluxKind kind = FluxKind::godunov, std::vector<StepObserver> observers = {},
                           const RunOptions& options = {}) {
    const CellField u0 = CellField::constant(build_grid(0.0, 1.0, n_cells), scenario.initial_density);
    return simulate(scenario.model, u0, axis, kind, std::move(observers), options);
}

/// Bound constants for a factory run: ||B||_1 = sum_n dt TV(rate) ||ubar^n||_inf.
inline BoundCheckConfig bound_config(const FactoryRun& run, const FactoryModel& model) {
    BoundCheckConfig cfg = splitfv::bound_config(run.report, run.source);
    cfg.B_l1 = 0.0;
    for (const auto& s : run.report.steps) cfg.B_l1 += s.dt * model.yield.total_variation() * s.linf_bar;
    return cfg;
}

/// Continuous steady state with constant yield rate r: u(x) = (lambda / v) exp(-r x / v) where
/// v = v0 (1 - WIP / L_m) and WIP = (lambda / r)(1 - exp(-r / v)); solved by scalar iteration.
struct ConstantYieldSteadyState {
    double velocity = 0.0;
    double wip = 0.0;
    double outflux = 0.0;
    double lambda = 0.0;
    double rate = 0.0;

    [[nodiscard]] double density(double x) const { return lambda / velocity * std::exp(-rate * x / velocity); }
};

inline ConstantYieldSteadyState constant_yield_steady_state(double lambda, double rate, double v0, double L_m,
                                                            double tol = 1e-12) {
    ConstantYieldSteadyState s{v0, 0.0, 0.0, lambda, rate};
    for (int it = 0; it < 10'000; ++it) {
        const double w = rate > 0.0 ? lambda / rate * (1.0 - std::exp(-rate / s.velocity)) : lambda / s.velocity;
        const double v_new = v0 * (1.0 - w / L_m);
        if (!(v_new > 0.0)) throw std::domain_error("steady state: no positive velocity");
        const bool done = std::abs(v_new - s.velocity) <= tol;
        s.velocity = v_new;
        s.wip = w;
        if (done) break;
    }
    s.outflux = lambda * std::exp(-rate / s.velocity);
    return s;
}

}  // namespace splitfv::factory
