#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "splitfv/errors.hpp"
#include "splitfv/flux.hpp"
#include "splitfv/mesh.hpp"
#include "splitfv/source.hpp"

namespace splitfv {

/// Prescribed ghost density as a function of time.
struct Dirichlet {
    std::function<double(double)> value;
};
/// Prescribed flux-density lambda(t); the ghost density is lambda / v.
struct Influx {
    std::function<double(double)> rate;
};
/// Zero-order extrapolation of the adjacent interior cell.
struct Outflow {};

struct BoundarySpec {
    std::variant<Dirichlet, Influx, Outflow> left = Outflow{};
    std::variant<Outflow, Dirichlet> right = Outflow{};

    static BoundarySpec dirichlet(double left_value, double right_value) {
        return {Dirichlet{[left_value](double) { return left_value; }},
                Dirichlet{[right_value](double) { return right_value; }}};
    }
};

inline constexpr double kJamVelocity = 1e-10;

/// Ghost densities (left, right) for the transport stage, computed from the post-source field.
inline std::pair<double, double> fill_ghosts(const CellField& field_bar, const BoundarySpec& bc, double t,
                                             std::optional<double> velocity_hint = std::nullopt) {
    double left = 0.0;
    if (const auto* d = std::get_if<Dirichlet>(&bc.left)) {
        left = d->value(t);
    } else if (const auto* in = std::get_if<Influx>(&bc.left)) {
        if (!velocity_hint || !(*velocity_hint > kJamVelocity)) {
            throw JamError("influx boundary needs a positive velocity (line is jammed)");
        }
        left = in->rate(t) / *velocity_hint;
    } else {
        left = field_bar.values.front();
    }
    double right = 0.0;
    if (const auto* d = std::get_if<Dirichlet>(&bc.right)) {
        right = d->value(t);
    } else {
        right = field_bar.values.back();
    }
    return {left, right};
}

/// One source-then-transport step: u^n -> u-bar^n -> u^{n+1}.
struct StepRecord {
    double t_before = 0.0;
    double dt = 0.0;
    CellField field_before;
    CellField field_bar;
    CellField field_after;
    double ghost_left = 0.0;
    double ghost_right = 0.0;
    NumericalFlux flux;
    int source_iterations = 0;   ///< worst cell
    std::optional<double> velocity;  ///< frozen transport speed, when the flux is velocity-driven
};

struct SourceStageResult {
    CellField field_bar;
    int max_iterations = 0;
};

/// Applies the implicit source solve cell by cell.
inline SourceStageResult source_stage(const CellField& u, double dt, const SourceDescriptor& src, double tol = 1e-12,
                                      int max_iters = 100) {
    SourceStageResult out{u, 0};
    for (std::size_t j = 0; j < u.size(); ++j) {
        const auto s = implicit_source_step(u[j], u.grid.center(static_cast<std::ptrdiff_t>(j)), u.time, dt, src, tol,
                                            max_iters);
        out.field_bar[j] = s.value;
        out.max_iterations = std::max(out.max_iterations, s.iterations);
    }
    if (!out.field_bar.all_finite()) throw NonFiniteError("source stage produced a non-finite value");
    return out;
}

/// Conservative update u_j - dt/dx [F(u_j, u_{j+1}) - F(u_{j-1}, u_j)] with one ghost per side.
/// Refuses steps that break dt * L_F / dx <= 1 on the stencil's state range.
inline CellField transport_update(const CellField& bar, double ghost_left, double ghost_right, double dt,
                                  const NumericalFlux& flux) {
    const Interval states = range_of(bar.values).hull(ghost_left).hull(ghost_right);
    const double courant = dt * flux.lipschitz_bound(states) / bar.grid.dx();
    if (courant > 1.0 + 1e-12) {
        throw CflViolation("CFL refusal: dt * L_F / dx = " + std::to_string(courant) + " exceeds 1");
    }
    const std::size_t n = bar.size();
    std::vector<double> face(n + 1);
    face[0] = flux(ghost_left, bar[0]);
    for (std::size_t j = 1; j < n; ++j) face[j] = flux(bar[j - 1], bar[j]);
    face[n] = flux(bar[n - 1], ghost_right);

    const double ratio = dt / bar.grid.dx();
    CellField out{bar.grid, std::vector<double>(n), bar.time + dt};
    for (std::size_t j = 0; j < n; ++j) out[j] = bar[j] - ratio * (face[j + 1] - face[j]);
    if (!out.all_finite()) throw NonFiniteError("transport stage produced a non-finite value");
    return out;
}

inline std::optional<double> default_velocity_hint(const NumericalFlux& flux) {
    return flux.physical().linear_speed;
}

inline StepRecord step(const CellField& field, double dt, const NumericalFlux& flux, const SourceDescriptor& src,
                       const BoundarySpec& bc, std::optional<double> velocity_hint = std::nullopt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    if (!velocity_hint) velocity_hint = default_velocity_hint(flux);
    auto stage = source_stage(field, dt, src);
    const auto [gl, gr] = fill_ghosts(stage.field_bar, bc, field.time, velocity_hint);
    auto after = transport_update(stage.field_bar, gl, gr, dt, flux);
    return StepRecord{field.time, dt, field, std::move(stage.field_bar), std::move(after), gl, gr, flux,
                      stage.max_iterations, std::nullopt};
}

/// Per-step scalar record kept by the driver.
struct StepSummary {
    std::size_t index = 0;
    double t = 0.0;  ///< time after the step
    double dt = 0.0;
    double linf = 0.0;  ///< of u^{n+1}
    double tv = 0.0;    ///< interior TV of u^{n+1}
    double linf_bar = 0.0;
    double ghost_left = 0.0;
    double ghost_right = 0.0;
    /// |u_0 - ubar_0| + |u_last - ubar_last|: source change in the two boundary cells
    double boundary_source_change = 0.0;
    int source_iterations = 0;
    bool range_exceeded = false;
};

struct RunReport {
    CellField initial;
    CellField final_field;
    std::vector<StepSummary> steps;
    std::vector<CellField> snapshots;
    std::vector<CellField> history;  ///< u^0 .. u^N when requested
    std::size_t range_exits = 0;

    [[nodiscard]] std::size_t n_steps() const noexcept { return steps.size(); }
};

struct RunOptions {
    std::vector<double> output_times;
    bool keep_history = false;
    /// CFL range is the current state range widened by this fraction of its largest magnitude.
    double range_margin = 0.1;
    std::size_t max_steps = 50'000'000;
};

using StepObserver = std::function<void(const StepRecord&)>;

namespace detail {

template <class E>
[[noreturn]] void rethrow_with_context(const E& e, std::size_t index, double t) {
    throw E("step " + std::to_string(index) + " at t=" + std::to_string(t) + ": " + e.what());
}

}  // namespace detail

/// Time loop shared by every driver.
///
/// `propose` returns the stepper's admissible dt for the current state together with the state range it assumed;
/// `advance_one` performs a step of the given size. The loop clips dt to dt_max, the next output time and t_final.
template <class Propose, class Advance>
RunReport drive(const CellField& initial, const TimeAxis& axis, const RunOptions& options,
                std::span<const StepObserver> observers, Propose&& propose, Advance&& advance_one) {
    axis.validate();
    if (axis.cfl_number > 1.0) {
        throw CflViolation("CFL refusal: cfl_number " + std::to_string(axis.cfl_number) + " exceeds 1");
    }
    if (!initial.all_finite()) throw NonFiniteError("initial field is not finite");

    std::vector<double> outputs;
    for (double t : options.output_times) {
        if (t >= initial.time && t <= axis.t_final) outputs.push_back(t);
    }
    outputs.push_back(axis.t_final);
    std::sort(outputs.begin(), outputs.end());
    outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());

    RunReport rep{initial, initial, {}, {}, {}, 0};
    if (options.keep_history) rep.history.push_back(initial);
    rep.snapshots.push_back(initial);

    CellField u = initial;
    std::size_t next_out = 0;
    while (next_out < outputs.size() && outputs[next_out] <= u.time) ++next_out;

    while (u.time < axis.t_final) {
        if (rep.steps.size() >= options.max_steps) throw SolverError("step budget exhausted");
        const std::size_t index = rep.steps.size();
        const double target = outputs[next_out];
        auto [dt_cfl, assumed] = propose(u);
        double dt = std::min({dt_cfl, axis.dt_max, target - u.time});
        bool lands = false;
        if (u.time + dt >= target - 1e-12 * std::max(1.0, std::abs(target))) {
            dt = target - u.time;
            lands = true;
        }
        if (!(dt > 0.0)) throw SolverError("non-positive time step");

        StepRecord rec = [&] {
            try {
                return advance_one(u, dt);
            } catch (const CflViolation& e) {
                detail::rethrow_with_context(e, index, u.time);
            } catch (const JamError& e) {
                detail::rethrow_with_context(e, index, u.time);
            } catch (const SourceSolveError& e) {
                detail::rethrow_with_context(e, index, u.time);
            } catch (const NonFiniteError& e) {
                detail::rethrow_with_context(e, index, u.time);
            }
        }();
        if (lands) rec.field_after.time = target;

        StepSummary s;
        s.index = index;
        s.t = rec.field_after.time;
        s.dt = dt;
        s.linf = linf_norm(rec.field_after);
        s.tv = total_variation(rec.field_after);
        s.linf_bar = linf_norm(rec.field_bar);
        s.ghost_left = rec.ghost_left;
        s.ghost_right = rec.ghost_right;
        s.boundary_source_change = std::abs(rec.field_before.values.front() - rec.field_bar.values.front()) +
                                   std::abs(rec.field_before.values.back() - rec.field_bar.values.back());
        s.source_iterations = rec.source_iterations;
        const Interval actual = range_of(rec.field_bar.values).hull(rec.ghost_left).hull(rec.ghost_right);
        s.range_exceeded = actual.lo < assumed.lo || actual.hi > assumed.hi;
        if (s.range_exceeded) ++rep.range_exits;
        rep.steps.push_back(s);

        for (const auto& obs : observers) obs(rec);

        u = std::move(rec.field_after);
        if (options.keep_history) rep.history.push_back(u);
        if (lands) {
            rep.snapshots.push_back(u);
            ++next_out;
        }
    }
    rep.final_field = u;
    return rep;
}

/// Generic driver for a fixed flux, source and boundary specification.
inline RunReport run(const CellField& initial, const NumericalFlux& flux, const SourceDescriptor& src,
                     const BoundarySpec& bc, const TimeAxis& axis, std::span<const StepObserver> observers = {},
                     const RunOptions& options = {}) {
    const auto hint = default_velocity_hint(flux);
    auto propose = [&](const CellField& u) {
        const auto [gl, gr] = fill_ghosts(u, bc, u.time, hint);
        const Interval r = range_of(u.values).hull(gl).hull(gr);
        const double margin = options.range_margin * std::max(std::abs(r.lo), std::abs(r.hi));
        const Interval assumed = r.widened(margin);
        return std::pair{max_dt(flux, assumed, u.grid.dx(), axis.cfl_number, axis.dt_max), assumed};
    };
    auto advance_one = [&](const CellField& u, double dt) { return step(u, dt, flux, src, bc, hint); };
    return drive(initial, axis, options, observers, propose, advance_one);
}

}  // namespace splitfv
