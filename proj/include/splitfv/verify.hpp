#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "splitfv/diagnostics.hpp"
#include "splitfv/flux.hpp"
#include "splitfv/mesh.hpp"
#include "splitfv/source.hpp"
#include "splitfv/splitting.hpp"

namespace splitfv::verify {

/// Characteristic solution of u_t + a u_x = -c u: exp(-c t) u0(x - a t).
template <class Fn>
double exact_advection_decay(double x, double t, double a, double c, Fn&& u0) {
    return std::exp(-c * t) * u0(x - a * t);
}

/// Entropy solution of the Burgers Riemann problem (u_L, u_R) centred at x0.
struct BurgersRiemann {
    double u_left = 1.0;
    double u_right = 0.0;
    double x0 = 0.0;

    [[nodiscard]] bool is_shock() const noexcept { return u_left > u_right; }
    [[nodiscard]] double shock_speed() const noexcept { return 0.5 * (u_left + u_right); }

    [[nodiscard]] double operator()(double x, double t) const noexcept {
        if (u_left == u_right) return u_left;
        if (t <= 0.0) return x < x0 ? u_left : u_right;
        if (is_shock()) return x < x0 + shock_speed() * t ? u_left : u_right;
        if (x <= x0 + u_left * t) return u_left;
        if (x >= x0 + u_right * t) return u_right;
        return (x - x0) / t;
    }
};

inline BurgersRiemann rankine_hugoniot_shock(double u_left, double u_right, double x0) {
    return {u_left, u_right, x0};
}

/// A problem with a known exact solution on [x_min, x_max].
struct TestProblem {
    std::string name;
    PhysicalFlux flux;
    SourceDescriptor source;
    std::function<double(double)> initial;
    /// Boundary data on a given grid; typically exact-solution Dirichlet ghosts.
    std::function<BoundarySpec(const Grid1D&)> boundary;
    std::function<double(double, double)> exact;
    double t_final = 0.5;
    double x_min = 0.0;
    double x_max = 1.0;
};

/// Dirichlet ghosts taken from the exact solution at the ghost-cell centres.
inline std::function<BoundarySpec(const Grid1D&)> exact_ghosts(std::function<double(double, double)> exact) {
    return [exact](const Grid1D& g) {
        const double xl = g.center(-1);
        const double xr = g.center(static_cast<std::ptrdiff_t>(g.n_cells()));
        return BoundarySpec{Dirichlet{[exact, xl](double t) { return exact(xl, t); }},
                            Dirichlet{[exact, xr](double t) { return exact(xr, t); }}};
    };
}

/// u_t + a u_x = -c u with u0 = 2 + sin(2 pi x).
inline TestProblem advection_decay_problem(double speed = 1.0, double rate = 0.5, double t_final = 0.5) {
    auto u0 = [](double x) { return 2.0 + std::sin(2.0 * std::numbers::pi * x); };
    auto exact = [=](double x, double t) { return exact_advection_decay(x, t, speed, rate, u0); };
    return {"advection_decay", PhysicalFlux::linear(speed), SourceDescriptor::linear(-rate), u0,
            exact_ghosts(exact), exact, t_final};
}

inline TestProblem burgers_riemann_problem(std::string name, double u_left, double u_right, double x0,
                                           double t_final, SourceDescriptor source = SourceDescriptor::zero()) {
    const BurgersRiemann sol{u_left, u_right, x0};
    auto exact = [sol](double x, double t) { return sol(x, t); };
    return {std::move(name), PhysicalFlux::burgers(), std::move(source),
            [sol](double x) { return sol(x, 0.0); }, exact_ghosts(exact), exact, t_final};
}

inline TestProblem burgers_shock_problem() { return burgers_riemann_problem("burgers_shock", 1.0, 0.0, 0.25, 0.5); }
inline TestProblem burgers_rarefaction_problem() {
    return burgers_riemann_problem("burgers_rarefaction", 0.0, 1.0, 0.25, 0.5);
}

inline TestProblem problem_by_name(std::string_view name) {
    if (name == "advection_decay") return advection_decay_problem();
    if (name == "burgers_shock") return burgers_shock_problem();
    if (name == "burgers_rarefaction") return burgers_rarefaction_problem();
    throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

/// Cell averages of the exact solution at time t (64-point midpoint per cell).
inline CellField project_exact(const TestProblem& p, const Grid1D& grid, double t) {
    auto f = project_initial([&](double x) { return p.exact(x, t); }, grid, 64);
    f.time = t;
    return f;
}

/// Interface with the largest jump; returns its position.
inline double shock_position(const CellField& field) {
    std::size_t best = 0;
    double jump = -1.0;
    for (std::size_t j = 0; j + 1 < field.size(); ++j) {
        const double d = std::abs(field[j + 1] - field[j]);
        if (d > jump) {
            jump = d;
            best = j;
        }
    }
    return field.grid.left_edge(best + 1);
}

struct RefinementLevel {
    std::size_t n_cells = 0;
    double l1_error = 0.0;
    std::size_t steps = 0;
    bool diagnostics_pass = true;
    double entropy_worst = 0.0;
    double linf_margin = 0.0;
    double tv_margin = 0.0;
};

struct RefinementResult {
    std::vector<RefinementLevel> levels;
    std::vector<double> orders;  ///< log(e_l / e_{l+1}) / log(n_{l+1} / n_l)
};

inline std::vector<double> observed_orders(const std::vector<RefinementLevel>& levels) {
    std::vector<double> orders;
    for (std::size_t l = 1; l < levels.size(); ++l) {
        const double ratio = static_cast<double>(levels[l].n_cells) / static_cast<double>(levels[l - 1].n_cells);
        orders.push_back(std::log(levels[l - 1].l1_error / levels[l].l1_error) / std::log(ratio));
    }
    return orders;
}

struct LevelRun {
    RunReport report;
    CellField exact;
    RefinementLevel level;
};

/// Solves one level and runs the entropy and bound diagnostics on it.
inline LevelRun solve_level(const TestProblem& p, std::size_t n_cells, FluxKind kind = FluxKind::godunov,
                            double cfl_number = 0.9, std::size_t quadrature = 8) {
    const Grid1D grid = build_grid(p.x_min, p.x_max, n_cells);
    const CellField u0 = project_initial(p.initial, grid, quadrature);
    const Interval r = range_of(u0.values);
    const double viscosity = p.flux.lipschitz(r.widened(0.1 * std::max(std::abs(r.lo), std::abs(r.hi))));
    const NumericalFlux flux{kind, p.flux, kind == FluxKind::lax_friedrichs ? viscosity : 0.0};
    EntropyMonitor entropy{p.source, EntropyProbe::breakpoints()};
    std::vector<StepObserver> obs{[&entropy](const StepRecord& r) { entropy(r); }};
    TimeAxis axis{p.t_final};
    axis.cfl_number = cfl_number;
    RunReport rep = run(u0, flux, p.source, p.boundary(grid), axis, obs);

    LevelRun out{std::move(rep), project_exact(p, grid, p.t_final), {}};
    out.level.n_cells = n_cells;
    out.level.l1_error = l1_distance(out.report.final_field, out.exact);
    out.level.steps = out.report.n_steps();
    const auto cfg = bound_config(out.report, p.source);
    const auto linf = check_linf_bound(out.report, cfg);
    const auto tv = check_tv_bound(out.report, cfg);
    out.level.entropy_worst = entropy.per_step().empty() ? 0.0 : entropy.worst().max_residual;
    out.level.linf_margin = linf.worst_margin;
    out.level.tv_margin = tv.worst_margin;
    out.level.diagnostics_pass = entropy.pass() && linf.pass && tv.pass;
    return out;
}

/// Runs base_cells * 2^l for l = 0 .. n_levels-1 and measures the L1 error at t_final.
inline RefinementResult refinement_study(const TestProblem& p, std::size_t base_cells, std::size_t n_levels,
                                         FluxKind kind = FluxKind::godunov, double cfl_number = 0.9,
                                         std::size_t quadrature = 8) {
    if (n_levels < 2) throw std::invalid_argument("refinement_study: need at least 2 levels");
    if (!p.exact) throw std::invalid_argument("refinement_study: problem has no exact solution");
    RefinementResult out;
    for (std::size_t l = 0; l < n_levels; ++l) {
        const std::size_t n = base_cells << l;
        try {
            out.levels.push_back(solve_level(p, n, kind, cfl_number, quadrature).level);
        } catch (const std::exception& e) {
            throw SolverError("refinement level " + std::to_string(l) + " (" + std::to_string(n) +
                              " cells): " + e.what());
        }
    }
    out.orders = observed_orders(out.levels);
    return out;
}

}  // namespace splitfv::verify
