#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "splitfv/mesh.hpp"

namespace splitfv {

/// Closed interval [lo, hi] of states.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] bool contains(double u) const noexcept { return u >= lo && u <= hi; }
    [[nodiscard]] Interval widened(double margin) const noexcept { return {lo - margin, hi + margin}; }
    [[nodiscard]] Interval hull(double u) const noexcept { return {std::min(lo, u), std::max(hi, u)}; }
};

inline Interval range_of(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("range_of: empty sequence");
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return {*lo, *hi};
}

/// Physical flux f with optional derivative and metadata used by the numerical fluxes.
///
/// `linear_speed` marks f(u) = c*u; `stationary_points` lists every zero of f' when known.
/// Without either, stationary points are located numerically.
struct PhysicalFlux {
    std::function<double(double)> eval;
    std::function<double(double)> deriv;
    std::function<double(Interval)> lipschitz_on;
    std::optional<double> linear_speed;
    std::optional<std::vector<double>> stationary_points;

    double operator()(double u) const { return eval(u); }

    [[nodiscard]] double derivative(double u) const {
        if (deriv) return deriv(u);
        const double h = 1e-6 * std::max(1.0, std::abs(u));
        return (eval(u + h) - eval(u - h)) / (2.0 * h);
    }

    /// Upper bound of |f'| on the interval.
    [[nodiscard]] double lipschitz(Interval r) const {
        if (lipschitz_on) return lipschitz_on(r);
        constexpr int kSamples = 256;
        double m = 0.0;
        for (int i = 0; i <= kSamples; ++i) {
            const double u = r.lo + (r.hi - r.lo) * static_cast<double>(i) / kSamples;
            m = std::max(m, std::abs(derivative(u)));
        }
        return m;
    }

    /// Zeros of f' strictly inside (lo, hi).
    [[nodiscard]] std::vector<double> stationary_in(double lo, double hi) const {
        std::vector<double> out;
        if (linear_speed || !(hi > lo)) return out;
        if (stationary_points) {
            for (double p : *stationary_points) {
                if (p > lo && p < hi) out.push_back(p);
            }
            return out;
        }
        // 64-interval pre-scan of f', then bisection on each sign change.
        constexpr int kScan = 64;
        double prev_u = lo;
        double prev_d = derivative(lo);
        for (int i = 1; i <= kScan; ++i) {
            const double u = lo + (hi - lo) * static_cast<double>(i) / kScan;
            const double d = derivative(u);
            if (d == 0.0 && i < kScan) {
                out.push_back(u);
            } else if ((prev_d < 0.0 && d > 0.0) || (prev_d > 0.0 && d < 0.0)) {
                auto tol = boost::math::tools::eps_tolerance<double>(50);
                auto [a, b] = boost::math::tools::bisect([this](double w) { return derivative(w); }, prev_u, u, tol);
                out.push_back(0.5 * (a + b));
            }
            prev_u = u;
            prev_d = d;
        }
        return out;
    }

    static PhysicalFlux linear(double c) {
        PhysicalFlux f;
        f.eval = [c](double u) { return c * u; };
        f.deriv = [c](double) { return c; };
        f.lipschitz_on = [c](Interval) { return std::abs(c); };
        f.linear_speed = c;
        return f;
    }

    static PhysicalFlux zero() { return linear(0.0); }

    /// Burgers flux u^2/2.
    static PhysicalFlux burgers() {
        PhysicalFlux f;
        f.eval = [](double u) { return 0.5 * u * u; };
        f.deriv = [](double u) { return u; };
        f.lipschitz_on = [](Interval r) { return std::max(std::abs(r.lo), std::abs(r.hi)); };
        f.stationary_points = std::vector<double>{0.0};
        return f;
    }

    /// Generic smooth flux; derivative is finite-differenced when not supplied.
    static PhysicalFlux from(std::function<double(double)> fn, std::function<double(double)> d = {}) {
        PhysicalFlux f;
        f.eval = std::move(fn);
        f.deriv = std::move(d);
        return f;
    }
};

enum class FluxKind { upwind_linear, lax_friedrichs, godunov, engquist_osher };

inline std::string_view to_string(FluxKind k) noexcept {
    switch (k) {
        case FluxKind::upwind_linear: return "upwind";
        case FluxKind::lax_friedrichs: return "lax-friedrichs";
        case FluxKind::godunov: return "godunov";
        case FluxKind::engquist_osher: return "engquist-osher";
    }
    return "?";
}

inline FluxKind parse_flux_kind(std::string_view s) {
    if (s == "upwind" || s == "upwind-linear") return FluxKind::upwind_linear;
    if (s == "lax-friedrichs" || s == "lf") return FluxKind::lax_friedrichs;
    if (s == "godunov") return FluxKind::godunov;
    if (s == "engquist-osher" || s == "eo") return FluxKind::engquist_osher;
    throw std::invalid_argument("unknown flux kind '" + std::string(s) + "'");
}

/// Two-point numerical flux F(a, b) built on a physical flux.
class NumericalFlux {
public:
    NumericalFlux(FluxKind kind, PhysicalFlux physical, double viscosity = 0.0)
        : kind_(kind), physical_(std::move(physical)), viscosity_(viscosity) {
        if (!physical_.eval) throw std::invalid_argument("NumericalFlux: physical flux has no evaluator");
        if (kind_ == FluxKind::upwind_linear && !physical_.linear_speed) {
            throw std::invalid_argument("NumericalFlux: upwind flux requires a linear physical flux");
        }
        if (!(viscosity_ >= 0.0)) throw std::invalid_argument("NumericalFlux: viscosity must be nonnegative");
    }

    [[nodiscard]] FluxKind kind() const noexcept { return kind_; }
    [[nodiscard]] const PhysicalFlux& physical() const noexcept { return physical_; }
    [[nodiscard]] double viscosity() const noexcept { return viscosity_; }

    double operator()(double a, double b) const {
        if (!std::isfinite(a) || !std::isfinite(b)) throw std::domain_error("NumericalFlux: non-finite argument");
        switch (kind_) {
            case FluxKind::upwind_linear: return *physical_.linear_speed >= 0.0 ? physical_(a) : physical_(b);
            case FluxKind::lax_friedrichs: return 0.5 * (physical_(a) + physical_(b)) - 0.5 * viscosity_ * (b - a);
            case FluxKind::godunov: return godunov(a, b);
            case FluxKind::engquist_osher: return engquist_osher(a, b);
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    /// Sum of the one-sided Lipschitz bounds of F over states in r.
    [[nodiscard]] double lipschitz_bound(Interval r) const {
        const double speed = physical_.lipschitz(r);
        return kind_ == FluxKind::lax_friedrichs ? std::max(speed, viscosity_) : speed;
    }

private:
    double godunov(double a, double b) const {
        const double lo = std::min(a, b);
        const double hi = std::max(a, b);
        double best = physical_(a);
        const auto pick = [&](double v) { best = a <= b ? std::min(best, v) : std::max(best, v); };
        pick(physical_(b));
        for (double p : physical_.stationary_in(lo, hi)) pick(physical_(p));
        return best;
    }

    // Oriented integral of max(f',0) (positive=true) or min(f',0) over [0, x].
    double eo_part(double x, bool positive) const {
        if (x == 0.0) return 0.0;
        const double lo = std::min(0.0, x);
        const double hi = std::max(0.0, x);
        std::vector<double> knots{lo};
        for (double p : physical_.stationary_in(lo, hi)) knots.push_back(p);
        knots.push_back(hi);
        auto integrand = [&](double u) {
            const double d = physical_.derivative(u);
            return positive ? std::max(d, 0.0) : std::min(d, 0.0);
        };
        double total = 0.0;
        for (std::size_t i = 1; i < knots.size(); ++i) {
            total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, knots[i - 1], knots[i], 15,
                                                                                   1e-14);
        }
        return x > 0.0 ? total : -total;
    }

    double engquist_osher(double a, double b) const {
        if (physical_.linear_speed) {
            const double c = *physical_.linear_speed;
            return physical_(0.0) + std::max(c, 0.0) * a + std::min(c, 0.0) * b;
        }
        return physical_(0.0) + eo_part(a, true) + eo_part(b, false);
    }

    FluxKind kind_;
    PhysicalFlux physical_;
    double viscosity_;
};

/// Result of a lattice sweep over F's monotonicity in each argument.
struct MonotoneReport {
    double worst_a_step = 0.0;  ///< most negative forward difference in a
    double worst_b_step = 0.0;  ///< most positive forward difference in b
    bool pass = true;
};

inline MonotoneReport check_monotone(const NumericalFlux& flux, Interval range, std::size_t samples) {
    if (samples < 2) throw std::invalid_argument("check_monotone: need at least 2 samples");
    std::vector<double> s(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        s[i] = range.lo + (range.hi - range.lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
    }
    std::vector<double> F(samples * samples);
    for (std::size_t i = 0; i < samples; ++i) {
        for (std::size_t k = 0; k < samples; ++k) F[i * samples + k] = flux(s[i], s[k]);
    }
    MonotoneReport rep;
    for (std::size_t i = 0; i < samples; ++i) {
        for (std::size_t k = 0; k < samples; ++k) {
            if (i + 1 < samples) rep.worst_a_step = std::min(rep.worst_a_step, F[(i + 1) * samples + k] - F[i * samples + k]);
            if (k + 1 < samples) rep.worst_b_step = std::max(rep.worst_b_step, F[i * samples + k + 1] - F[i * samples + k]);
        }
    }
    constexpr double kTol = 1e-14;
    rep.pass = rep.worst_a_step >= -kTol && rep.worst_b_step <= kTol;
    return rep;
}

/// Largest CFL-admissible step, cfl_number * dx / L_F over the state range; dt_max when L_F vanishes.
inline double max_dt(const NumericalFlux& flux, Interval state_range, double dx, double cfl_number,
                     double dt_max = std::numeric_limits<double>::infinity()) {
    if (!(cfl_number > 0.0)) throw std::invalid_argument("max_dt: cfl_number must be positive");
    const double lf = flux.lipschitz_bound(state_range);
    if (lf <= 0.0) {
        if (!std::isfinite(dt_max)) throw std::invalid_argument("max_dt: flux has no wave speed and no dt cap was given");
        return dt_max;
    }
    return std::min(cfl_number * dx / lf, dt_max);
}

inline double max_dt(const NumericalFlux& flux, const CellField& field, double cfl_number,
                     double dt_max = std::numeric_limits<double>::infinity()) {
    return max_dt(flux, range_of(field.values), field.grid.dx(), cfl_number, dt_max);
}

}  // namespace splitfv
