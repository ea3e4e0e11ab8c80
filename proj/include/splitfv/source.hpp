#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "splitfv/errors.hpp"

namespace splitfv {

/// Source term g(x, t, u) of u_t + f(u)_x = g together with its structural constants.
///
/// `lipschitz_u` is the Lipschitz constant in u, `sup_at_zero` bounds |g(x, t, 0)|,
/// `tv_bound(t)` bounds the spatial total variation of g(., t, u), and `growth_const`
/// is the constant L_g with |g| <= L_g (1 + |u|).
struct SourceDescriptor {
    std::function<double(double, double, double)> eval;
    double lipschitz_u = 0.0;
    double sup_at_zero = 0.0;
    std::function<double(double)> tv_bound;
    double growth_const = 0.0;

    double operator()(double x, double t, double u) const { return eval(x, t, u); }
    [[nodiscard]] double B(double t) const { return tv_bound ? tv_bound(t) : 0.0; }

    static SourceDescriptor zero() {
        return {[](double, double, double) { return 0.0; }, 0.0, 0.0, [](double) { return 0.0; }, 0.0};
    }

    /// g = c * u, spatially constant.
    static SourceDescriptor linear(double c) {
        const double L = std::abs(c);
        return {[c](double, double, double u) { return c * u; }, L, 0.0, [](double) { return 0.0; }, L};
    }
};

/// max(L, sup|g(., ., 0)|): with |g(u)| <= |g(0)| + L|u| this bounds |g| by L_g (1 + |u|).
inline double growth_constant_estimate(const SourceDescriptor& src) noexcept {
    return std::max(src.lipschitz_u, src.sup_at_zero);
}

struct ImplicitSolve {
    double value = 0.0;
    int iterations = 0;
    double residual = 0.0;
    bool used_bisection = false;
};

/// Solves w = u + dt * g(x, t, w) by fixed-point iteration from w = u, with a bisection fallback.
inline ImplicitSolve implicit_source_step(double u, double x, double t, double dt, const SourceDescriptor& src,
                                          double tol = 1e-12, int max_iters = 100) {
    if (!(dt > 0.0)) throw std::invalid_argument("implicit_source_step: dt must be positive");
    if (!(src.lipschitz_u * dt < 1.0)) {
        throw SourceSolveError("implicit_source_step: contraction condition L*dt < 1 violated (L*dt = " +
                               std::to_string(src.lipschitz_u * dt) + ")");
    }
    const auto residual = [&](double w) { return w - u - dt * src(x, t, w); };
    // Absolute tolerance cannot go below the rounding floor of the state magnitude.
    const double eff_tol = std::max(tol, 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u)));
    // |w - w*| <= |r(w)| / (1 - L dt), so this target keeps the error in w below eff_tol / 2,
    // leaving room for rounding in the final evaluation.
    const double target = 0.5 * eff_tol * (1.0 - src.lipschitz_u * dt);

    ImplicitSolve out;
    double w = u;
    for (int m = 1; m <= max_iters; ++m) {
        w = u + dt * src(x, t, w);
        const double r = residual(w);
        if (!std::isfinite(r)) break;
        if (std::abs(r) <= target) {
            out.value = w;
            out.iterations = m;
            out.residual = std::abs(r);
            return out;
        }
    }

    // r is strictly increasing with slope >= 1 - L dt; the root lies within dt|g(u)|/(1 - L dt) of u.
    const double radius = dt * std::abs(src(x, t, u)) / (1.0 - src.lipschitz_u * dt) + eff_tol;
    double lo = u - radius;
    double hi = u + radius;
    if (!(residual(lo) <= 0.0 && residual(hi) >= 0.0)) {
        throw SourceSolveError("implicit_source_step: no sign change on the contraction bracket; "
                               "declared Lipschitz constant is inconsistent with g");
    }
    auto width_tol = [&](double a, double b) { return std::abs(b - a) <= 0.5 * target; };
    std::uintmax_t iters = 200;
    std::tie(lo, hi) = boost::math::tools::bisect(residual, lo, hi, width_tol, iters);
    const double mid = 0.5 * (lo + hi);
    out.value = std::abs(residual(lo)) < std::abs(residual(mid)) ? lo : mid;
    out.residual = std::abs(residual(out.value));
    out.iterations = max_iters + static_cast<int>(iters);
    out.used_bisection = true;
    if (!(out.residual <= 2.0 * eff_tol)) {
        throw SourceSolveError("implicit_source_step: bisection did not reach tolerance");
    }
    return out;
}

struct SourcePropertyReport {
    double lipschitz_observed = 0.0;
    double lipschitz_margin = 0.0;  ///< declared L minus worst sampled quotient
    bool lipschitz_ok = true;
    double tv_worst_margin = std::numeric_limits<double>::infinity();  ///< min over (t, u) of B(t) - TV_x g
    bool tv_ok = true;
    double growth_observed = 0.0;
    double growth_margin = 0.0;  ///< growth_const minus worst |g| / (1 + |u|)
    bool growth_ok = true;

    [[nodiscard]] bool pass() const noexcept { return lipschitz_ok && tv_ok && growth_ok; }
};

/// Samples the Lipschitz, spatial-TV and growth properties of g on the probe lattice.
inline SourcePropertyReport verify_source_properties(const SourceDescriptor& src, std::span<const double> x_probes,
                                                     std::span<const double> t_probes,
                                                     std::span<const double> u_probes) {
    if (x_probes.empty() || t_probes.empty() || u_probes.empty()) {
        throw std::invalid_argument("verify_source_properties: empty probe set");
    }
    constexpr double kSlack = 1e-12;
    std::vector<double> xs(x_probes.begin(), x_probes.end());
    std::sort(xs.begin(), xs.end());

    SourcePropertyReport rep;
    for (double t : t_probes) {
        for (double x : xs) {
            for (std::size_t i = 0; i < u_probes.size(); ++i) {
                const double gi = src(x, t, u_probes[i]);
                rep.growth_observed = std::max(rep.growth_observed, std::abs(gi) / (1.0 + std::abs(u_probes[i])));
                for (std::size_t k = i + 1; k < u_probes.size(); ++k) {
                    const double du = std::abs(u_probes[k] - u_probes[i]);
                    if (du == 0.0) continue;
                    const double q = std::abs(src(x, t, u_probes[k]) - gi) / du;
                    rep.lipschitz_observed = std::max(rep.lipschitz_observed, q);
                }
            }
        }
        for (double u : u_probes) {
            double tv = 0.0;
            for (std::size_t j = 1; j < xs.size(); ++j) tv += std::abs(src(xs[j], t, u) - src(xs[j - 1], t, u));
            rep.tv_worst_margin = std::min(rep.tv_worst_margin, src.B(t) - tv);
        }
    }
    rep.lipschitz_margin = src.lipschitz_u - rep.lipschitz_observed;
    rep.growth_margin = src.growth_const - rep.growth_observed;
    const double scale = std::max(1.0, src.lipschitz_u);
    rep.lipschitz_ok = rep.lipschitz_margin >= -kSlack * scale;
    rep.growth_ok = rep.growth_margin >= -kSlack * std::max(1.0, src.growth_const);
    rep.tv_ok = rep.tv_worst_margin >= -kSlack;
    return rep;
}

}  // namespace splitfv
