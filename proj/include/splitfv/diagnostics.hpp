#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "splitfv/flux.hpp"
#include "splitfv/mesh.hpp"
#include "splitfv/source.hpp"
#include "splitfv/splitting.hpp"

namespace splitfv {

/// Crandall-Majda entropy flux G(a, b; k) = F(a v k, b v k) - F(a ^ k, b ^ k).
inline double numerical_entropy_flux(const NumericalFlux& flux, double a, double b, double k) {
    return flux(std::max(a, k), std::max(b, k)) - flux(std::min(a, k), std::min(b, k));
}

/// Value taken by sign(0) in the source term of the entropy inequality.
enum class SignAtZero { zero, plus_one, minus_one };

inline double kruzkov_sign(double v, SignAtZero at_zero) noexcept {
    if (v > 0.0) return 1.0;
    if (v < 0.0) return -1.0;
    switch (at_zero) {
        case SignAtZero::plus_one: return 1.0;
        case SignAtZero::minus_one: return -1.0;
        case SignAtZero::zero: break;
    }
    return 0.0;
}

/// Kruzkov constants to test. With `local_breakpoints`, each cell is checked at the values its
/// residual is kinked at (u^n_j, u^{n+1}_j, ubar_{j-1..j+1}) plus one constant below and above every
/// state; the residual is piecewise linear in k, so this covers all real k.
struct EntropyProbe {
    std::vector<double> k_values;
    double tolerance = 1e-10;
    SignAtZero sign_at_zero = SignAtZero::zero;
    bool local_breakpoints = false;

    static EntropyProbe breakpoints(double tolerance = 1e-10) { return {{}, tolerance, SignAtZero::zero, true}; }
};

struct EntropyResidual {
    double max_residual = -std::numeric_limits<double>::infinity();
    std::size_t cell = 0;
    double k = 0.0;
    double threshold = 0.0;  ///< tolerance * max(1, ||u||_inf)
    bool pass = true;
};

/// Distinct states of a step (u^n, ubar, u^{n+1}, ghosts) plus min - 0.1 and max + 0.1.
inline std::vector<double> breakpoint_k_values(const StepRecord& rec) {
    std::vector<double> ks;
    ks.reserve(3 * rec.field_before.size() + 4);
    ks.insert(ks.end(), rec.field_before.values.begin(), rec.field_before.values.end());
    ks.insert(ks.end(), rec.field_bar.values.begin(), rec.field_bar.values.end());
    ks.insert(ks.end(), rec.field_after.values.begin(), rec.field_after.values.end());
    ks.push_back(rec.ghost_left);
    ks.push_back(rec.ghost_right);
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    const double lo = ks.front() - 0.1;
    const double hi = ks.back() + 0.1;
    ks.insert(ks.begin(), lo);
    ks.push_back(hi);
    return ks;
}

/// R_j(k) for one cell of a step record.
inline double entropy_residual_at(const StepRecord& rec, const NumericalFlux& flux, const SourceDescriptor& src,
                                  std::size_t j, double k, SignAtZero sign_at_zero = SignAtZero::zero) {
    const auto& bar = rec.field_bar.values;
    const std::size_t n = bar.size();
    const double left = j == 0 ? rec.ghost_left : bar[j - 1];
    const double right = j + 1 == n ? rec.ghost_right : bar[j + 1];
    const double ratio = rec.dt / rec.field_bar.grid.dx();
    const double x = rec.field_bar.grid.center(static_cast<std::ptrdiff_t>(j));
    const double g = src(x, rec.t_before, bar[j]);
    return (std::abs(rec.field_after[j] - k) - std::abs(rec.field_before[j] - k)) +
           ratio * (numerical_entropy_flux(flux, bar[j], right, k) - numerical_entropy_flux(flux, left, bar[j], k)) -
           kruzkov_sign(bar[j] - k, sign_at_zero) * rec.dt * g;
}

/// Worst discrete entropy residual of a step over cells and Kruzkov constants; the inequality asserts R <= 0.
inline EntropyResidual entropy_residual(const StepRecord& rec, const NumericalFlux& flux,
                                        const SourceDescriptor& src, const EntropyProbe& probe) {
    if (!probe.local_breakpoints && probe.k_values.empty()) {
        throw std::invalid_argument("entropy_residual: empty k set");
    }
    EntropyResidual out;
    const double scale = std::max({1.0, linf_norm(rec.field_before), linf_norm(rec.field_bar),
                                   linf_norm(rec.field_after)});
    out.threshold = probe.tolerance * scale;

    const auto consider = [&](std::size_t j, double k) {
        const double r = entropy_residual_at(rec, flux, src, j, k, probe.sign_at_zero);
        if (r > out.max_residual) {
            out.max_residual = r;
            out.cell = j;
            out.k = k;
        }
    };

    const std::size_t n = rec.field_bar.size();
    double below = 0.0;
    double above = 0.0;
    if (probe.local_breakpoints) {
        const auto ks = breakpoint_k_values(rec);
        below = ks.front();
        above = ks.back();
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (double k : probe.k_values) consider(j, k);
        if (probe.local_breakpoints) {
            const double left = j == 0 ? rec.ghost_left : rec.field_bar[j - 1];
            const double right = j + 1 == n ? rec.ghost_right : rec.field_bar[j + 1];
            for (double k : {rec.field_before[j], rec.field_after[j], left, rec.field_bar[j], right, below, above}) {
                consider(j, k);
            }
        }
    }
    out.pass = out.max_residual <= out.threshold;
    return out;
}

inline EntropyResidual entropy_residual(const StepRecord& rec, const SourceDescriptor& src,
                                        const EntropyProbe& probe) {
    return entropy_residual(rec, rec.flux, src, probe);
}

/// Observer that evaluates the entropy residual on every accepted step.
class EntropyMonitor {
public:
    EntropyMonitor(SourceDescriptor src, EntropyProbe probe) : src_(std::move(src)), probe_(std::move(probe)) {}

    void operator()(const StepRecord& rec) {
        const auto r = entropy_residual(rec, src_, probe_);
        per_step_.push_back(r);
        if (!r.pass) ++failures_;
        if (r.max_residual - r.threshold > worst_excess_) {
            worst_excess_ = r.max_residual - r.threshold;
            worst_ = r;
            worst_step_ = per_step_.size() - 1;
        }
    }

    [[nodiscard]] const std::vector<EntropyResidual>& per_step() const noexcept { return per_step_; }
    [[nodiscard]] std::size_t failures() const noexcept { return failures_; }
    [[nodiscard]] bool pass() const noexcept { return failures_ == 0; }
    [[nodiscard]] const EntropyResidual& worst() const noexcept { return worst_; }
    [[nodiscard]] std::size_t worst_step() const noexcept { return worst_step_; }

private:
    SourceDescriptor src_;
    EntropyProbe probe_;
    std::vector<EntropyResidual> per_step_;
    std::size_t failures_ = 0;
    double worst_excess_ = -std::numeric_limits<double>::infinity();
    EntropyResidual worst_;
    std::size_t worst_step_ = 0;
};

/// Constants of the exponential stability bounds. `affine_source` marks g(., ., 0) != 0.
struct BoundCheckConfig {
    double L_g = 0.0;
    double dt0 = 0.0;
    double B_l1 = 0.0;
    bool affine_source = false;

    [[nodiscard]] double C0() const {
        if (!(L_g * dt0 < 1.0)) throw std::invalid_argument("BoundCheckConfig: L_g * dt0 must be < 1");
        return L_g / (1.0 - L_g * dt0);
    }
};

/// Largest dt taken in a run.
inline double max_step_size(const RunReport& report) noexcept {
    double m = 0.0;
    for (const auto& s : report.steps) m = std::max(m, s.dt);
    return m;
}

/// Config from a source descriptor and a run: dt0 is the largest step taken, ||B||_1 = sum dt * B(t).
inline BoundCheckConfig bound_config(const RunReport& report, const SourceDescriptor& src) {
    BoundCheckConfig cfg{growth_constant_estimate(src), max_step_size(report), 0.0, src.sup_at_zero > 0.0};
    double t = report.initial.time;
    for (const auto& s : report.steps) {
        cfg.B_l1 += s.dt * src.B(t);
        t = s.t;
    }
    return cfg;
}

struct BoundCheck {
    bool pass = true;
    double worst_margin = std::numeric_limits<double>::infinity();  ///< min over steps of bound - observed
    std::size_t worst_step = 0;
    bool extended = false;  ///< boundary data entered the reference value
    std::vector<double> margins;
};

namespace detail {

inline void record_margin(BoundCheck& out, std::size_t n, double bound, double observed) {
    const double margin = bound - observed;
    out.margins.push_back(margin);
    if (margin < out.worst_margin) {
        out.worst_margin = margin;
        out.worst_step = n;
    }
    if (margin < -1e-12 * std::max(1.0, bound)) out.pass = false;
}

}  // namespace detail

/// ||u^n|| <= exp(C0 t^n) * max(||u0||, sup |ghost|).
///
/// For affine sources the bound is exp(C0 t^n) (ref + 1) - 1, the form the recursion
/// |ubar| <= (1 + C dt)|u| + C dt actually yields.
inline BoundCheck check_linf_bound(const RunReport& report, const BoundCheckConfig& cfg) {
    const double c0 = cfg.C0();
    BoundCheck out;
    const double u0 = linf_norm(report.initial);
    double ref = u0;
    for (std::size_t n = 0; n < report.steps.size(); ++n) {
        const auto& s = report.steps[n];
        ref = std::max({ref, std::abs(s.ghost_left), std::abs(s.ghost_right)});
        const double growth = std::exp(c0 * (s.t - report.initial.time));
        const double bound = cfg.affine_source ? growth * (ref + 1.0) - 1.0 : growth * ref;
        detail::record_margin(out, n, bound, s.linf);
    }
    out.extended = ref > u0;
    return out;
}

/// Interior TV(u^{n+1}) <= exp(C0 t^{n+1}) [TV(u0) + ||B||_1 + boundary terms].
///
/// Boundary terms account for ghost data on a bounded window: the initial ghost jumps, the ghost
/// variation between steps, and the source change in the two boundary cells. All vanish for the
/// whole-line problem.
inline BoundCheck check_tv_bound(const RunReport& report, const BoundCheckConfig& cfg) {
    const double c0 = cfg.C0();
    BoundCheck out;
    const double tv0 = total_variation(report.initial);
    double boundary = 0.0;
    for (std::size_t n = 0; n < report.steps.size(); ++n) {
        const auto& s = report.steps[n];
        if (n == 0) {
            boundary += std::abs(s.ghost_left - report.initial.values.front()) +
                        std::abs(report.initial.values.back() - s.ghost_right);
        } else {
            const auto& p = report.steps[n - 1];
            boundary += std::abs(s.ghost_left - p.ghost_left) + std::abs(s.ghost_right - p.ghost_right);
        }
        boundary += s.boundary_source_change;
        const double bound = std::exp(c0 * (s.t - report.initial.time)) * (tv0 + cfg.B_l1 + boundary);
        detail::record_margin(out, n, bound, s.tv);
    }
    out.extended = boundary > 0.0;
    return out;
}

/// Per-cell temporal variation sum_n |u_j^{n+1} - u_j^n| from a run that kept its history.
inline std::vector<double> time_bv_report(const RunReport& report) {
    if (report.history.empty()) throw std::invalid_argument("time_bv_report: run did not keep its history");
    std::vector<double> out(report.history.front().size(), 0.0);
    for (std::size_t n = 1; n < report.history.size(); ++n) {
        const auto& a = report.history[n - 1].values;
        const auto& b = report.history[n].values;
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += std::abs(b[j] - a[j]);
    }
    return out;
}

}  // namespace splitfv
