#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "splitfv/diagnostics.hpp"
#include "splitfv/factory.hpp"
#include "splitfv/verify.hpp"

using namespace splitfv;

namespace {

// Godunov for Burgers by direct enumeration over a fine lattice of [min, max].
double godunov_sweep(double a, double b) {
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    double best = a <= b ? 1e300 : -1e300;
    for (int i = 0; i <= 2000; ++i) {
        double s = lo + (hi - lo) * i / 2000.0;
        if (lo < 0.0 && hi > 0.0 && i == 1000) s = 0.0;
        const double f = 0.5 * s * s;
        best = a <= b ? std::min(best, f) : std::max(best, f);
    }
    if (lo <= 0.0 && hi >= 0.0) best = a <= b ? std::min(best, 0.0) : best;
    return best;
}

StepRecord burgers_step(FluxKind kind, double viscosity, const SourceDescriptor& src) {
    const auto g = build_grid(-1, 1, 40);
    const CellField u0 = project_initial([](double x) { return x < 0 ? 1.0 : 0.0; }, g);
    const NumericalFlux flux{kind, PhysicalFlux::burgers(), viscosity};
    return step(u0, 0.9 * g.dx(), flux, src, BoundarySpec::dirichlet(1.0, 0.0));
}

}  // namespace

TEST(EntropyFlux, Examples) {
    const NumericalFlux god{FluxKind::godunov, PhysicalFlux::burgers()};
    EXPECT_EQ(numerical_entropy_flux(god, 0.7, 0.7, 0.7), 0.0);
    EXPECT_NEAR(numerical_entropy_flux(god, 1.2, 1.2, 0.4), 0.72 - 0.08, 1e-15);
    EXPECT_NEAR(numerical_entropy_flux(god, 1.0, 0.0, 0.5), 0.375, 1e-15);
    EXPECT_NEAR(godunov_sweep(1.0, 0.5) - godunov_sweep(0.5, 0.0), 0.375, 1e-15);
}

TEST(EntropyResidual, ConstantRecordIsNonPositive) {
    const auto g = build_grid(0, 1, 10);
    const auto u = CellField::constant(g, 2.0);
    const auto rec = step(u, 0.01, NumericalFlux{FluxKind::godunov, PhysicalFlux::burgers()},
                          SourceDescriptor::zero(), BoundarySpec::dirichlet(2.0, 2.0));
    for (double k : {-1.0, 0.0, 2.0, 3.0}) {
        for (std::size_t j = 0; j < 10; ++j) EXPECT_LE(entropy_residual_at(rec, rec.flux, SourceDescriptor::zero(), j, k), 0.0);
    }
    EXPECT_EQ(entropy_residual_at(rec, rec.flux, SourceDescriptor::zero(), 4, 2.0), 0.0);
}

TEST(EntropyResidual, BurgersGodunovStepHolds) {
    const auto rec = burgers_step(FluxKind::godunov, 0.0, SourceDescriptor::zero());
    const EntropyProbe mid{{0.5}, 1e-12};
    EXPECT_LE(entropy_residual(rec, SourceDescriptor::zero(), mid).max_residual, 1e-12);
    const auto r = entropy_residual(rec, SourceDescriptor::zero(), EntropyProbe::breakpoints());
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.max_residual, 1e-12);
}

TEST(EntropyResidual, AllMonotoneFluxesWithSourceHold) {
    const auto src = SourceDescriptor::linear(-0.1);
    for (FluxKind kind : {FluxKind::godunov, FluxKind::engquist_osher, FluxKind::lax_friedrichs}) {
        const auto rec = burgers_step(kind, 1.0, src);
        for (auto s0 : {SignAtZero::zero, SignAtZero::plus_one, SignAtZero::minus_one}) {
            EntropyProbe p = EntropyProbe::breakpoints();
            p.sign_at_zero = s0;
            EXPECT_TRUE(entropy_residual(rec, src, p).pass) << to_string(kind);
        }
    }
}

TEST(EntropyResidual, NonMonotoneFluxIsDetected) {
    const auto rec = burgers_step(FluxKind::lax_friedrichs, 0.0, SourceDescriptor::zero());
    const auto r = entropy_residual(rec, SourceDescriptor::zero(), EntropyProbe::breakpoints());
    EXPECT_GT(r.max_residual, 1e-6);
    EXPECT_FALSE(r.pass);
}

TEST(EntropyResidual, LocalBreakpointsAgreeWithGlobalSet) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1.0, 2.0);
    const auto g = build_grid(0, 1, 30);
    CellField u = CellField::constant(g, 0.0);
    for (auto& v : u.values) v = d(rng);
    const auto src = SourceDescriptor::linear(0.4);
    const auto rec = step(u, 0.3 * g.dx(), NumericalFlux{FluxKind::engquist_osher, PhysicalFlux::burgers()}, src,
                          BoundarySpec::dirichlet(0.5, -0.5));
    const auto local = entropy_residual(rec, src, EntropyProbe::breakpoints());
    const auto global = entropy_residual(rec, src, EntropyProbe{breakpoint_k_values(rec)});
    EXPECT_NEAR(local.max_residual, global.max_residual, 1e-14);
    // Dense k sampling never exceeds the breakpoint maximum.
    double dense = -1e300;
    for (int i = 0; i <= 400; ++i) {
        const double k = -1.5 + 4.0 * i / 400.0;
        for (std::size_t j = 0; j < 30; ++j) dense = std::max(dense, entropy_residual_at(rec, rec.flux, src, j, k));
    }
    EXPECT_LE(dense, local.max_residual + 1e-14);
}

TEST(EntropyResidual, KBelowAllStatesIsConservationIdentity) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> d(0.5, 2.0);
    const auto g = build_grid(0, 1, 20);
    CellField u = CellField::constant(g, 0.0);
    for (auto& v : u.values) v = d(rng);
    const auto src = SourceDescriptor::linear(-0.2);
    const auto rec = step(u, 0.4 * g.dx(), NumericalFlux{FluxKind::godunov, PhysicalFlux::burgers()}, src,
                          BoundarySpec::dirichlet(1.0, 1.0));
    for (std::size_t j = 0; j < 20; ++j) {
        EXPECT_NEAR(entropy_residual_at(rec, rec.flux, src, j, -5.0), 0.0, 1e-12);
    }
}

TEST(EntropyResidual, EmptyKSetThrows) {
    const auto rec = burgers_step(FluxKind::godunov, 0.0, SourceDescriptor::zero());
    EXPECT_THROW(entropy_residual(rec, SourceDescriptor::zero(), EntropyProbe{}), std::invalid_argument);
}

TEST(Monitor, TestCaseOneRunPasses) {
    EntropyMonitor mon{factory::as_source(factory::YieldLoss::constant(0.03), 2.8), EntropyProbe::breakpoints()};
    const auto run = factory::simulate(factory::testcase1(), 100, TimeAxis{2.0}, FluxKind::godunov,
                                       {[&mon](const StepRecord& r) { mon(r); }});
    EXPECT_EQ(mon.per_step().size(), run.report.n_steps());
    EXPECT_TRUE(mon.pass());
    EXPECT_EQ(mon.failures(), 0u);
}

TEST(LinfBound, ZeroSourceIsMaxPrinciple) {
    const auto g = build_grid(0, 1, 50);
    const auto u0 = project_initial([](double x) { return std::sin(6.0 * x); }, g);
    const auto rep = run(u0, NumericalFlux{FluxKind::godunov, PhysicalFlux::burgers()}, SourceDescriptor::zero(),
                         BoundarySpec{}, TimeAxis{0.5});
    const auto cfg = bound_config(rep, SourceDescriptor::zero());
    EXPECT_EQ(cfg.C0(), 0.0);
    const auto b = check_linf_bound(rep, cfg);
    EXPECT_TRUE(b.pass);
    for (const auto& s : rep.steps) EXPECT_LE(s.linf, linf_norm(u0) + 1e-15);
    EXPECT_TRUE(check_tv_bound(rep, cfg).pass);
}

TEST(LinfBound, DecayIsNonIncreasing) {
    const auto g = build_grid(0, 1, 50);
    const auto u0 = project_initial([](double x) { return 2.0 + std::sin(6.0 * x); }, g);
    const auto src = SourceDescriptor::linear(-0.03);
    const auto rep = run(u0, NumericalFlux{FluxKind::godunov, PhysicalFlux::linear(0.72)}, src,
                         BoundarySpec::dirichlet(1.0, 1.0), TimeAxis{3.0});
    const auto b = check_linf_bound(rep, bound_config(rep, src));
    EXPECT_TRUE(b.pass);
    EXPECT_GT(b.worst_margin, 0.0);
    for (std::size_t n = 1; n < rep.steps.size(); ++n) EXPECT_LE(rep.steps[n].linf, rep.steps[n - 1].linf + 1e-14);
}

TEST(LinfBound, GrowthSourceMatchesScalarOde) {
    const auto g = build_grid(0, 1, 10);
    const auto u0 = CellField::constant(g, 1.0);
    const auto src = SourceDescriptor::linear(0.03);
    TimeAxis axis{1.0};
    axis.dt_max = 0.01;
    // Zero ghosts keep the boundary out of the reference value.
    const auto rep = run(u0, NumericalFlux{FluxKind::godunov, PhysicalFlux::zero()}, src, BoundarySpec::dirichlet(0, 0),
                         axis);
    const auto cfg = bound_config(rep, src);
    EXPECT_NEAR(cfg.dt0, 0.01, 1e-15);
    const double factor = std::exp(cfg.C0() * 1.0);
    EXPECT_NEAR(factor, std::exp(0.03 / (1.0 - 0.0003)), 1e-15);
    EXPECT_NEAR(factor, 1.0305, 1e-4);
    // Implicit Euler growth (1 - 0.0003)^-100 sits between exp(0.03) and the bound factor.
    const double observed = rep.steps.back().linf;
    EXPECT_NEAR(observed, std::pow(1.0 - 0.0003, -100), 1e-12);
    EXPECT_GT(observed, std::exp(0.03));
    const auto b = check_linf_bound(rep, cfg);
    EXPECT_TRUE(b.pass);
    EXPECT_GE(b.worst_margin, -1e-6);
    EXPECT_LT(b.worst_margin, 1e-5);
    EXPECT_FALSE(b.extended);
}

TEST(LinfBound, MonotoneInC0) {
    const auto run_ = factory::simulate(factory::testcase2(), 50, TimeAxis{2.0});
    auto cfg = bound_config(run_.report, run_.source);
    ASSERT_TRUE(check_linf_bound(run_.report, cfg).pass);
    ASSERT_TRUE(check_tv_bound(run_.report, cfg).pass);
    double prev_l = check_linf_bound(run_.report, cfg).worst_margin;
    double prev_t = check_tv_bound(run_.report, cfg).worst_margin;
    for (double L : {0.1, 0.5, 2.0}) {
        cfg.L_g = L;
        const auto l = check_linf_bound(run_.report, cfg);
        const auto t = check_tv_bound(run_.report, cfg);
        EXPECT_TRUE(l.pass);
        EXPECT_TRUE(t.pass);
        EXPECT_GE(l.worst_margin, prev_l);
        EXPECT_GE(t.worst_margin, prev_t);
        prev_l = l.worst_margin;
        prev_t = t.worst_margin;
    }
    cfg.L_g = 1.0 / cfg.dt0;
    EXPECT_THROW((void)cfg.C0(), std::invalid_argument);
}

TEST(TvBound, ConstantRunStaysZero) {
    const auto g = build_grid(0, 1, 20);
    const auto rep = run(CellField::constant(g, 1.0), NumericalFlux{FluxKind::godunov, PhysicalFlux::burgers()},
                         SourceDescriptor::zero(), BoundarySpec::dirichlet(1.0, 1.0), TimeAxis{0.3});
    for (const auto& s : rep.steps) EXPECT_EQ(s.tv, 0.0);
    const auto b = check_tv_bound(rep, bound_config(rep, SourceDescriptor::zero()));
    EXPECT_TRUE(b.pass);
    EXPECT_FALSE(b.extended);
}

TEST(TvBound, RarefactionIsTvd) {
    const auto p = verify::burgers_rarefaction_problem();
    const auto g = build_grid(0, 1, 100);
    const auto u0 = project_initial(p.initial, g);
    const auto rep = run(u0, NumericalFlux{FluxKind::godunov, p.flux}, p.source, p.boundary(g), TimeAxis{0.5});
    double prev = total_variation(u0);
    for (const auto& s : rep.steps) {
        EXPECT_LE(s.tv, prev + 1e-14);
        prev = s.tv;
    }
    EXPECT_TRUE(check_tv_bound(rep, bound_config(rep, p.source)).pass);
}

TEST(TimeBv, Examples) {
    const auto g = build_grid(0, 1, 10);
    RunOptions opts;
    opts.keep_history = true;
    const auto steady = run(CellField::constant(g, 1.0), NumericalFlux{FluxKind::godunov, PhysicalFlux::burgers()},
                            SourceDescriptor::zero(), BoundarySpec::dirichlet(1.0, 1.0), TimeAxis{0.2}, {}, opts);
    for (double v : time_bv_report(steady)) EXPECT_EQ(v, 0.0);

    RunReport one{CellField::constant(g, 0.0), CellField::constant(g, 0.0), {}, {}, {}, 0};
    one.history = {CellField::constant(g, 0.0), CellField::constant(g, 0.0)};
    one.history[1][3] = 0.25;
    const auto bv = time_bv_report(one);
    EXPECT_EQ(bv[3], 0.25);
    EXPECT_EQ(bv[2], 0.0);

    const auto src = SourceDescriptor::linear(-0.5);
    const auto u0 = project_initial([](double x) { return 1.0 + x; }, g);
    const auto decay = run(u0, NumericalFlux{FluxKind::upwind_linear, PhysicalFlux::linear(1.0)}, src,
                           BoundarySpec::dirichlet(1.0, 2.0), TimeAxis{0.5}, {}, opts);
    const auto table = time_bv_report(decay);
    for (std::size_t j = 0; j < 10; ++j) {
        double s = 0.0;
        for (std::size_t n = 0; n + 1 < decay.history.size(); ++n) {
            s += std::abs(decay.history[n + 1].values[j] - decay.history[n].values[j]);
        }
        EXPECT_NEAR(table[j], s, 1e-15);
    }
    EXPECT_THROW(time_bv_report(RunReport{u0, u0, {}, {}, {}, 0}), std::invalid_argument);
}
