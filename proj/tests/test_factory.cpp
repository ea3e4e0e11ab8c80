#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "splitfv/factory.hpp"

using namespace splitfv;
using namespace splitfv::factory;

namespace {

FactoryModel no_yield(double lambda) { return {1.0, 10.0, [lambda](double) { return lambda; }, YieldLoss::none()}; }

// Steady state of u (1 - u / 10) = lambda, larger root; computed with the quadratic formula.
double quadratic_root_high(double lambda) { return 0.5 * (10.0 + std::sqrt(100.0 - 40.0 * lambda)); }

}  // namespace

TEST(Wip, Examples) {
    const auto g = build_grid(0, 1, 200);
    EXPECT_NEAR(wip(CellField::constant(g, 2.8)), 2.8, 1e-13);
    EXPECT_NEAR(wip(project_initial([](double x) { return x; }, g)), 0.5, 1e-14);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(0.0, 4.0);
    CellField f = CellField::constant(g, 0.0);
    double loop = 0.0;
    for (auto& v : f.values) {
        v = d(rng);
        loop += v / 200.0;
    }
    EXPECT_NEAR(wip(f), loop, 1e-12);
    EXPECT_THROW(wip(CellField::constant(build_grid(0, 2, 10), 1.0)), std::invalid_argument);
}

TEST(Velocity, Examples) {
    const FactoryModel m = no_yield(2.016);
    EXPECT_EQ(velocity(0.0, m), 1.0);
    EXPECT_EQ(velocity(10.0, m), 0.0);
    EXPECT_NEAR(velocity(2.8, m), 0.72, 1e-15);
}

TEST(Outflux, Examples) {
    const auto g = build_grid(0, 1, 20);
    EXPECT_NEAR(outflux(CellField::constant(g, 2.8), 0.72), 2.016, 1e-14);
    EXPECT_EQ(outflux(CellField::constant(g, 0.0), 0.72), 0.0);
    EXPECT_NEAR(outflux(CellField::constant(g, 3.1), 0.69), 2.139, 1e-14);
}

TEST(SteadyRoots, MatchInfluxTable) {
    EXPECT_NEAR(quadratic_root_high(2.016), 2.8 + 4.4, 1e-12);
    EXPECT_NEAR(10.0 - quadratic_root_high(2.016), 2.8, 1e-12);
    EXPECT_NEAR(10.0 - quadratic_root_high(2.139), 3.1, 1e-12);
}

TEST(YieldLoss, AsSource) {
    const auto none = as_source(YieldLoss::none());
    EXPECT_EQ(none(0.3, 0.0, 5.0), 0.0);
    EXPECT_EQ(none.lipschitz_u, 0.0);

    const auto c = as_source(YieldLoss::constant(0.03), 3.2);
    EXPECT_NEAR(c(0.7, 1.0, 2.0), -0.06, 1e-16);
    EXPECT_EQ(c.lipschitz_u, 0.03);
    EXPECT_EQ(c.B(0.0), 0.0);

    const auto p = YieldLoss::piecewise({{0.0, 0.01}, {0.5, 0.04}, {1.0, 0.01}});
    EXPECT_NEAR(p.total_variation(), 0.06, 1e-16);
    const auto ps = as_source(p, 3.2);
    EXPECT_NEAR(ps.B(0.0), 0.192, 1e-15);
    EXPECT_EQ(ps.lipschitz_u, 0.04);
}

TEST(YieldLoss, PiecewiseProfile) {
    const auto y = YieldLoss::testcase2_profile();
    EXPECT_EQ(y.rate(0.0), 0.01);
    EXPECT_NEAR(y.rate(0.25), 0.03, 1e-16);
    EXPECT_EQ(y.rate(0.5), 0.05);
    EXPECT_NEAR(y.rate(0.75), 0.035, 1e-16);
    EXPECT_EQ(y.rate(1.0), 0.02);
    EXPECT_EQ(y.rate(-1.0), 0.01);
    EXPECT_EQ(y.max_rate(), 0.05);
    EXPECT_NEAR(y.total_variation(), 0.07, 1e-16);
    EXPECT_THROW(YieldLoss::piecewise({{0.5, 0.1}, {0.2, 0.1}}), std::invalid_argument);
    EXPECT_THROW(YieldLoss::piecewise({{0.5, -0.1}}), std::invalid_argument);
    EXPECT_THROW(YieldLoss::constant(-0.1), std::invalid_argument);
}

TEST(Presets, Parse) {
    EXPECT_EQ(preset("testcase1").name, "testcase1");
    EXPECT_FALSE(preset("testcase1").illustrative_data);
    EXPECT_TRUE(preset("testcase2").illustrative_data);
    EXPECT_THROW(preset("testcase3"), std::invalid_argument);
    const auto s = testcase1();
    EXPECT_EQ(s.model.influx(-1.0), 2.016);
    EXPECT_EQ(s.model.influx(0.0), 2.139);
}

TEST(FactoryStep, SteadyStateIsFixedPoint) {
    const FactoryModel m = no_yield(2.016);
    for (FluxKind kind : {FluxKind::upwind_linear, FluxKind::godunov, FluxKind::engquist_osher,
                          FluxKind::lax_friedrichs}) {
        CellField u = CellField::constant(build_grid(0, 1, 200), 2.8);
        for (int n = 0; n < 50; ++n) {
            const auto rec = factory_step(m, u, 0.9 * u.grid.dx() / 0.72, kind, SourceDescriptor::zero());
            for (std::size_t j = 0; j < u.size(); ++j) ASSERT_NEAR(rec.field_after[j], 2.8, 1e-12) << to_string(kind);
            ASSERT_NEAR(outflux(rec.field_after, *rec.velocity), 2.016, 1e-12);
            u = rec.field_after;
        }
    }
}

TEST(FactoryStep, MassBalancePerStep) {
    const FactoryModel m{1.0, 10.0, StepInflux{}, YieldLoss::testcase2_profile()};
    const auto src = as_source(m.yield, 4.0);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(2.0, 3.5);
    CellField u = CellField::constant(build_grid(0, 1, 100), 0.0);
    for (auto& v : u.values) v = d(rng);
    const double dt = 0.8 * u.grid.dx();
    const auto rec = factory_step(m, u, dt, FluxKind::godunov, src);
    const double v = *rec.velocity;
    // WIP^{n+1} - WIP^n = dt [lambda - v ubar_last] + dx sum(ubar - u).
    double source_part = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) source_part += u.grid.dx() * (rec.field_bar[j] - u[j]);
    const double expected = dt * (2.139 - v * rec.field_bar.values.back()) + source_part;
    const double change = wip(rec.field_after) - wip(u);
    EXPECT_NEAR(change, expected, 1e-10 * std::max(1.0, std::abs(wip(u))));
    // The source part equals -dt dx sum rate(x_j) ubar_j.
    double quad = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        quad += u.grid.dx() * m.yield.rate(u.grid.center(static_cast<std::ptrdiff_t>(j))) * rec.field_bar[j];
    }
    EXPECT_NEAR(source_part, -dt * quad, 1e-12);
}

TEST(FactoryStep, JamIsReported) {
    const FactoryModel m = no_yield(2.0);
    const auto u = CellField::constant(build_grid(0, 1, 20), 10.0);
    EXPECT_THROW(factory_step(m, u, 0.01, FluxKind::godunov, SourceDescriptor::zero()), JamError);
    TimeAxis axis{1.0};
    EXPECT_THROW(simulate(m, u, axis), JamError);
}

TEST(Simulate, InfluxJumpDipsAndRelaxes) {
    TimeAxis axis{20.0};
    Scenario s = testcase1();
    s.model.yield = YieldLoss::none();
    const auto run = simulate(s, 100, axis);
    double dip = 1e300;
    for (const auto& smp : run.series) {
        if (smp.t > 0.0 && smp.t <= 2.0) dip = std::min(dip, smp.outflux);
    }
    EXPECT_LT(dip, 2.016);
    EXPECT_NEAR(run.series.back().outflux, 2.139, 1e-2);
    EXPECT_NEAR(run.series.back().wip, 3.1, 1e-2);
    for (const auto& smp : run.series) EXPECT_LT(smp.wip, 4.0);
}

TEST(Simulate, ConstantYieldMatchesOracle) {
    // Independent oracle: bisection on F(v) = v - (1 - (lambda / r)(1 - exp(-r / v)) / 10).
    const double lambda = 2.139;
    const double r = 0.03;
    auto F = [&](double v) { return v - (1.0 - lambda / r * (1.0 - std::exp(-r / v)) / 10.0); };
    double lo = 0.5, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (F(mid) < 0.0 ? lo : hi) = mid;
    }
    const double v_star = 0.5 * (lo + hi);
    const auto ss = constant_yield_steady_state(lambda, r, 1.0, 10.0);
    EXPECT_NEAR(ss.velocity, v_star, 1e-11);
    EXPECT_NEAR(ss.outflux, lambda * std::exp(-r / v_star), 1e-11);
    EXPECT_NEAR(ss.outflux, 2.049455138669657, 1e-9);

    const FactoryModel m{1.0, 10.0, [lambda](double) { return lambda; }, YieldLoss::constant(r)};
    const auto run = simulate(m, CellField::constant(build_grid(0, 1, 200), 2.8), TimeAxis{40.0});
    EXPECT_NEAR(run.series.back().outflux, ss.outflux, 1e-2);
    const auto& u = run.report.final_field;
    for (std::size_t j = 0; j < u.size(); ++j) {
        EXPECT_NEAR(u[j], ss.density(u.grid.center(static_cast<std::ptrdiff_t>(j))), 1e-2);
    }
}

TEST(Simulate, SeriesHasOneSamplePerStep) {
    const auto run = simulate(testcase1(), 50, TimeAxis{0.5});
    EXPECT_EQ(run.series.size(), run.report.n_steps() + 1);
    EXPECT_EQ(run.series.front().t, 0.0);
    EXPECT_DOUBLE_EQ(run.series.back().t, 0.5);
    EXPECT_EQ(run.source.lipschitz_u, 0.03);
}
