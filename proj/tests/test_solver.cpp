#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hotv/fixtures.hpp"
#include "hotv/solver.hpp"

using namespace hotv;

namespace {

ScalarField affine(Extents e, double a, double b, double c)
{
    ScalarField f(e);
    for (int y = 0; y < e.height; ++y)
        for (int x = 0; x < e.width; ++x)
            f(x, y) = a * x + b * y + c;
    return f;
}

} // namespace

TEST(Schedule, GeometricThenFloor)
{
    SolveConfig cfg;
    cfg.delta0 = 1.0;
    cfg.delta_factor = 0.5;
    cfg.delta_min = 0.1;
    const auto s = cfg.schedule();
    ASSERT_EQ(s.size(), 5u);
    EXPECT_DOUBLE_EQ(s[0], 1.0);
    EXPECT_DOUBLE_EQ(s[3], 0.125);
    EXPECT_DOUBLE_EQ(s[4], 0.1);
    cfg.delta0 = 0.1;
    EXPECT_EQ(cfg.schedule().size(), 1u);
}

TEST(Schedule, Validation)
{
    SolveConfig cfg;
    cfg.delta_factor = 1.0;
    EXPECT_THROW(cfg.validate(), domain_error);
    cfg = SolveConfig{};
    cfg.delta_min = 1.0;
    EXPECT_THROW(cfg.validate(), domain_error);
    cfg = SolveConfig{};
    cfg.tol = 0.0;
    EXPECT_THROW(cfg.validate(), domain_error);
}

TEST(Solver, AffineDataIsReproducedBySecondOrder)
{
    const ScalarField f = affine(Extents{12, 10}, 0.03, -0.02, 0.4);
    const Problem pr = Problem::denoising(f, 5.0, DensityParams{1.4, 2, 2, 0.0});
    const SolveResult r = solve(pr, SolveConfig{});
    EXPECT_TRUE(r.report.converged());
    EXPECT_LT(max_abs(r.u - f), 1e-7);
}

TEST(Solver, InpaintingFillsAffineHoleExactly)
{
    // affine data: zero energy, so the unique minimizer continues it into the hole
    const ScalarField f = affine(Extents{14, 14}, -0.01, 0.04, 0.2);
    ScalarField corrupted = f;
    const Mask mask = fixtures::box_hole(f.extents(), 4, 5, 10, 9);
    for (std::size_t p = 0; p < f.size(); ++p)
        if (mask.hole(p))
            corrupted[p] = 1.0;
    const Problem pr(corrupted, mask, 10.0, DensityParams{1.4, 2, 2, 0.0});
    const SolveResult r = solve(pr, SolveConfig{});
    EXPECT_TRUE(r.report.converged());
    EXPECT_LT(max_abs(r.u - f), 1e-5);
}

TEST(Solver, InitialGuessUsesObservedMean)
{
    const ScalarField f(Extents{3, 1}, 1.0, std::vector<double>{1.0, 100.0, 3.0});
    const Problem pr(f, Mask(Extents{3, 1}, {true, false, true}), 1.0, DensityParams{1.4, 1, 1, 0.0});
    const ScalarField u = initial_guess(pr);
    EXPECT_DOUBLE_EQ(u[1], 2.0);
    EXPECT_DOUBLE_EQ(u[0], 1.0);
}

TEST(Solver, FirstOrderOptimalityAndStageReports)
{
    const Problem pr = Problem::denoising(fixtures::noisy_piecewise_affine(3, 16, 16), 10.0,
                                          DensityParams{1.4, 2, 2, 0.0});
    SolveConfig cfg;
    int calls = 0;
    const SolveResult r = solve(pr, cfg, [&](const StageRecord& s, const ScalarField& u) {
        ++calls;
        Problem pd = pr;
        pd.density.delta = s.delta;
        EXPECT_NEAR(norm2(grad_energy(pd, u)), s.grad_norm, 1e-9 * (1 + s.grad_norm));
    });
    EXPECT_EQ(calls, static_cast<int>(cfg.schedule().size()));
    ASSERT_EQ(r.report.stages.size(), cfg.schedule().size());
    EXPECT_TRUE(r.report.converged());
    // unregularized energy decreases along the schedule, up to the tolerance
    for (std::size_t i = 1; i < r.report.stages.size(); ++i)
        EXPECT_LE(r.report.stages[i].energy_unregularized, r.report.stages[i - 1].energy_unregularized + 1e-8);
    // no random perturbation lowers the final energy
    Problem pd = pr;
    pd.density.delta = cfg.delta_min;
    const double e0 = eval_energy(pd, r.u).total;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-1e-3, 1e-3);
    for (int i = 0; i < 20; ++i) {
        ScalarField v = r.u;
        for (double& x : v.raw())
            x += uni(rng);
        EXPECT_GE(eval_energy(pd, v).total, e0 - 1e-12);
    }
}

TEST(Solver, ReportsStallWhenIterationsRunOut)
{
    const Problem pr = Problem::denoising(fixtures::noisy_piecewise_affine(), 10.0, DensityParams{1.4, 2, 2, 0.0});
    SolveConfig cfg;
    cfg.max_iter = 3;
    const SolveResult r = solve(pr, cfg);
    EXPECT_FALSE(r.report.converged());
    EXPECT_TRUE(r.report.stages.front().stalled);
}

TEST(Solver, Deterministic)
{
    const Problem pr = Problem::denoising(fixtures::noisy_piecewise_affine(9, 12, 12), 10.0,
                                          DensityParams{1.4, 2, 2, 0.0});
    const SolveResult a = solve(pr, SolveConfig{});
    const SolveResult b = solve(pr, SolveConfig{});
    EXPECT_EQ(a.u.raw(), b.u.raw());
    EXPECT_EQ(a.report.total_iterations, b.report.total_iterations);
}

TEST(Solver, RejectsMismatchedStart)
{
    const Problem pr = Problem::denoising(ScalarField(Extents{6, 6}), 1.0, DensityParams{1.4, 1, 2, 0.0});
    EXPECT_THROW(solve(pr, SolveConfig{}, ScalarField(Extents{5, 6})), size_error);
}
