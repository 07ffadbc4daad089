#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "hotv/dual.hpp"
#include "hotv/fixtures.hpp"
#include "hotv/solver.hpp"

using namespace hotv;

namespace {

ScalarField random_field(std::mt19937_64& rng, Extents e, double amp = 1.0)
{
    std::uniform_real_distribution<double> u(-amp, amp);
    ScalarField f(e);
    for (double& v : f.raw())
        v = u(rng);
    return f;
}

SymTensorField random_tensor_field(std::mt19937_64& rng, Extents e, int m, double amp)
{
    std::uniform_real_distribution<double> u(-amp, amp);
    SymTensorField p(e, 1.0, m);
    for (double& v : p.raw())
        v = u(rng);
    return p;
}

} // namespace

TEST(Dual, ProjectionIsFeasible)
{
    std::mt19937_64 rng(1);
    const Extents e{10, 9};
    for (int m = 1; m <= 3; ++m) {
        const Problem pr(random_field(rng, e), fixtures::random_hole(e, 0.3, 11), 5.0, DensityParams{1.4, m, 2, 0.0});
        for (double amp : {0.01, 1.0, 100.0}) {
            const DualCandidate c = project_feasible(pr, random_tensor_field(rng, e, m, amp));
            EXPECT_TRUE(c.feasible) << "m=" << m << " amp=" << amp;
            EXPECT_LT(max_pointwise_norm(c.kappa) * 0.4, 1.0);
            const ScalarField div = div_m_adjoint(c.kappa);
            for (std::size_t p = 0; p < div.size(); ++p) {
                if (pr.mask.hole(p)) {
                    EXPECT_LE(std::abs(div[p]), 1e-8 * (1.0 + amp));
                }
            }
        }
    }
}

TEST(Dual, ProjectionLeavesFeasibleDenoisingCandidatesAlone)
{
    std::mt19937_64 rng(2);
    const Extents e{6, 6};
    const Problem pr = Problem::denoising(random_field(rng, e), 1.0, DensityParams{2.0, 2, 2, 0.0});
    const SymTensorField k = random_tensor_field(rng, e, 2, 0.1);
    const DualCandidate c = project_feasible(pr, k);
    EXPECT_EQ(c.kappa.raw(), k.raw());
    EXPECT_EQ(c.clip_magnitude, 0.0);
    EXPECT_EQ(c.cg_iterations, 0);
}

TEST(Dual, DualValueByHand)
{
    // one nonzero component on a 1D grid, m = 1
    const Extents e{3, 1};
    const ScalarField f(e, 1.0, std::vector<double>{0.5, -0.25, 1.0});
    const Problem pr = Problem::denoising(f, 2.0, DensityParams{3.0, 1, 1, 0.0});
    SymTensorField k(e, 1.0, 1);
    k.raw() = {0.2, 0.0, 0.0};
    const DualCandidate c = project_feasible(pr, k);
    ASSERT_TRUE(c.feasible);
    // G^T kappa = (-0.2, 0.2, 0)
    const double g0 = -0.2, g1 = 0.2;
    const double linear = g0 * 0.5 - g0 * g0 / 4.0 + g1 * -0.25 - g1 * g1 / 4.0;
    EXPECT_NEAR(eval_dual(pr, c), linear - phi_conjugate(3.0, 0.2), 1e-15);
}

TEST(Dual, InfeasibleCandidateIsMinusInfinity)
{
    const Problem pr = Problem::denoising(ScalarField(Extents{4, 4}), 1.0, DensityParams{1.4, 1, 2, 0.0});
    DualCandidate c;
    c.kappa = SymTensorField(Extents{4, 4}, 1.0, 1);
    c.feasible = false;
    EXPECT_EQ(eval_dual(pr, c), -std::numeric_limits<double>::infinity());
}

TEST(Dual, WeakDualityOnRandomPairs)
{
    std::mt19937_64 rng(3);
    const Extents e{8, 8};
    for (int m = 1; m <= 2; ++m)
        for (double hole : {0.0, 0.25}) {
            const Mask mask = hole > 0 ? fixtures::random_hole(e, hole, 3) : Mask::full(e);
            const Problem pr(random_field(rng, e), mask, 3.0, DensityParams{1.6, m, 2, 0.0});
            for (int i = 0; i < 30; ++i) {
                const DualCandidate c = project_feasible(pr, random_tensor_field(rng, e, m, 2.0));
                const double pv = primal_value(pr, random_field(rng, e));
                EXPECT_LE(eval_dual(pr, c), pv + 1e-10);
            }
        }
}

TEST(Dual, CertificateClosesAtTheMinimizer)
{
    const ScalarField f = fixtures::noisy_piecewise_affine(4, 16, 16);
    for (bool hole : {false, true}) {
        const Mask mask = hole ? fixtures::box_hole(f.extents(), 5, 5, 9, 10) : Mask::full(f.extents());
        const Problem pr(f, mask, 10.0, DensityParams{1.4, 2, 2, 0.0});
        const SolveResult r = solve(pr, SolveConfig{});
        const Certificate c = certify(pr, r.u);
        EXPECT_TRUE(c.candidate.feasible);
        EXPECT_GE(c.gap, -1e-10);
        EXPECT_LE(c.relative_gap, 1e-4) << "hole=" << hole;
        EXPECT_NEAR(c.primal_value, primal_value(pr, r.u), 0.0);
    }
}

TEST(Dual, SigmaIsDensityGradient)
{
    std::mt19937_64 rng(5);
    const Extents e{7, 7};
    const Problem pr = Problem::denoising(random_field(rng, e), 1.0, DensityParams{1.4, 2, 2, 0.0});
    const ScalarField u = random_field(rng, e);
    const SymTensorField s = sigma_from_primal(pr, u);
    const SymTensorField gu = grad_m(u, 2);
    for (std::size_t p = 0; p < gu.pixels(); ++p)
        EXPECT_NEAR(norm(s.at(p) - df(pr.density, gu.at(p))), 0.0, 1e-14);
}

TEST(Dual, RelativeGapGuards)
{
    EXPECT_EQ(relative_gap(0.0, 0.0), 0.0);
    EXPECT_NEAR(relative_gap(1e-3, -2.0), 5e-4, 1e-18);
}
