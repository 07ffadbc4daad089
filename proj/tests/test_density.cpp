#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "hotv/density.hpp"

using namespace hotv;

namespace {

// Phi(r) = int_0^r (r - t)(1 + t)^(-mu) dt by composite Simpson in s = log(1 + t).
double phi_quadrature(double mu, double r, int n = 20000)
{
    const double b = std::log1p(r);
    const double h = b / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * (r - std::expm1(x)) * std::exp((1.0 - mu) * x);
    }
    return s * h / 3.0;
}

// sup_r (s r - Phi(r)) by a coarse scan and golden-section refinement.
double conjugate_brute(double mu, double s)
{
    double best_r = 0.0, best = 0.0;
    for (double r = 0.0; r < 1e9; r = r < 1.0 ? r + 1e-3 : r * 1.001) {
        const double v = s * r - phi(mu, r);
        if (v > best) {
            best = v;
            best_r = r;
        }
    }
    double a = best_r / 1.01, b = best_r * 1.01 + 2e-3;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 200; ++i) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (s * c - phi(mu, c) > s * d - phi(mu, d))
            b = d;
        else
            a = c;
    }
    const double r = 0.5 * (a + b);
    return std::max(best, s * r - phi(mu, r));
}

SymTensor random_tensor(std::mt19937_64& rng, int m, int n)
{
    std::normal_distribution<double> g(0.0, 1.0);
    SymTensor t(TensorShape(m, n));
    for (std::size_t k = 0; k < t.size(); ++k)
        t[k] = g(rng);
    return t;
}

} // namespace

TEST(Phi, KnownValues)
{
    // int_0^1 (1 - t)(1 + t)^(-3) dt = 1/4
    EXPECT_NEAR(phi(3.0, 1.0), 0.25, 1e-15);
    EXPECT_NEAR(dphi(1.5, 3.0), 1.0, 1e-15);
    EXPECT_NEAR(ddphi(3.0, 2.0), 1.0 / 27.0, 1e-16);
    EXPECT_NEAR(phi(2.0, 1.0), 1.0 - std::log(2.0), 1e-15);
    EXPECT_EQ(phi(1.4, 0.0), 0.0);
    EXPECT_EQ(dphi_over_r(1.4, 0.0), 1.0);
}

TEST(Phi, MatchesQuadrature)
{
    for (double mu : {1.1, 1.4, 2.0, 2.00001, 3.0, 10.0})
        for (double r : {1e-3, 0.05, 0.3, 1.0, 7.0, 50.0}) {
            const double q = phi_quadrature(mu, r);
            EXPECT_NEAR(phi(mu, r), q, 1e-10 * (1.0 + q)) << "mu=" << mu << " r=" << r;
        }
}

TEST(Phi, BranchesJoinContinuously)
{
    // small-r series vs closed form at the switch (mu + 1) r = 1/4
    for (double mu : {1.3, 2.5, 6.0}) {
        const double r0 = 0.25 / (mu + 1.0);
        const double below = phi(mu, std::nextafter(r0, 0.0));
        const double above = phi(mu, r0);
        EXPECT_NEAR(below, above, 1e-14 * above);
    }
    // series in mu - 2 vs closed form at the window edge
    for (double r : {0.5, 3.0, 100.0}) {
        const double a = phi(2.0 + 1e-4 * (1.0 - 1e-9), r);
        const double b = phi(2.0 + 1e-4 * (1.0 + 1e-9), r);
        EXPECT_NEAR(a, b, 1e-11 * (1.0 + a));
    }
}

TEST(Phi, DerivativesMatchFiniteDifferences)
{
    for (double mu : {1.2, 2.0, 4.0})
        for (double r : {0.01, 0.4, 3.0, 40.0}) {
            const double t = 1e-5 * r;
            EXPECT_NEAR(dphi(mu, r), (phi(mu, r + t) - phi(mu, r - t)) / (2 * t), 1e-7 * (1 + dphi(mu, r)));
            EXPECT_NEAR(ddphi(mu, r), (dphi(mu, r + t) - dphi(mu, r - t)) / (2 * t), 1e-7);
        }
}

TEST(Phi, LongDoubleAgreesWithDouble)
{
    for (double r : {0.01, 2.0, 300.0})
        EXPECT_NEAR(static_cast<double>(phi<long double>(1.4L, static_cast<long double>(r))), phi(1.4, r),
                    1e-14 * (1 + r));
}

TEST(Phi, RejectsBadArguments)
{
    EXPECT_THROW(phi(1.0, 1.0), domain_error);
    EXPECT_THROW(phi(1.5, -1.0), domain_error);
    EXPECT_THROW(phi(std::numeric_limits<double>::quiet_NaN(), 1.0), domain_error);
    EXPECT_THROW((DensityParams{1.4, 4, 2, 0.0}.validate()), domain_error);
    EXPECT_THROW((DensityParams{1.4, 2, 3, 0.0}.validate()), domain_error);
    EXPECT_THROW((DensityParams{1.4, 2, 2, -1.0}.validate()), domain_error);
}

TEST(Conjugate, MatchesBruteForce)
{
    for (double mu : {1.3, 2.0, 3.0})
        for (double frac : {0.05, 0.4, 0.9, 0.99}) {
            const double s = frac / (mu - 1.0);
            const double brute = conjugate_brute(mu, s);
            EXPECT_NEAR(phi_conjugate(mu, s), brute, 1e-8 * (1.0 + brute)) << "mu=" << mu << " s=" << s;
        }
}

TEST(Conjugate, EffectiveDomain)
{
    EXPECT_EQ(phi_conjugate(1.5, 0.0), 0.0);
    EXPECT_TRUE(std::isinf(phi_conjugate(1.5, 2.0 + 1e-9)));
    EXPECT_TRUE(std::isinf(phi_conjugate(1.5, 2.0)));
    // for mu > 2 the boundary value is finite: 1/((mu-1)(mu-2))
    EXPECT_NEAR(phi_conjugate(3.0, 0.5), 0.5, 1e-15);
    EXPECT_THROW(phi_conjugate(1.5, -0.1), domain_error);
}

TEST(Density, LinearGrowthSandwich)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> logr(-4.0, 5.0);
    for (double mu : {1.2, 1.4, 3.0}) {
        const GrowthConstants c = growth_constants(mu);
        const DensityParams p{mu, 2, 2, 0.0};
        for (int i = 0; i < 500; ++i) {
            SymTensor z = random_tensor(rng, 2, 2);
            z *= std::pow(10.0, logr(rng)) / norm(z);
            const double f = f_value(p, z);
            EXPECT_LE(f, c.nu1 * norm(z) + 1e-12);
            EXPECT_GE(f, c.nu2 * norm(z) - c.nu3 - 1e-12);
        }
        // nu3 is sharp: equality where Phi' = nu2
        const double r_star = std::pow(2.0, 1.0 / (mu - 1.0)) - 1.0;
        EXPECT_NEAR(phi(mu, r_star), c.nu2 * r_star - c.nu3, 1e-12 * (1.0 + r_star));
    }
}

TEST(Density, RecessionIsLimitOfScaledDensity)
{
    const DensityParams p{3.0, 2, 2, 0.0};
    std::mt19937_64 rng(8);
    const SymTensor z = random_tensor(rng, 2, 2);
    const double t = 1e9;
    EXPECT_NEAR(f_value(p, t * z) / t, f_recession(p, z), 1e-8);
    EXPECT_THROW(f_recession(p.with_delta(0.1), z), domain_error);
}

TEST(Density, HessianIsSymmetricAndPositive)
{
    std::mt19937_64 rng(9);
    const DensityParams p{1.4, 3, 2, 0.0};
    for (int i = 0; i < 100; ++i) {
        const SymTensor z = random_tensor(rng, 3, 2), x = random_tensor(rng, 3, 2), y = random_tensor(rng, 3, 2);
        EXPECT_NEAR(contract(y, d2f_apply(p, z, x)), contract(x, d2f_apply(p, z, y)), 1e-12);
        EXPECT_GT(d2f_quadratic(p, z, x), 0.0);
    }
}

TEST(Density, DeltaTermAddsQuadratic)
{
    std::mt19937_64 rng(10);
    const SymTensor z = random_tensor(rng, 1, 2);
    const DensityParams p{1.4, 1, 2, 0.0};
    EXPECT_NEAR(f_value(p.with_delta(0.3), z) - f_value(p, z), 0.3 * contract(z, z), 1e-14);
    EXPECT_NEAR(norm(df(p.with_delta(0.3), z) - df(p, z) - 0.6 * z), 0.0, 1e-14);
}
