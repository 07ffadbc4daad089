// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hotv/hotv.hpp"

using namespace hotv;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

SymTensor random_tensor(std::mt19937_64& rng, TensorShape s, double magnitude)
{
    std::normal_distribution<double> g(0.0, 1.0);
    SymTensor t(s);
    for (std::size_t k = 0; k < t.size(); ++k)
        t[k] = g(rng);
    const double n = norm(t);
    return n > 0.0 ? (magnitude / n) * t : t;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

ScalarField random_field(std::mt19937_64& rng, Extents e, double amplitude = 1.0)
{
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    ScalarField f(e);
    for (double& v : f.raw())
        v = u(rng);
    return f;
}

SymTensorField random_tensor_field(std::mt19937_64& rng, Extents e, int order, double amplitude = 1.0)
{
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    SymTensorField p(e, 1.0, order);
    for (double& v : p.raw())
        v = u(rng);
    return p;
}

// 1. Fenchel-Young equality, gradient and Hessian-apply vs finite differences.
Outcome density_calculus()
{
    std::mt19937_64 rng(101);
    double fy = 0.0, grad = 0.0, hess = 0.0;
    for (double mu : {1.2, 1.4, 2.0, 3.0}) {
        for (int i = 0; i < 1000; ++i) {
            const int m = 1 + i % 3;
            const TensorShape s(m, 2);
            const DensityParams p{mu, m, 2, 0.0};
            const SymTensor z = random_tensor(rng, s, log_uniform(rng, 1e-3, 1e3));
            const SymTensor x = random_tensor(rng, s, 1.0);
            const SymTensor dz = df(p, z);
            const double nz = norm(z);
            fy = std::max(fy, std::abs(f_value(p, z) + f_conjugate(p, dz) - contract(z, dz)) / (1.0 + nz));

            const double t = 1e-5 * std::max(nz, 1e-2);
            const double fd = (f_value(p, z + t * x) - f_value(p, z - t * x)) / (2.0 * t);
            grad = std::max(grad, std::abs(fd - contract(dz, x)) / std::max(norm(dz), 1e-300));

            const SymTensor fdh = (1.0 / (2.0 * t)) * (df(p, z + t * x) - df(p, z - t * x));
            const SymTensor hx = d2f_apply(p, z, x);
            hess = std::max(hess, norm(fdh - hx) / std::max(norm(hx), 1e-300));
        }
    }
    return {fy <= 1e-10 && grad <= 1e-6 && hess <= 1e-4,
            fmt("max FY defect %.2e (<= 1e-10), grad rel err %.2e (<= 1e-6), hessian rel err %.2e (<= 1e-4)", fy, grad,
                hess)};
}

// 2. |DF(Z)| (mu - 1) < 1.
Outcome gradient_bound()
{
    std::mt19937_64 rng(202);
    double worst = 0.0;
    // beyond |Z| ~ 1e4 the deficit (1+|Z|)^(1-mu) drops below double resolution for mu = 3
    for (double mu : {1.2, 1.4, 2.0, 3.0}) {
        for (int i = 0; i < 10000; ++i) {
            const int m = 1 + i % 3;
            const DensityParams p{mu, m, 2, 0.0};
            const SymTensor z = random_tensor(rng, TensorShape(m, 2), log_uniform(rng, 1e-6, 1e4));
            worst = std::max(worst, norm(df(p, z)) * (mu - 1.0));
        }
    }
    return {worst < 1.0, fmt("sup |DF| (mu-1) = %.15f (< 1)", worst)};
}

// 3. Distance to the TV limit.
Outcome tv_limit()
{
    const double e100 = tv_limit_error(100.0, 100.0);
    const double e10 = tv_limit_error(10.0, 100.0);
    return {e100 <= 1.0 / 98.0 && e10 <= 1.0 / 8.0,
            fmt("mu=100: %.6e (<= %.6e), mu=10: %.6e (<= %.6e)", e100, 1.0 / 98.0, e10, 1.0 / 8.0)};
}

// 4. <Gu, P> = <u, G^T P>.
Outcome adjointness()
{
    std::mt19937_64 rng(404);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int m = 1 + i % 3;
        std::uniform_int_distribution<int> side(m + 1, 64);
        const Extents e{side(rng), side(rng)};
        const DifferenceOperator g(e, 1.0, m);
        const ScalarField u = random_field(rng, e);
        const SymTensorField p = random_tensor_field(rng, e, m);
        const double lhs = dot(g.apply(u), p);
        const double rhs = dot(u, g.adjoint(p));
        worst = std::max(worst, std::abs(lhs - rhs) / (norm2(u) * norm2(p)));
    }
    return {worst <= 1e-12, fmt("max |<Gu,P> - <u,G'P>| / (|u||P|) = %.2e (<= 1e-12)", worst)};
}

// 5. grad_energy vs directional finite differences of eval_energy.
Outcome energy_gradient()
{
    std::mt19937_64 rng(505);
    const Extents e{16, 16};
    double worst = 0.0;
    for (double hole : {0.0, 0.3}) {
        const Mask mask = hole > 0.0 ? fixtures::random_hole(e, hole, 505) : Mask::full(e);
        for (double delta : {0.0, 1e-2}) {
            const Problem pr(random_field(rng, e), mask, 10.0, DensityParams{1.4, 2, 2, delta});
            const ScalarField u = random_field(rng, e);
            const ScalarField g = grad_energy(pr, u);
            for (int d = 0; d < 20; ++d) {
                const ScalarField dir = random_field(rng, e);
                const double t = 1e-5;
                const double fd = (eval_energy(pr, u + t * dir).total - eval_energy(pr, u - t * dir).total) / (2.0 * t);
                const double an = dot(g, dir);
                worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-300));
            }
        }
    }
    return {worst <= 1e-6, fmt("max directional rel err %.2e over 80 directions (<= 1e-6)", worst)};
}

// 6. Weak duality over random feasible candidates and random primal fields.
Outcome weak_duality()
{
    std::mt19937_64 rng(606);
    const Extents e{8, 8};
    double worst = -1e300;
    int pairings = 0, infeasible = 0;
    for (double hole : {0.0, 0.3}) {
        const Mask mask = hole > 0.0 ? fixtures::random_hole(e, hole, 606) : Mask::full(e);
        const Problem pr(random_field(rng, e), mask, 5.0, DensityParams{1.4, 2, 2, 0.0});
        std::vector<double> duals;
        for (int i = 0; i < 100; ++i) {
            const double amp = log_uniform(rng, 1e-2, 10.0);
            const DualCandidate c = project_feasible(pr, random_tensor_field(rng, e, 2, amp));
            if (!c.feasible) {
                ++infeasible;
                continue;
            }
            duals.push_back(eval_dual(pr, c));
        }
        for (int j = 0; j < 100; ++j) {
            const double pv = primal_value(pr, random_field(rng, e, log_uniform(rng, 1e-2, 10.0)));
            for (double dv : duals) {
                worst = std::max(worst, dv - pv);
                ++pairings;
            }
        }
    }
    return {infeasible == 0 && worst <= 1e-10,
            fmt("max (dual - primal) = %.3e over %.0f pairings (<= 1e-10), infeasible candidates %.0f", worst,
                pairings, infeasible)};
}

const Problem& certification_problem()
{
    static const Problem pr =
        Problem::denoising(fixtures::noisy_piecewise_affine(), 10.0, DensityParams{1.4, 2, 2, 0.0});
    return pr;
}

// 7. Duality-gap certificate on the 32x32 fixture.
Outcome certification()
{
    const Problem& pr = certification_problem();
    const SolveResult res = solve(pr, SolveConfig{});
    const Certificate c = certify(pr, res.u);
    const double drr_bound = 1e-4 / (pr.density.mu - 1.0);
    return {c.candidate.feasible && c.relative_gap <= 1e-4 && c.duality_relation_residual <= drr_bound,
            fmt("relative gap %.2e (<= 1e-4), duality relation residual %.2e (<= %.2e), %.0f iterations",
                c.relative_gap, c.duality_relation_residual, drr_bound, res.report.total_iterations)};
}

// 8. Two initializations reach the same observed values and the same |Gu|.
Outcome uniqueness()
{
    const ScalarField f = fixtures::noisy_piecewise_affine();
    const Problem pr(f, fixtures::box_hole(f.extents(), 10, 12, 18, 20), 10.0, DensityParams{1.4, 2, 2, 0.0});
    std::mt19937_64 rng(808);
    const ScalarField a0 = initial_guess(pr);
    const ScalarField b0 = a0 + random_field(rng, f.extents(), 0.2);
    // the perturbed start also takes a shorter schedule, so the two runs do not
    // share the strongly convex first stage
    SolveConfig short_schedule;
    short_schedule.delta0 = 1e-3;
    const SolveResult a = solve(pr, SolveConfig{}, a0);
    const SolveResult b = solve(pr, short_schedule, b0);
    double obs = 0.0, grad = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p)
        if (pr.mask.observed(p))
            obs = std::max(obs, std::abs(a.u[p] - b.u[p]));
    const SymTensorField ga = grad_m(a.u, 2), gb = grad_m(b.u, 2);
    for (std::size_t p = 0; p < ga.pixels(); ++p)
        grad = std::max(grad, std::abs(ga.norm_at(p) - gb.norm_at(p)));
    const bool conv = a.report.converged() && b.report.converged();
    return {conv && obs <= 1e-5 && grad <= 1e-5,
            fmt("max observed diff %.2e (<= 1e-5), max | |Gu_a| - |Gu_b| | %.2e (<= 1e-5), both converged: %.0f", obs,
                grad, conv ? 1.0 : 0.0)};
}

// 9. Second order staircases no more than first order on the ramp fixture.
Outcome staircasing()
{
    const ScalarField f = fixtures::staircase_ramp();
    int jumps[2] = {0, 0};
    bool conv = true;
    for (int m : {1, 2}) {
        const Problem pr = Problem::denoising(f, fixtures::staircase_lambda, DensityParams{1.4, m, 1, 0.0});
        const SolveResult r = solve(pr, SolveConfig{});
        conv = conv && r.report.converged();
        jumps[m - 1] = staircase_metric(r.u).jump_count;
    }
    return {conv && jumps[1] < jumps[0],
            fmt("jump_count m=1: %.0f, m=2: %.0f (m=2 strictly fewer), converged: %.0f", jumps[0], jumps[1],
                conv ? 1.0 : 0.0)};
}

// 10. Smooth approximation of the hat function.
Outcome approximation()
{
    const PiecewiseSignal u = PiecewiseSignal::hat();
    bool ok = true;
    std::string detail;
    double tv_err = 0.0;
    for (double t : {1e-1, 1e-2, 1e-3}) {
        const ApproxResult r = smooth_approximate(u, t, Interval{0.75, 1.0});
        ok = ok && r.ok && r.achieved <= t;
        detail += fmt("target %.0e: %.2e; ", t, r.achieved);
        tv_err = std::abs(r.approximant_tv - r.kink_mass);
    }
    ok = ok && tv_err <= 1e-3;
    return {ok, detail + fmt("finest |TV(phi'') - kink mass| %.2e (<= 1e-3)", tv_err)};
}

// 11. Excess vanishes on polynomials of degree m and ignores affine terms.
Outcome excess_sanity()
{
    const Extents e{24, 20};
    double zero = 0.0, shift = 0.0;
    std::mt19937_64 rng(1111);
    for (int m = 1; m <= 3; ++m) {
        ScalarField poly(e), affine(e);
        for (int y = 0; y < e.height; ++y)
            for (int x = 0; x < e.width; ++x) {
                const double X = 0.125 * x, Y = 0.125 * y;
                poly(x, y) = std::pow(X, m) - 0.5 * std::pow(Y, m) + 0.25 * X * std::pow(Y, m - 1) + 0.375;
                affine(x, y) = 0.3 * x - 1.7 * y + 2.1;
            }
        const ScalarField noise = random_field(rng, e);
        for (double rho : {1.0, 2.0, 3.5}) {
            const ExcessMap a = excess_map(poly, m, rho);
            zero = std::max(zero, max_abs(a.values));
            const ExcessMap b = excess_map(noise, m, rho);
            const ExcessMap c = excess_map(noise + affine, m, rho);
            shift = std::max(shift, max_abs(b.values - c.values) / std::max(max_abs(b.values), 1e-300));
        }
    }
    return {zero <= 1e-14 && shift <= 1e-12,
            fmt("max excess on degree-m polynomials %.2e (<= 1e-14), relative change under affine shift %.2e", zero,
                shift)};
}

} // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        double budget_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {1, "density calculus", 1.0, density_calculus},
        {2, "gradient bound", 1.0, gradient_bound},
        {3, "TV limit", 1.0, tv_limit},
        {4, "discrete adjointness", 5.0, adjointness},
        {5, "energy gradient", 5.0, energy_gradient},
        {6, "weak duality", 5.0, weak_duality},
        {7, "end-to-end certification", 60.0, certification},
        {8, "uniqueness on the observed set", 60.0, uniqueness},
        {9, "staircasing", 30.0, staircasing},
        {10, "smooth approximation", 30.0, approximation},
        {11, "excess sanity", 1.0, excess_sanity},
    };
    int failures = 0;
    for (const auto& c : all) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_seconds;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("%s criterion %2d (%s): %s; %.2f s (< %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget_seconds);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failures, all.size());
    return failures == 0 ? 0 : 1;
}
