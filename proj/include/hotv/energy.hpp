#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "density.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "stencil.hpp"
#include "summation.hpp"

namespace hotv {

/// Data term and regularizer of
///
///     J_delta[u] = h^2 sum_p [Phi_mu(|Gu|_p) + delta |Gu|_p^2] + (lambda/2) h^2 sum_{observed p} (u_p - f_p)^2.
///
/// On a grid the m-th difference has no singular part, so this is also the
/// relaxed functional.
struct Problem {
    ScalarField f;
    Mask mask;
    double lambda = 1.0;
    DensityParams density;

    Problem() = default;
    Problem(ScalarField data, Mask m, double lam, DensityParams d)
        : f(std::move(data)), mask(std::move(m)), lambda(lam), density(d)
    {
        validate();
    }

    /// Pure denoising problem (nothing masked).
    static Problem denoising(ScalarField data, double lam, DensityParams d)
    {
        Mask m = Mask::full(data.extents());
        return Problem(std::move(data), std::move(m), lam, d);
    }

    void validate() const
    {
        density.validate();
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw domain_error("fidelity weight lambda must be > 0, got " + std::to_string(lambda));
        require_same_extents(f.extents(), mask.extents(), "problem data vs mask");
        if (mask.observed_count() == 0)
            throw domain_error("problem has no observed pixel");
        // constructing the operator checks the grid is large enough for m
        DifferenceOperator(f.extents(), f.h(), density.m);
    }

    const Extents& extents() const noexcept { return f.extents(); }
    double h() const noexcept { return f.h(); }
    double cell_area() const noexcept { return f.h() * f.h(); }
};

struct EnergyBreakdown {
    double regularizer = 0.0;
    double quadratic_delta = 0.0;
    double fidelity = 0.0;
    double total = 0.0;
};

namespace detail {

inline void require_matching(const Problem& pr, const ScalarField& u)
{
    require_same_extents(pr.extents(), u.extents(), "energy argument");
}

inline EnergyBreakdown energy_from_gradient(const Problem& pr, const SymTensorField& gu, const ScalarField& u,
                                            double delta)
{
    CompensatedSum reg, quad, fid;
    const double mu = pr.density.mu;
    for (std::size_t p = 0; p < gu.pixels(); ++p) {
        const double r = gu.norm_at(p);
        reg.add(phi(mu, r));
        quad.add(r * r);
    }
    for (std::size_t p = 0; p < u.size(); ++p) {
        if (!pr.mask.observed(p))
            continue;
        const double d = u[p] - pr.f[p];
        fid.add(d * d);
    }
    const double area = pr.cell_area();
    EnergyBreakdown e;
    e.regularizer = area * reg.value();
    e.quadratic_delta = area * delta * quad.value();
    e.fidelity = 0.5 * pr.lambda * area * fid.value();
    e.total = e.regularizer + e.quadratic_delta + e.fidelity;
    return e;
}

} // namespace detail

/// Energy with the problem's own delta.
inline EnergyBreakdown eval_energy(const Problem& pr, const ScalarField& u)
{
    detail::require_matching(pr, u);
    const DifferenceOperator g(pr.extents(), pr.h(), pr.density.m);
    return detail::energy_from_gradient(pr, g.apply(u), u, pr.density.delta);
}

/// Exact gradient of eval_energy:
/// h^2 [G^T(2 delta Gu + DF(Gu)) + lambda chi_obs (u - f)].
inline ScalarField grad_energy(const Problem& pr, const ScalarField& u)
{
    detail::require_matching(pr, u);
    const DifferenceOperator g(pr.extents(), pr.h(), pr.density.m);
    SymTensorField flux = g.apply(u);
    const double mu = pr.density.mu;
    const double two_delta = 2.0 * pr.density.delta;
    for (std::size_t p = 0; p < flux.pixels(); ++p) {
        const double gain = dphi_over_r(mu, flux.norm_at(p)) + two_delta;
        for (std::size_t k = 0; k < flux.components(); ++k)
            flux.plane(k)[p] *= gain;
    }
    ScalarField out = g.adjoint(flux);
    for (std::size_t p = 0; p < out.size(); ++p)
        if (pr.mask.observed(p))
            out[p] += pr.lambda * (u[p] - pr.f[p]);
    out *= pr.cell_area();
    return out;
}

/// L = h^2 (||G||^2 (2 delta + 1) + lambda), using sup D^2 Phi = Phi''(0) = 1.
inline double lipschitz_bound(const Problem& pr, double norm_sq_upper, double delta)
{
    return pr.cell_area() * (norm_sq_upper * (2.0 * delta + 1.0) + pr.lambda);
}

inline double lipschitz_bound(const Problem& pr, std::uint64_t seed = 0x5eed)
{
    const DifferenceOperator g(pr.extents(), pr.h(), pr.density.m);
    return lipschitz_bound(pr, operator_norm_upper(g, seed), pr.density.delta);
}

/// Reusable evaluator for iterative solvers: energy and gradient of J_delta
/// for an arbitrary delta from one application of G.
class EnergyEvaluator {
public:
    explicit EnergyEvaluator(const Problem& pr)
        : pr_(&pr), g_(pr.extents(), pr.h(), pr.density.m), gu_(pr.extents(), pr.h(), pr.density.m)
    {}

    const DifferenceOperator& op() const noexcept { return g_; }
    const Problem& problem() const noexcept { return *pr_; }

    EnergyBreakdown energy(const ScalarField& u, double delta)
    {
        g_.apply_into(u, gu_);
        return detail::energy_from_gradient(*pr_, gu_, u, delta);
    }

    /// Fills grad and returns the energy at u.
    EnergyBreakdown energy_and_gradient(const ScalarField& u, double delta, ScalarField& grad)
    {
        g_.apply_into(u, gu_);
        const EnergyBreakdown e = detail::energy_from_gradient(*pr_, gu_, u, delta);
        const double mu = pr_->density.mu;
        for (std::size_t p = 0; p < gu_.pixels(); ++p) {
            const double gain = dphi_over_r(mu, gu_.norm_at(p)) + 2.0 * delta;
            for (std::size_t k = 0; k < gu_.components(); ++k)
                gu_.plane(k)[p] *= gain;
        }
        g_.adjoint_into(gu_, grad);
        for (std::size_t p = 0; p < grad.size(); ++p)
            if (pr_->mask.observed(p))
                grad[p] += pr_->lambda * (u[p] - pr_->f[p]);
        grad *= pr_->cell_area();
        return e;
    }

private:
    const Problem* pr_;
    DifferenceOperator g_;
    SymTensorField gu_;
};

} // namespace hotv
