#pragma once

// Dual certificates for the unregularized energy J (delta = 0).
//
// With the discrete Lagrangian
//
//     l(w, kappa) = h^2 sum_p [kappa_p : (Gw)_p - F*(kappa_p)] + (lambda/2) h^2 sum_{obs} (w - f)^2
//
// and g = G^T kappa, the infimum over w is finite only if g vanishes on the
// hole D. It is then attained at w = f - g/lambda on the observed set and
//
//     R[kappa] = h^2 sum_{obs} [g f - g^2/(2 lambda)] - h^2 sum_p F*(kappa_p)
//
// is a lower bound on min J. Candidates come from kappa = DF(Gu) (without
// the 2 delta Gu part, which can leave the conjugate's domain), clipped
// radially into |kappa| < 1/(mu-1) and corrected to G^T kappa = 0 on D.

#include <algorithm>
#include <cmath>
#include <limits>

#include "density.hpp"
#include "energy.hpp"
#include "grid.hpp"
#include "stencil.hpp"
#include "summation.hpp"

namespace hotv {

struct ProjectionOptions {
    double feasibility_margin = 1e-6; // |kappa| <= (1 - margin)/(mu - 1)
    double cg_tol = 1e-10;            // relative residual of the hole correction
    int max_cg_iter = 0;              // 0: 10 * |D| + 100
};

struct DualCandidate {
    SymTensorField kappa;
    bool feasible = false;
    double max_norm_ratio = 0.0;            // sup_p |kappa_p| (mu - 1)
    double divergence_residual_on_D = 0.0;  // sup_{p in D} |G^T kappa|_p
    double clip_magnitude = 0.0;            // sup_p of the radial clip change
    double correction_norm = 0.0;           // sup_p of the hole correction (incl. rescale)
    int cg_iterations = 0;
};

struct Certificate {
    double primal_value = 0.0;
    double dual_value = 0.0;
    double gap = 0.0;
    double relative_gap = 0.0;
    double duality_relation_residual = 0.0; // sup_p |kappa_p - DF((Gu)_p)|
    DualCandidate candidate;
};

/// DF(Gu) pointwise with the unregularized density.
inline SymTensorField sigma_from_primal(const Problem& pr, const ScalarField& u)
{
    require_same_extents(pr.extents(), u.extents(), "sigma_from_primal");
    const DifferenceOperator g(pr.extents(), pr.h(), pr.density.m);
    SymTensorField s = g.apply(u);
    for (std::size_t p = 0; p < s.pixels(); ++p) {
        const double gain = dphi_over_r(pr.density.mu, s.norm_at(p));
        for (std::size_t k = 0; k < s.components(); ++k)
            s.plane(k)[p] *= gain;
    }
    return s;
}

namespace detail {

inline double sup_hole_divergence(const Problem& pr, const ScalarField& div)
{
    double m = 0.0;
    for (std::size_t p = 0; p < div.size(); ++p)
        if (pr.mask.hole(p))
            m = std::max(m, std::abs(div[p]));
    return m;
}

inline void zero_observed(const Problem& pr, ScalarField& v)
{
    for (std::size_t p = 0; p < v.size(); ++p)
        if (pr.mask.observed(p))
            v[p] = 0.0;
}

} // namespace detail

/// Radial clip, then the minimal-norm correction kappa += G y (y supported on
/// D) with (G^T kappa)|_D = 0, then a uniform rescale if the correction pushed
/// some |kappa_p| past the clip radius. The constraint is homogeneous, so the
/// rescale keeps it.
inline DualCandidate project_feasible(const Problem& pr, SymTensorField kappa, const ProjectionOptions& opt = {})
{
    const DifferenceOperator g(pr.extents(), pr.h(), pr.density.m);
    if (!(kappa.shape() == g.shape()))
        throw size_error("dual candidate order does not match the problem");
    require_same_extents(pr.extents(), kappa.extents(), "project_feasible");

    const double mu = pr.density.mu;
    const double radius = (1.0 - opt.feasibility_margin) / (mu - 1.0);
    DualCandidate out;

    for (std::size_t p = 0; p < kappa.pixels(); ++p) {
        const double n = kappa.norm_at(p);
        if (n > radius) {
            const double s = radius / n;
            for (std::size_t k = 0; k < kappa.components(); ++k)
                kappa.plane(k)[p] *= s;
            out.clip_magnitude = std::max(out.clip_magnitude, n - radius);
        }
    }

    bool cg_ok = true;
    if (!pr.mask.pure_denoising()) {
        // (G^T G restricted to D) y = -(G^T kappa)|_D
        ScalarField b = g.adjoint(kappa);
        for (std::size_t p = 0; p < b.size(); ++p)
            b[p] = pr.mask.hole(p) ? -b[p] : 0.0;
        const double bnorm = norm2(b);
        ScalarField y(pr.extents(), pr.h());
        if (bnorm > 0.0) {
            const int max_it = opt.max_cg_iter > 0 ? opt.max_cg_iter : static_cast<int>(10 * pr.mask.hole_count() + 100);
            ScalarField r = b;
            ScalarField d = r;
            ScalarField ad(pr.extents(), pr.h());
            SymTensorField gd(pr.extents(), pr.h(), pr.density.m);
            double rr = dot(r, r);
            const double stop = opt.cg_tol * bnorm;
            int it = 0;
            while (std::sqrt(rr) > stop && it < max_it) {
                g.apply_into(d, gd);
                g.adjoint_into(gd, ad);
                detail::zero_observed(pr, ad);
                const double dad = dot(d, ad);
                if (!(dad > 0.0))
                    break;
                const double alpha = rr / dad;
                y.axpy(alpha, d);
                r.axpy(-alpha, ad);
                const double rr_next = dot(r, r);
                const double beta = rr_next / rr;
                rr = rr_next;
                for (std::size_t p = 0; p < d.size(); ++p)
                    d[p] = r[p] + beta * d[p];
                ++it;
            }
            out.cg_iterations = it;
            cg_ok = std::sqrt(rr) <= stop;
            const SymTensorField corr = g.apply(y);
            out.correction_norm = max_pointwise_norm(corr);
            kappa += corr;
        }
    }

    double max_norm = max_pointwise_norm(kappa);
    if (max_norm > radius) {
        const double s = radius / max_norm;
        out.correction_norm += (1.0 - s) * max_norm;
        kappa *= s;
        max_norm = max_pointwise_norm(kappa);
    }

    out.max_norm_ratio = max_norm * (mu - 1.0);
    out.divergence_residual_on_D = detail::sup_hole_divergence(pr, g.adjoint(kappa));
    out.feasible = cg_ok && out.max_norm_ratio < 1.0;
    out.kappa = std::move(kappa);
    return out;
}

/// R[kappa]; -inf for infeasible candidates.
inline double eval_dual(const Problem& pr, const DualCandidate& cand)
{
    if (!cand.feasible)
        return -std::numeric_limits<double>::infinity();
    const DifferenceOperator g(pr.extents(), pr.h(), pr.density.m);
    const ScalarField div = g.adjoint(cand.kappa);
    CompensatedSum linear, conj;
    for (std::size_t p = 0; p < div.size(); ++p) {
        if (!pr.mask.observed(p))
            continue;
        linear.add(div[p] * pr.f[p] - div[p] * div[p] / (2.0 * pr.lambda));
    }
    for (std::size_t p = 0; p < cand.kappa.pixels(); ++p)
        conj.add(phi_conjugate(pr.density.mu, cand.kappa.norm_at(p)));
    const double area = pr.cell_area();
    return area * linear.value() - area * conj.value();
}

/// Unregularized primal value J[u].
inline double primal_value(const Problem& pr, const ScalarField& u)
{
    Problem plain = pr;
    plain.density.delta = 0.0;
    return eval_energy(plain, u).total;
}

inline double relative_gap(double gap, double primal)
{
    if (gap == 0.0)
        return 0.0;
    return gap / std::max(std::abs(primal), std::numeric_limits<double>::min());
}

inline Certificate certify(const Problem& pr, const ScalarField& u, const ProjectionOptions& opt = {})
{
    Certificate c;
    const SymTensorField sigma = sigma_from_primal(pr, u);
    c.candidate = project_feasible(pr, sigma, opt);
    c.primal_value = primal_value(pr, u);
    c.dual_value = eval_dual(pr, c.candidate);
    c.gap = c.primal_value - c.dual_value;
    c.relative_gap = relative_gap(c.gap, c.primal_value);
    const SymTensorField diff = c.candidate.kappa - sigma;
    c.duality_relation_residual = max_pointwise_norm(diff);
    return c;
}

} // namespace hotv
