#pragma once

// The mu-elliptic density family
//
//     Phi_mu(r) = int_0^r int_0^s (1 + t)^(-mu) dt ds,   mu > 1,
//
// its derivatives, and the radial tensor density F(Z) = Phi_mu(|Z|) with the
// optional quadratic term delta |Z|^2.

#include <cmath>
#include <concepts>
#include <limits>
#include <string>

#include "error.hpp"
#include "tensor.hpp"

namespace hotv {

struct DensityParams {
    double mu = 1.4;
    int m = 2;
    int n = 2;
    double delta = 0.0;

    void validate() const
    {
        if (!(mu > 1.0) || !std::isfinite(mu))
            throw domain_error("density exponent mu must be finite and > 1, got " + std::to_string(mu));
        if (m < 1 || m > max_order)
            throw domain_error("derivative order m must be 1, 2 or 3, got " + std::to_string(m));
        if (n < 1 || n > max_dim)
            throw domain_error("dimension n must be 1 or 2, got " + std::to_string(n));
        if (!(delta >= 0.0) || !std::isfinite(delta))
            throw domain_error("delta must be finite and >= 0, got " + std::to_string(delta));
    }

    DensityParams with_delta(double d) const
    {
        DensityParams p = *this;
        p.delta = d;
        return p;
    }
};

/// Constants of the linear growth sandwich nu2|Z| - nu3 <= F(Z) <= nu1|Z| and
/// the radius of the conjugate's effective domain.
struct GrowthConstants {
    double nu1;
    double nu2;
    double nu3;
    double s_max;
};

namespace detail {

template <std::floating_point Real>
void check_mu(Real mu)
{
    if (!(mu > Real(1)) || !std::isfinite(mu))
        throw domain_error("mu must be > 1");
}

template <std::floating_point Real>
void check_r(Real r)
{
    if (!(r >= Real(0)))
        throw domain_error("r must be >= 0");
}

// Below this |mu - 2| the 1/(mu - 2) closed form is replaced by its series.
inline constexpr double mu_two_window = 1e-4;

// (exp(-eps*L) - 1)/eps, the eps -> 0 limit being -L.
template <std::floating_point Real>
Real expm1_quotient(Real eps, Real L)
{
    using std::abs;
    if (abs(eps) > Real(mu_two_window))
        return std::expm1(-eps * L) / eps;
    // -L * sum_k (-eps L)^k / (k+1)!
    const Real x = -eps * L;
    Real term = Real(1);
    Real sum = Real(1);
    for (int k = 1; k < 60; ++k) {
        term *= x / Real(k + 1);
        sum += term;
        if (abs(term) <= std::numeric_limits<Real>::epsilon() * abs(sum))
            break;
    }
    return -L * sum;
}

} // namespace detail

/// Phi_mu(r). Closed form away from mu = 2 (series in mu - 2 inside the
/// window), Taylor series in r where (mu + 1) r is small.
template <std::floating_point Real>
Real phi(Real mu, Real r)
{
    detail::check_mu(mu);
    detail::check_r(r);
    if (r == Real(0))
        return Real(0);
    if (std::isinf(r))
        return r;
    if ((mu + Real(1)) * r < Real(0.25)) {
        // sum_j binom(-mu, j) r^(j+2) / ((j+1)(j+2))
        Real b = Real(1);
        Real rp = r * r;
        Real sum = Real(0);
        for (int j = 0; j < 200; ++j) {
            const Real term = b * rp / Real((j + 1) * (j + 2));
            sum += term;
            if (std::abs(term) <= std::numeric_limits<Real>::epsilon() * std::abs(sum))
                break;
            b *= -(mu + Real(j)) / Real(j + 1);
            rp *= r;
        }
        return sum;
    }
    const Real L = std::log1p(r);
    return (r + detail::expm1_quotient(mu - Real(2), L)) / (mu - Real(1));
}

/// Phi_mu'(r) = (1 - (1+r)^(1-mu)) / (mu - 1).
template <std::floating_point Real>
Real dphi(Real mu, Real r)
{
    detail::check_mu(mu);
    detail::check_r(r);
    return -std::expm1((Real(1) - mu) * std::log1p(r)) / (mu - Real(1));
}

/// Phi_mu''(r) = (1+r)^(-mu).
template <std::floating_point Real>
Real ddphi(Real mu, Real r)
{
    detail::check_mu(mu);
    detail::check_r(r);
    return std::exp(-mu * std::log1p(r));
}

/// Phi_mu'(r) / r, continuously extended by 1 at r = 0.
template <std::floating_point Real>
Real dphi_over_r(Real mu, Real r)
{
    detail::check_mu(mu);
    detail::check_r(r);
    if (r == Real(0))
        return Real(1);
    return dphi(mu, r) / r;
}

/// (mu - 1) Phi_mu(r) - r, evaluated without forming the difference:
/// ((1+r)^(2-mu) - 1)/(mu - 2) (or -log(1+r) at mu = 2).
template <std::floating_point Real>
Real tv_deviation(Real mu, Real r)
{
    detail::check_mu(mu);
    detail::check_r(r);
    return detail::expm1_quotient(mu - Real(2), std::log1p(r));
}

/// F(Z) = Phi_mu(|Z|) (+ delta |Z|^2).
inline double f_value(const DensityParams& p, const SymTensor& z)
{
    const double r = norm(z);
    return phi(p.mu, r) + p.delta * r * r;
}

/// DF(Z) = Phi'(|Z|) Z/|Z| (+ 2 delta Z); zero at Z = 0.
inline SymTensor df(const DensityParams& p, const SymTensor& z)
{
    const double r = norm(z);
    return (dphi_over_r(p.mu, r) + 2.0 * p.delta) * z;
}

/// D^2F(Z)[X] via the radial/tangential split around Zhat = Z/|Z|.
inline SymTensor d2f_apply(const DensityParams& p, const SymTensor& z, const SymTensor& x)
{
    const double r = norm(z);
    SymTensor out = x;
    if (r == 0.0) {
        out *= ddphi(p.mu, 0.0) + 2.0 * p.delta;
        return out;
    }
    const SymTensor zhat = (1.0 / r) * z;
    const double radial = contract(zhat, x);
    const double tangential_gain = dphi_over_r(p.mu, r);
    out *= tangential_gain + 2.0 * p.delta;
    out += ((ddphi(p.mu, r) - tangential_gain) * radial) * zhat;
    return out;
}

/// D^2F(Z)(X, X).
inline double d2f_quadratic(const DensityParams& p, const SymTensor& z, const SymTensor& x)
{
    return contract(x, d2f_apply(p, z, x));
}

/// F^inf(Z) = |Z|/(mu - 1). Only defined for delta = 0.
inline double f_recession(const DensityParams& p, const SymTensor& z)
{
    detail::check_mu(p.mu);
    if (p.delta > 0.0)
        throw domain_error("recession function of the delta-regularized density is +inf");
    return norm(z) / (p.mu - 1.0);
}

/// Convex conjugate of Phi_mu as a function of s = |kappa|.
inline double phi_conjugate(double mu, double s)
{
    detail::check_mu(mu);
    if (!(s >= 0.0))
        throw domain_error("conjugate argument must be >= 0");
    if (s == 0.0)
        return 0.0;
    const double slack = 1.0 - (mu - 1.0) * s;
    if (slack > 0.0) {
        // unique root of Phi'(r) = s
        const double r_star = std::expm1(-std::log(slack) / (mu - 1.0));
        if (std::isinf(r_star))
            return mu > 2.0 ? 1.0 / ((mu - 1.0) * (mu - 2.0)) : std::numeric_limits<double>::infinity();
        return s * r_star - phi(mu, r_star);
    }
    if (slack == 0.0 && mu > 2.0)
        return 1.0 / ((mu - 1.0) * (mu - 2.0));
    return std::numeric_limits<double>::infinity();
}

/// nu2 = nu1/2; the smallest valid nu3 is then sup_r (nu2 r - Phi(r)) = Phi*(nu2).
inline GrowthConstants growth_constants(double mu)
{
    detail::check_mu(mu);
    const double nu1 = 1.0 / (mu - 1.0);
    return {nu1, 0.5 * nu1, phi_conjugate(mu, 0.5 * nu1), nu1};
}

/// F*(kappa). Returns +inf outside the effective domain |kappa| <= 1/(mu-1).
inline double f_conjugate(const DensityParams& p, const SymTensor& kappa)
{
    if (p.delta > 0.0)
        throw domain_error("conjugate is only provided for the unregularized density");
    return phi_conjugate(p.mu, norm(kappa));
}

} // namespace hotv
