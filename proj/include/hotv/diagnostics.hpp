#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "density.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "stencil.hpp"
#include "summation.hpp"
#include "tensor.hpp"

namespace hotv {

/// E(x, rho): mean over the (interior-clipped) pixel disk of |P - mean P|^2
/// with P = Gu. Zero and flagged undefined outside the interior.
struct ExcessMap {
    double rho = 1.0;
    ScalarField values;
    std::vector<bool> defined;
};

inline ExcessMap excess_map(const ScalarField& u, int m, double rho)
{
    if (!(rho >= 1.0))
        throw domain_error("excess radius must be >= 1 pixel");
    const DifferenceOperator g(u.extents(), u.h(), m);
    const SymTensorField gu = g.apply(u);
    const Extents e = u.extents();
    const int r = static_cast<int>(std::floor(rho));

    ExcessMap out{rho, ScalarField(e, u.h()), std::vector<bool>(e.count(), false)};
    std::vector<std::size_t> disk;
    bool any = false;
    for (int cy = 0; cy < e.height; ++cy) {
        for (int cx = 0; cx < e.width; ++cx) {
            if (!g.interior(cx, cy))
                continue;
            disk.clear();
            for (int y = std::max(0, cy - r); y <= std::min(e.height - 1, cy + r); ++y)
                for (int x = std::max(0, cx - r); x <= std::min(e.width - 1, cx + r); ++x) {
                    const double d2 = double(x - cx) * (x - cx) + double(y - cy) * (y - cy);
                    if (d2 <= rho * rho && g.interior(x, y))
                        disk.push_back(static_cast<std::size_t>(y * e.width + x));
                }
            SymTensor mean(gu.shape());
            for (std::size_t q : disk)
                mean += gu.at(q);
            mean *= 1.0 / static_cast<double>(disk.size());
            double acc = 0.0;
            for (std::size_t q : disk) {
                const SymTensor d = gu.at(q) - mean;
                acc += contract(d, d);
            }
            const std::size_t p = static_cast<std::size_t>(cy * e.width + cx);
            out.values[p] = acc / static_cast<double>(disk.size());
            out.defined[p] = true;
            any = true;
        }
    }
    if (!any)
        throw size_error("grid " + to_string(e) + " has no interior pixel for order " + std::to_string(m));
    return out;
}

struct ExcessDecayRow {
    double rho;
    double mean;
    double max;
    std::size_t pixels;
};

/// Mean and max excess per radius, over pixels whose full disk is interior
/// (so every radius averages over the same kind of disk).
inline std::vector<ExcessDecayRow> excess_decay(const ScalarField& u, int m, std::span<const double> radii)
{
    const DifferenceOperator g(u.extents(), u.h(), m);
    std::vector<ExcessDecayRow> rows;
    for (double rho : radii) {
        const ExcessMap em = excess_map(u, m, rho);
        const int r = static_cast<int>(std::floor(rho));
        CompensatedSum s;
        double mx = 0.0;
        std::size_t count = 0;
        for (int y = 0; y < u.height(); ++y)
            for (int x = 0; x < u.width(); ++x) {
                if (!g.interior(x, y))
                    continue;
                const bool full = g.interior(std::max(0, x - r), y) && g.interior(std::min(u.width() - 1, x + r), y)
                    && (u.height() == 1
                        || (g.interior(x, std::max(0, y - r)) && g.interior(x, std::min(u.height() - 1, y + r))))
                    && x - r >= 0 && x + r < u.width() && (u.height() == 1 || (y - r >= 0 && y + r < u.height()));
                if (!full)
                    continue;
                const double v = em.values(x, y);
                s.add(v);
                mx = std::max(mx, v);
                ++count;
            }
        rows.push_back({rho, count ? s.value() / static_cast<double>(count) : 0.0, mx, count});
    }
    return rows;
}

/// Pixels whose excess exceeds the threshold (candidates for the singular set).
inline std::vector<bool> excess_above(const ExcessMap& em, double threshold)
{
    std::vector<bool> out(em.values.size(), false);
    for (std::size_t p = 0; p < out.size(); ++p)
        out[p] = em.defined[p] && em.values[p] > threshold;
    return out;
}

/// (1 + |Gu|)^(1 - mu/2); requires mu < 2.
inline ScalarField phi_field(const ScalarField& u, const DensityParams& p)
{
    p.validate();
    if (!(p.mu < 2.0))
        throw domain_error("phi field needs mu < 2 so that 1 - mu/2 > 0");
    const SymTensorField gu = grad_m(u, p.m);
    ScalarField out(u.extents(), u.h());
    const double expo = 1.0 - 0.5 * p.mu;
    for (std::size_t q = 0; q < out.size(); ++q)
        out[q] = std::pow(1.0 + gu.norm_at(q), expo);
    return out;
}

/// Discrete W^{1,2} seminorm sqrt(h^2 sum |D^+ v|^2) over the pixels at least
/// `margin` away from the border.
inline double w12_seminorm(const ScalarField& v, int margin)
{
    const Extents e = v.extents();
    const bool two_d = e.dim() == 2;
    const int y0 = two_d ? margin : 0;
    const int y1 = two_d ? e.height - margin : 1;
    CompensatedSum s;
    const double ih = 1.0 / v.h();
    for (int y = y0; y < y1; ++y)
        for (int x = margin; x < e.width - margin; ++x) {
            if (x + 1 < e.width - margin) {
                const double d = (v(x + 1, y) - v(x, y)) * ih;
                s.add(d * d);
            }
            if (two_d && y + 1 < y1) {
                const double d = (v(x, y + 1) - v(x, y)) * ih;
                s.add(d * d);
            }
        }
    return std::sqrt(v.h() * v.h() * s.value());
}

struct EllipticityBounds {
    double nu4_measured; // min D^2F(Z)(X,X) (1+|Z|)^mu / |X|^2
    double nu5_measured; // max D^2F(Z)(X,X) (1+|Z|) / |X|^2
};

inline EllipticityBounds ellipticity_probe(const DensityParams& p, int samples, std::uint64_t seed)
{
    p.validate();
    if (p.delta != 0.0)
        throw domain_error("ellipticity probe is defined for delta = 0");
    const TensorShape shape(p.m, p.n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> log_r(-6.0, 4.0);

    auto random_direction = [&] {
        SymTensor t(shape);
        double n = 0.0;
        while (n == 0.0) {
            for (std::size_t k = 0; k < t.size(); ++k)
                t[k] = normal(rng);
            n = norm(t);
        }
        return (1.0 / n) * t;
    };

    EllipticityBounds b{std::numeric_limits<double>::infinity(), 0.0};
    for (int i = 0; i < samples; ++i) {
        double r;
        if (i == 0)
            r = 0.0;
        else if (i == 1)
            r = 1e4;
        else
            r = std::pow(10.0, log_r(rng));
        const SymTensor z = r * random_direction();
        const SymTensor x = random_direction();
        const double q = d2f_quadratic(p, z, x);
        b.nu4_measured = std::min(b.nu4_measured, q * std::pow(1.0 + r, p.mu));
        b.nu5_measured = std::max(b.nu5_measured, q * (1.0 + r));
    }
    return b;
}

struct StaircaseMetric {
    int jump_count = 0;
    double gradient_tv = 0.0;
    double threshold = 0.0;
};

/// Sign changes between consecutive second differences whose magnitude
/// exceeds theta = 3 * median |second difference|.
inline StaircaseMetric staircase_metric(std::span<const double> u)
{
    StaircaseMetric out;
    if (u.size() < 3)
        return out;
    std::vector<double> d2(u.size() - 2);
    double scale = 0.0;
    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
        d2[i - 1] = u[i + 1] - 2.0 * u[i] + u[i - 1];
        scale = std::max({scale, std::abs(u[i - 1]), std::abs(u[i]), std::abs(u[i + 1])});
    }
    std::vector<double> mags(d2.size());
    CompensatedSum tv;
    for (std::size_t i = 0; i < d2.size(); ++i) {
        mags[i] = std::abs(d2[i]);
        tv.add(mags[i]);
    }
    auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
    std::nth_element(mags.begin(), mid, mags.end());
    const double median = *mid;
    // a flat median would let rounding noise count as jumps
    out.threshold = std::max(3.0 * median, 1e-12 * std::max(scale, 1.0));
    out.gradient_tv = tv.value();

    int last_sign = 0;
    for (double v : d2) {
        if (std::abs(v) <= out.threshold)
            continue;
        const int s = v > 0.0 ? 1 : -1;
        if (last_sign != 0 && s != last_sign)
            ++out.jump_count;
        last_sign = s;
    }
    return out;
}

inline StaircaseMetric staircase_metric(const ScalarField& u)
{
    if (u.height() != 1)
        throw size_error("staircase metric expects a 1D signal (height 1)");
    return staircase_metric(u.samples());
}

/// sup over a uniform grid on [0, r_max] of |(mu - 1) Phi_mu(r) - r|.
/// Bounded by 1/(mu - 2) for mu > 2.
inline double tv_limit_error(double mu, double r_max, int points = 100001)
{
    if (!(mu > 2.0))
        throw domain_error("TV limit error is defined for mu > 2");
    if (!(r_max >= 0.0) || points < 2)
        throw domain_error("need r_max >= 0 and at least two grid points");
    double sup = 0.0;
    for (int i = 0; i < points; ++i) {
        const double r = r_max * static_cast<double>(i) / static_cast<double>(points - 1);
        sup = std::max(sup, std::abs(tv_deviation(mu, r)));
    }
    return sup;
}

} // namespace hotv
