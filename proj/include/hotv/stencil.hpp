#pragma once

// Finite-difference m-th derivative operator G on rectangular grids and its
// exact transpose.
//
// A component with multi-index (a x's, b y's) is the average, over every
// ordering of its axes, of m composed first differences: forward on odd steps,
// backward on even steps. The composite stencil is evaluated only where every
// tap lands inside the grid and is zero elsewhere, so polynomials of degree
// < m lie in the kernel on the whole grid. G^T is the matrix transpose with
// respect to the multiplicity-weighted pairing
//
//     <Gu, P> = sum_p sum_k w_k (G_k u)_p P_{k,p} = sum_p u_p (G^T P)_p.
//
// Integration by parts would put (-1)^m in front of a divergence; here that
// sign is part of G^T and never appears separately.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "summation.hpp"
#include "tensor.hpp"

namespace hotv {

struct Tap {
    int dx;
    int dy;
    double coeff;
};

struct ComponentStencil {
    std::vector<Tap> taps;
    // Bounding box of every tap of every ordering (cancelled taps included).
    int min_dx = 0, max_dx = 0, min_dy = 0, max_dy = 0;
};

namespace detail {

inline std::vector<std::vector<int>> axis_orderings(int x_count, int y_count)
{
    std::vector<int> seq;
    seq.insert(seq.end(), static_cast<std::size_t>(x_count), 0);
    seq.insert(seq.end(), static_cast<std::size_t>(y_count), 1);
    std::vector<std::vector<int>> out;
    do {
        out.push_back(seq);
    } while (std::next_permutation(seq.begin(), seq.end()));
    return out;
}

inline ComponentStencil build_component(int x_count, int y_count)
{
    const auto orderings = axis_orderings(x_count, y_count);
    const double share = 1.0 / static_cast<double>(orderings.size());
    std::map<std::pair<int, int>, double> merged;
    ComponentStencil cs;
    for (const auto& seq : orderings) {
        std::map<std::pair<int, int>, double> taps{{{0, 0}, 1.0}};
        for (std::size_t step = 0; step < seq.size(); ++step) {
            const int ex = seq[step] == 0 ? 1 : 0;
            const int ey = seq[step] == 1 ? 1 : 0;
            const bool forward = (step % 2) == 0;
            std::map<std::pair<int, int>, double> next;
            for (const auto& [off, c] : taps) {
                if (forward) {
                    next[{off.first + ex, off.second + ey}] += c;
                    next[off] -= c;
                } else {
                    next[off] += c;
                    next[{off.first - ex, off.second - ey}] -= c;
                }
            }
            taps = std::move(next);
        }
        for (const auto& [off, c] : taps) {
            cs.min_dx = std::min(cs.min_dx, off.first);
            cs.max_dx = std::max(cs.max_dx, off.first);
            cs.min_dy = std::min(cs.min_dy, off.second);
            cs.max_dy = std::max(cs.max_dy, off.second);
            merged[off] += share * c;
        }
    }
    for (const auto& [off, c] : merged)
        if (c != 0.0)
            cs.taps.push_back({off.first, off.second, c});
    return cs;
}

} // namespace detail

/// G = discrete nabla^m on a fixed grid, plus G^T.
class DifferenceOperator {
public:
    DifferenceOperator(Extents e, double h, int order) : ext_(e), h_(h), shape_(order, e.dim())
    {
        if (!(h > 0.0))
            throw domain_error("grid spacing h must be > 0");
        if (e.width < order + 1 || (e.dim() == 2 && e.height < order + 1))
            throw size_error("grid " + to_string(e) + " too small for derivative order " + std::to_string(order)
                             + " (need extents >= m+1)");
        scale_ = std::pow(h, -order);
        for (std::size_t k = 0; k < shape_.components(); ++k)
            stencils_.push_back(detail::build_component(shape_.x_count(k), shape_.y_count(k)));
    }

    const Extents& extents() const noexcept { return ext_; }
    double h() const noexcept { return h_; }
    int order() const noexcept { return shape_.order(); }
    const TensorShape& shape() const noexcept { return shape_; }
    const ComponentStencil& stencil(std::size_t k) const noexcept { return stencils_[k]; }

    bool valid(std::size_t k, int x, int y) const noexcept
    {
        const auto& s = stencils_[k];
        return x + s.min_dx >= 0 && x + s.max_dx < ext_.width && y + s.min_dy >= 0 && y + s.max_dy < ext_.height;
    }

    /// Every component's stencil fits at (x, y).
    bool interior(int x, int y) const noexcept
    {
        for (std::size_t k = 0; k < stencils_.size(); ++k)
            if (!valid(k, x, y))
                return false;
        return true;
    }

    SymTensorField apply(const ScalarField& u) const
    {
        require_same_extents(ext_, u.extents(), "grad_m");
        SymTensorField out(ext_, h_, order());
        apply_into(u, out);
        return out;
    }

    void apply_into(const ScalarField& u, SymTensorField& out) const
    {
        const int w = ext_.width;
        const double* src = u.raw().data();
        for (std::size_t k = 0; k < stencils_.size(); ++k) {
            const auto& s = stencils_[k];
            auto dst = out.plane(k);
            std::fill(dst.begin(), dst.end(), 0.0);
            for (int y = -s.min_dy; y + s.max_dy < ext_.height; ++y) {
                for (int x = -s.min_dx; x + s.max_dx < w; ++x) {
                    double acc = 0.0;
                    for (const Tap& t : s.taps)
                        acc += t.coeff * src[(y + t.dy) * w + (x + t.dx)];
                    dst[static_cast<std::size_t>(y * w + x)] = scale_ * acc;
                }
            }
        }
    }

    ScalarField adjoint(const SymTensorField& p) const
    {
        require_same_extents(ext_, p.extents(), "div_m_adjoint");
        if (!(p.shape() == shape_))
            throw size_error("tensor field order does not match the operator");
        ScalarField out(ext_, h_);
        adjoint_into(p, out);
        return out;
    }

    void adjoint_into(const SymTensorField& p, ScalarField& out) const
    {
        const int w = ext_.width;
        double* dst = out.raw().data();
        std::fill(out.raw().begin(), out.raw().end(), 0.0);
        for (std::size_t k = 0; k < stencils_.size(); ++k) {
            const auto& s = stencils_[k];
            const double wk = shape_.weight(k) * scale_;
            auto src = p.plane(k);
            for (int y = -s.min_dy; y + s.max_dy < ext_.height; ++y) {
                for (int x = -s.min_dx; x + s.max_dx < w; ++x) {
                    const double v = wk * src[static_cast<std::size_t>(y * w + x)];
                    if (v == 0.0)
                        continue;
                    for (const Tap& t : s.taps)
                        dst[(y + t.dy) * w + (x + t.dx)] += t.coeff * v;
                }
            }
        }
    }

    /// Guaranteed upper bound on ||G||^2 from Young's inequality:
    /// sum_k w_k ||stencil_k||_1^2 / h^(2m).
    double norm_squared_bound() const noexcept
    {
        double b = 0.0;
        for (std::size_t k = 0; k < stencils_.size(); ++k) {
            double l1 = 0.0;
            for (const Tap& t : stencils_[k].taps)
                l1 += std::abs(t.coeff);
            b += shape_.weight(k) * l1 * l1;
        }
        return b * scale_ * scale_;
    }

private:
    Extents ext_;
    double h_;
    TensorShape shape_;
    double scale_ = 1.0;
    std::vector<ComponentStencil> stencils_;
};

inline SymTensorField grad_m(const ScalarField& u, int m)
{
    return DifferenceOperator(u.extents(), u.h(), m).apply(u);
}

inline ScalarField div_m_adjoint(const SymTensorField& p)
{
    return DifferenceOperator(p.extents(), p.h(), p.order()).adjoint(p);
}

struct NormEstimate {
    double value;   // Rayleigh quotient, a lower bound on ||G||^2
    int iterations;
};

/// Power iteration on G^T G from a seeded random start.
inline NormEstimate power_iteration(const DifferenceOperator& g, std::uint64_t seed, int max_iter = 20000,
                                    double rel_tol = 1e-10)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ScalarField v(g.extents(), g.h());
    for (double& x : v.raw())
        x = uni(rng);
    SymTensorField gv(g.extents(), g.h(), g.order());
    ScalarField next(g.extents(), g.h());
    double theta = 0.0;
    int stable = 0;
    int it = 0;
    for (; it < max_iter; ++it) {
        const double nv = norm2(v);
        if (nv == 0.0)
            return {0.0, it};
        v *= 1.0 / nv;
        g.apply_into(v, gv);
        const double rq = dot(gv, gv);
        if (std::abs(rq - theta) <= rel_tol * rq) {
            if (++stable >= 10) {
                theta = rq;
                break;
            }
        } else {
            stable = 0;
        }
        theta = rq;
        g.adjoint_into(gv, next);
        std::swap(v, next);
    }
    return {theta, it};
}

/// Estimate of ||G||^2 = lambda_max(G^T G) on a grid with the given extents.
inline double operator_norm_estimate(int m, Extents e, double h = 1.0, std::uint64_t seed = 0x5eed)
{
    return power_iteration(DifferenceOperator(e, h, m), seed).value;
}

/// Step-size safe upper bound on ||G||^2: the power-iteration estimate with a
/// 10% margin, rounded up to a multiple of h^(-2m)/64, capped by the analytic
/// bound. The rounding makes the result independent of the seed in practice.
inline double operator_norm_upper(const DifferenceOperator& g, std::uint64_t seed)
{
    const double unit = std::pow(g.h(), -2.0 * g.order());
    const double est = power_iteration(g, seed).value / unit;
    const double rounded = std::ceil(1.1 * est * 64.0) / 64.0;
    return std::min(rounded * unit, g.norm_squared_bound());
}

/// Mean of P over grid points within Euclidean pixel distance rho of the
/// center, restricted to the interior where nabla^m is evaluated.
inline SymTensor disk_mean(const SymTensorField& p, int cx, int cy, double rho)
{
    if (!(rho >= 0.0))
        throw domain_error("disk radius must be >= 0");
    const DifferenceOperator g(p.extents(), p.h(), p.order());
    const int w = p.extents().width;
    const int r = static_cast<int>(std::floor(rho));
    SymTensor acc(p.shape());
    std::size_t count = 0;
    for (int y = std::max(0, cy - r); y <= std::min(p.extents().height - 1, cy + r); ++y) {
        for (int x = std::max(0, cx - r); x <= std::min(w - 1, cx + r); ++x) {
            const double d2 = double(x - cx) * double(x - cx) + double(y - cy) * double(y - cy);
            if (d2 > rho * rho || !g.interior(x, y))
                continue;
            acc += p.at(static_cast<std::size_t>(y * w + x));
            ++count;
        }
    }
    if (count == 0)
        throw domain_error("disk of radius " + std::to_string(rho) + " around (" + std::to_string(cx) + ","
                           + std::to_string(cy) + ") contains no interior point");
    acc *= 1.0 / static_cast<double>(count);
    return acc;
}

} // namespace hotv
