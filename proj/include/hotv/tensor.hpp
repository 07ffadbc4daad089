#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "error.hpp"

namespace hotv {

inline constexpr int max_order = 3;
inline constexpr int max_dim = 2;
inline constexpr std::size_t max_components = max_order + 1;

/// Layout of S^m(R^n) for m in {1,2,3}, n in {1,2}.
///
/// Components are the multisets of size m over the coordinate axes. In 2D the
/// component k holds the multi-index with (m - k) x's and k y's; its weight is
/// the number of orderings, binom(m, k). In 1D there is a single component
/// x...x with weight 1. The Frobenius product of two full tensors equals
/// sum_k weight_k * a_k * b_k.
class TensorShape {
public:
    constexpr TensorShape() = default;

    TensorShape(int order, int dim) : order_(order), dim_(dim)
    {
        if (order < 1 || order > max_order)
            throw domain_error("tensor order must be 1, 2 or 3, got " + std::to_string(order));
        if (dim < 1 || dim > max_dim)
            throw domain_error("tensor dimension must be 1 or 2, got " + std::to_string(dim));
    }

    constexpr int order() const noexcept { return order_; }
    constexpr int dim() const noexcept { return dim_; }
    constexpr std::size_t components() const noexcept
    {
        return dim_ == 1 ? 1 : static_cast<std::size_t>(order_ + 1);
    }

    /// Number of y-indices in component k.
    constexpr int y_count(std::size_t k) const noexcept { return dim_ == 1 ? 0 : static_cast<int>(k); }
    constexpr int x_count(std::size_t k) const noexcept { return order_ - y_count(k); }

    constexpr double weight(std::size_t k) const noexcept
    {
        if (dim_ == 1)
            return 1.0;
        return static_cast<double>(binomial(order_, static_cast<int>(k)));
    }

    /// e.g. "xx", "xy", "yy"
    std::string label(std::size_t k) const
    {
        return std::string(static_cast<std::size_t>(x_count(k)), 'x')
            + std::string(static_cast<std::size_t>(y_count(k)), 'y');
    }

    friend constexpr bool operator==(const TensorShape&, const TensorShape&) = default;

private:
    static constexpr int binomial(int n, int k) noexcept
    {
        int r = 1;
        for (int i = 1; i <= k; ++i)
            r = r * (n - k + i) / i;
        return r;
    }

    int order_ = 1;
    int dim_ = 1;
};

/// A single element of S^m(R^n), stored by distinct components.
struct SymTensor {
    TensorShape shape;
    std::array<double, max_components> c{};

    SymTensor() = default;
    explicit SymTensor(TensorShape s) : shape(s) {}

    std::size_t size() const noexcept { return shape.components(); }
    double& operator[](std::size_t k) noexcept { return c[k]; }
    double operator[](std::size_t k) const noexcept { return c[k]; }

    SymTensor& operator+=(const SymTensor& o) noexcept
    {
        for (std::size_t k = 0; k < size(); ++k)
            c[k] += o.c[k];
        return *this;
    }
    SymTensor& operator-=(const SymTensor& o) noexcept
    {
        for (std::size_t k = 0; k < size(); ++k)
            c[k] -= o.c[k];
        return *this;
    }
    SymTensor& operator*=(double s) noexcept
    {
        for (std::size_t k = 0; k < size(); ++k)
            c[k] *= s;
        return *this;
    }

    friend SymTensor operator+(SymTensor a, const SymTensor& b) noexcept { return a += b; }
    friend SymTensor operator-(SymTensor a, const SymTensor& b) noexcept { return a -= b; }
    friend SymTensor operator*(double s, SymTensor a) noexcept { return a *= s; }
    friend SymTensor operator*(SymTensor a, double s) noexcept { return a *= s; }
};

/// Frobenius product A:B with multiplicity weights.
inline double contract(const SymTensor& a, const SymTensor& b) noexcept
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        s += a.shape.weight(k) * a.c[k] * b.c[k];
    return s;
}

inline double norm(const SymTensor& a) noexcept { return std::sqrt(contract(a, a)); }

} // namespace hotv
