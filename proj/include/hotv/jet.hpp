#pragma once

#include <array>
#include <cmath>

namespace hotv {

/// Truncated Taylor series in one variable: c[k] = f^(k)(x0) / k!.
template <int K>
struct Jet {
    std::array<double, K + 1> c{};

    static Jet constant(double v)
    {
        Jet j;
        j.c[0] = v;
        return j;
    }

    /// The affine map x -> v + slope (x - x0).
    static Jet variable(double v, double slope = 1.0)
    {
        Jet j;
        j.c[0] = v;
        if constexpr (K >= 1)
            j.c[1] = slope;
        return j;
    }

    double value() const noexcept { return c[0]; }

    double derivative(int k) const noexcept
    {
        double f = 1.0;
        for (int i = 2; i <= k; ++i)
            f *= i;
        return c[static_cast<std::size_t>(k)] * f;
    }

    Jet& operator+=(const Jet& o) noexcept
    {
        for (int k = 0; k <= K; ++k)
            c[k] += o.c[k];
        return *this;
    }
    Jet& operator-=(const Jet& o) noexcept
    {
        for (int k = 0; k <= K; ++k)
            c[k] -= o.c[k];
        return *this;
    }
    Jet& operator*=(double s) noexcept
    {
        for (double& v : c)
            v *= s;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) noexcept { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) noexcept { return a -= b; }
    friend Jet operator*(Jet a, double s) noexcept { return a *= s; }
    friend Jet operator*(double s, Jet a) noexcept { return a *= s; }
    friend Jet operator+(Jet a, double s) noexcept
    {
        a.c[0] += s;
        return a;
    }
    friend Jet operator-(double s, Jet a) noexcept
    {
        a *= -1.0;
        a.c[0] += s;
        return a;
    }

    friend Jet operator*(const Jet& a, const Jet& b) noexcept
    {
        Jet r;
        for (int i = 0; i <= K; ++i)
            for (int j = 0; i + j <= K; ++j)
                r.c[i + j] += a.c[i] * b.c[j];
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) noexcept
    {
        Jet r;
        for (int k = 0; k <= K; ++k) {
            double s = a.c[k];
            for (int j = 1; j <= k; ++j)
                s -= b.c[j] * r.c[k - j];
            r.c[k] = s / b.c[0];
        }
        return r;
    }

    friend Jet exp(const Jet& a) noexcept
    {
        // r' = a' r, coefficientwise
        Jet r;
        r.c[0] = std::exp(a.c[0]);
        for (int k = 1; k <= K; ++k) {
            double s = 0.0;
            for (int j = 1; j <= k; ++j)
                s += j * a.c[j] * r.c[k - j];
            r.c[k] = s / k;
        }
        return r;
    }
};

} // namespace hotv
