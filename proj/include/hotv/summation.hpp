#pragma once

#include <cmath>
#include <span>

namespace hotv {

// Neumaier's variant of Kahan summation. Terms are consumed in call order, so a
// fixed traversal order gives bit-identical totals across runs.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept
    {
        add(x);
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept
{
    CompensatedSum s;
    for (double x : xs)
        s.add(x);
    return s.value();
}

inline double compensated_dot(std::span<const double> a, std::span<const double> b) noexcept
{
    CompensatedSum s;
    const auto n = a.size() < b.size() ? a.size() : b.size();
    for (std::size_t i = 0; i < n; ++i)
        s.add(a[i] * b[i]);
    return s.value();
}

} // namespace hotv
