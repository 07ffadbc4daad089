#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "summation.hpp"
#include "tensor.hpp"

namespace hotv {

struct Extents {
    int width = 1;
    int height = 1;

    std::size_t count() const noexcept { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    /// Grids with a single row are 1D signals.
    int dim() const noexcept { return height == 1 ? 1 : 2; }

    friend bool operator==(const Extents&, const Extents&) = default;
};

inline std::string to_string(const Extents& e)
{
    return std::to_string(e.width) + "x" + std::to_string(e.height);
}

inline void require_same_extents(const Extents& a, const Extents& b, const char* what)
{
    if (!(a == b))
        throw size_error(std::string(what) + ": extent mismatch " + to_string(a) + " vs " + to_string(b));
}

/// Real samples on a rectangular grid with spacing h, row-major.
class ScalarField {
public:
    ScalarField() = default;

    ScalarField(Extents e, double h = 1.0, double fill = 0.0) : ext_(e), h_(h)
    {
        if (e.width < 1 || e.height < 1)
            throw size_error("field extents must be >= 1, got " + to_string(e));
        if (!(h > 0.0) || !std::isfinite(h))
            throw domain_error("grid spacing h must be > 0");
        data_.assign(e.count(), fill);
    }

    ScalarField(int width, int height, double h = 1.0, double fill = 0.0)
        : ScalarField(Extents{width, height}, h, fill)
    {}

    ScalarField(Extents e, double h, std::vector<double> samples) : ScalarField(e, h)
    {
        if (samples.size() != e.count())
            throw size_error("sample count does not match extents " + to_string(e));
        data_ = std::move(samples);
    }

    const Extents& extents() const noexcept { return ext_; }
    int width() const noexcept { return ext_.width; }
    int height() const noexcept { return ext_.height; }
    double h() const noexcept { return h_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
    double operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(ext_.width) + static_cast<std::size_t>(x);
    }

    std::span<double> samples() noexcept { return data_; }
    std::span<const double> samples() const noexcept { return data_; }
    std::vector<double>& raw() noexcept { return data_; }
    const std::vector<double>& raw() const noexcept { return data_; }

    ScalarField& operator+=(const ScalarField& o)
    {
        require_same_extents(ext_, o.ext_, "field +=");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] += o.data_[i];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o)
    {
        require_same_extents(ext_, o.ext_, "field -=");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] -= o.data_[i];
        return *this;
    }
    ScalarField& operator*=(double s) noexcept
    {
        for (double& v : data_)
            v *= s;
        return *this;
    }
    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

    /// this += s * o
    void axpy(double s, const ScalarField& o)
    {
        require_same_extents(ext_, o.ext_, "field axpy");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] += s * o.data_[i];
    }

private:
    Extents ext_{};
    double h_ = 1.0;
    std::vector<double> data_ = std::vector<double>(1, 0.0);
};

inline double dot(const ScalarField& a, const ScalarField& b)
{
    require_same_extents(a.extents(), b.extents(), "field dot");
    return compensated_dot(a.samples(), b.samples());
}

inline double norm2(const ScalarField& a) { return std::sqrt(dot(a, a)); }

inline double max_abs(const ScalarField& a) noexcept
{
    double m = 0.0;
    for (double v : a.samples())
        m = std::max(m, std::abs(v));
    return m;
}

/// Grid of symmetric order-m tensors, one plane per distinct component.
class SymTensorField {
public:
    SymTensorField() = default;

    SymTensorField(Extents e, double h, int order)
        : ext_(e), h_(h), shape_(order, e.dim()), data_(shape_.components() * e.count(), 0.0)
    {}

    const Extents& extents() const noexcept { return ext_; }
    double h() const noexcept { return h_; }
    const TensorShape& shape() const noexcept { return shape_; }
    int order() const noexcept { return shape_.order(); }
    std::size_t components() const noexcept { return shape_.components(); }
    std::size_t pixels() const noexcept { return ext_.count(); }

    std::span<double> plane(std::size_t k) noexcept { return {data_.data() + k * pixels(), pixels()}; }
    std::span<const double> plane(std::size_t k) const noexcept { return {data_.data() + k * pixels(), pixels()}; }

    SymTensor at(std::size_t p) const noexcept
    {
        SymTensor t(shape_);
        for (std::size_t k = 0; k < components(); ++k)
            t[k] = data_[k * pixels() + p];
        return t;
    }

    void set(std::size_t p, const SymTensor& t) noexcept
    {
        for (std::size_t k = 0; k < components(); ++k)
            data_[k * pixels() + p] = t[k];
    }

    double norm_at(std::size_t p) const noexcept
    {
        double s = 0.0;
        for (std::size_t k = 0; k < components(); ++k) {
            const double v = data_[k * pixels() + p];
            s += shape_.weight(k) * v * v;
        }
        return std::sqrt(s);
    }

    std::vector<double>& raw() noexcept { return data_; }
    const std::vector<double>& raw() const noexcept { return data_; }

    SymTensorField& operator+=(const SymTensorField& o)
    {
        check_compatible(o);
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] += o.data_[i];
        return *this;
    }
    SymTensorField& operator-=(const SymTensorField& o)
    {
        check_compatible(o);
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] -= o.data_[i];
        return *this;
    }
    SymTensorField& operator*=(double s) noexcept
    {
        for (double& v : data_)
            v *= s;
        return *this;
    }
    friend SymTensorField operator+(SymTensorField a, const SymTensorField& b) { return a += b; }
    friend SymTensorField operator-(SymTensorField a, const SymTensorField& b) { return a -= b; }
    friend SymTensorField operator*(double s, SymTensorField a) { return a *= s; }

    void check_compatible(const SymTensorField& o) const
    {
        require_same_extents(ext_, o.ext_, "tensor field");
        if (!(shape_ == o.shape_))
            throw size_error("tensor field order/dimension mismatch");
    }

private:
    Extents ext_{};
    double h_ = 1.0;
    TensorShape shape_{};
    std::vector<double> data_;
};

/// Pointwise-weighted pairing sum_p P_p : Q_p, fixed component-major order.
inline double dot(const SymTensorField& a, const SymTensorField& b)
{
    a.check_compatible(b);
    CompensatedSum s;
    for (std::size_t k = 0; k < a.components(); ++k) {
        const double w = a.shape().weight(k);
        auto pa = a.plane(k);
        auto pb = b.plane(k);
        for (std::size_t p = 0; p < pa.size(); ++p)
            s.add(w * pa[p] * pb[p]);
    }
    return s.value();
}

inline double norm2(const SymTensorField& a) { return std::sqrt(dot(a, a)); }

inline double max_pointwise_norm(const SymTensorField& a) noexcept
{
    double m = 0.0;
    for (std::size_t p = 0; p < a.pixels(); ++p)
        m = std::max(m, a.norm_at(p));
    return m;
}

/// Observation mask: true on the observed set (complement of the hole D).
class Mask {
public:
    Mask() = default;

    Mask(Extents e, std::vector<bool> observed) : ext_(e), observed_(std::move(observed))
    {
        if (observed_.size() != e.count())
            throw size_error("mask sample count does not match extents " + to_string(e));
        if (observed_count() == 0)
            throw domain_error("mask has no observed pixel; the observed set must have positive measure");
    }

    /// Everything observed (pure denoising).
    static Mask full(Extents e) { return Mask(e, std::vector<bool>(e.count(), true)); }

    const Extents& extents() const noexcept { return ext_; }
    bool observed(std::size_t p) const noexcept { return observed_[p]; }
    bool observed(int x, int y) const noexcept
    {
        return observed_[static_cast<std::size_t>(y) * static_cast<std::size_t>(ext_.width) + static_cast<std::size_t>(x)];
    }
    bool hole(std::size_t p) const noexcept { return !observed_[p]; }

    std::size_t observed_count() const noexcept
    {
        return static_cast<std::size_t>(std::count(observed_.begin(), observed_.end(), true));
    }
    std::size_t hole_count() const noexcept { return observed_.size() - observed_count(); }
    bool pure_denoising() const noexcept { return hole_count() == 0; }

    const std::vector<bool>& flags() const noexcept { return observed_; }

private:
    Extents ext_{};
    std::vector<bool> observed_ = std::vector<bool>(1, true);
};

} // namespace hotv
