#pragma once

// Smooth approximation of piecewise-polynomial signals on (0,1) in the strict
// BV^m topology, by a partition of unity on boundary shells, shifts directed
// away from the hole D and mollification.
//
//     phi = sum_j rho_{eps_j} * (eta_j u(. + s h))
//
// with s the shift direction. All derivatives of phi are formed by convolving
// Leibniz expansions of (eta_j u(. + s h))^(k); the atoms of u^(m) are
// mollified in closed form.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "jet.hpp"
#include "summation.hpp"

namespace hotv {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

namespace detail {

inline double poly_derivative(const std::vector<double>& c, int k, double x)
{
    double acc = 0.0;
    for (int i = static_cast<int>(c.size()) - 1; i >= k; --i) {
        double f = 1.0;
        for (int t = i - k + 1; t <= i; ++t)
            f *= t;
        acc = acc * x + c[static_cast<std::size_t>(i)] * f;
    }
    return acc;
}

/// Composite Simpson on equispaced samples; 3/8 rule on the last three
/// intervals when the interval count is odd.
inline double simpson(std::span<const double> v, double dx)
{
    const std::size_t n = v.size() < 2 ? 0 : v.size() - 1;
    if (n == 0)
        return 0.0;
    if (n == 1)
        return 0.5 * dx * (v[0] + v[1]);
    const std::size_t even = (n % 2 == 0) ? n : n - 3;
    CompensatedSum s;
    for (std::size_t i = 0; i + 2 <= even; i += 2)
        s.add(dx / 3.0 * (v[i] + 4.0 * v[i + 1] + v[i + 2]));
    if (even != n) {
        const std::size_t i = even;
        s.add(3.0 * dx / 8.0 * (v[i] + 3.0 * v[i + 1] + 3.0 * v[i + 2] + v[i + 3]));
    }
    return s.value();
}

/// Integral over [0,1] of fn, split at the cuts, 4096 Simpson intervals per piece.
template <class Fn>
double integrate_split(Fn&& fn, const std::vector<double>& cuts)
{
    std::vector<double> edges{0.0};
    for (double c : cuts)
        if (c > 0.0 && c < 1.0)
            edges.push_back(c);
    edges.push_back(1.0);
    std::sort(edges.begin(), edges.end());
    constexpr int n = 4096;
    CompensatedSum total;
    std::vector<double> v(n + 1);
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        const double a = edges[s];
        const double b = edges[s + 1];
        if (!(b > a))
            continue;
        const double dx = (b - a) / n;
        // nudge the end nodes inside so each segment sees one piece
        for (int i = 0; i <= n; ++i) {
            double x = a + i * dx;
            if (i == 0)
                x = a + 1e-12 * (b - a);
            if (i == n)
                x = b - 1e-12 * (b - a);
            v[static_cast<std::size_t>(i)] = fn(x);
        }
        total.add(simpson(v, dx));
    }
    return total.value();
}

inline double area_integrand(double x) { return std::sqrt(1.0 + x * x) - 1.0; }

inline double bump(double s)
{
    return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
}

/// Integral of bump over (-1, 1).
inline double bump_mass()
{
    static const double mass = [] {
        constexpr int n = 1 << 14;
        std::vector<double> v(n + 1);
        for (int i = 0; i <= n; ++i)
            v[static_cast<std::size_t>(i)] = bump(-1.0 + 2.0 * i / n);
        return simpson(v, 2.0 / n);
    }();
    return mass;
}

} // namespace detail

/// u on (0,1): polynomial pieces between breakpoints, extended beyond (0,1)
/// by the end pieces. Derivatives up to m-2 are continuous; the (m-1)-th may
/// jump, and its jumps are the atoms of the measure u^(m).
class PiecewiseSignal {
public:
    PiecewiseSignal(int order, std::vector<double> breakpoints, std::vector<std::vector<double>> pieces)
        : m_(order), bp_(std::move(breakpoints)), pieces_(std::move(pieces))
    {
        if (m_ < 1 || m_ > 3)
            throw domain_error("signal order must be 1, 2 or 3");
        if (pieces_.size() != bp_.size() + 1)
            throw size_error("need one more polynomial piece than breakpoints");
        for (std::size_t i = 0; i < bp_.size(); ++i) {
            if (!(bp_[i] > 0.0 && bp_[i] < 1.0) || (i > 0 && !(bp_[i] > bp_[i - 1])))
                throw domain_error("breakpoints must increase strictly inside (0,1)");
            for (int k = 0; k + 2 <= m_; ++k) {
                const double l = detail::poly_derivative(pieces_[i], k, bp_[i]);
                const double r = detail::poly_derivative(pieces_[i + 1], k, bp_[i]);
                if (std::abs(l - r) > 1e-9 * (1.0 + std::abs(l) + std::abs(r)))
                    throw domain_error("derivative " + std::to_string(k) + " jumps at breakpoint "
                                       + std::to_string(bp_[i]));
            }
        }
    }

    /// Continuous hat with its apex at `apex`, zero at 0 and 1; order 2.
    static PiecewiseSignal hat(double apex = 0.4, double height = 1.0)
    {
        const double left = height / apex;
        const double right = height / (1.0 - apex);
        return PiecewiseSignal(2, {apex}, {{0.0, left}, {right, -right}});
    }

    static PiecewiseSignal polynomial(int order, std::vector<double> coeffs)
    {
        return PiecewiseSignal(order, {}, {std::move(coeffs)});
    }

    int order() const noexcept { return m_; }
    const std::vector<double>& breakpoints() const noexcept { return bp_; }

    /// Index of the piece at x; a breakpoint belongs to the piece on its right.
    std::size_t piece_at(double x) const
    {
        return static_cast<std::size_t>(std::upper_bound(bp_.begin(), bp_.end(), x) - bp_.begin());
    }

    double derivative(int k, double x) const { return detail::poly_derivative(pieces_[piece_at(x)], k, x); }
    double value(double x) const { return derivative(0, x); }

    /// Jumps a_i of the (m-1)-th derivative.
    std::vector<double> kinks() const
    {
        std::vector<double> a(bp_.size());
        for (std::size_t i = 0; i < bp_.size(); ++i)
            a[i] = detail::poly_derivative(pieces_[i + 1], m_ - 1, bp_[i])
                - detail::poly_derivative(pieces_[i], m_ - 1, bp_[i]);
        return a;
    }

    double kink_mass() const
    {
        double s = 0.0;
        for (double a : kinks())
            s += std::abs(a);
        return s;
    }

    /// |u^(m)|(0,1) = integral of |u^(m)| off the breakpoints + sum |a_i|.
    double total_variation() const
    {
        return detail::integrate_split([this](double x) { return std::abs(derivative(m_, x)); }, bp_) + kink_mass();
    }

    /// Area functional: integral of f(u^(m)) + sum |a_i| with f(X) = sqrt(1+X^2) - 1,
    /// whose recession function is |X|.
    double area() const
    {
        return detail::integrate_split([this](double x) { return detail::area_integrand(derivative(m_, x)); }, bp_)
            + kink_mass();
    }

private:
    int m_;
    std::vector<double> bp_;
    std::vector<std::vector<double>> pieces_;
};

/// phi and its derivatives 0..m sampled at x_i = i dx on [0,1].
struct SampledSmooth {
    double dx = 0.0;
    std::vector<std::vector<double>> derivatives;

    int order() const noexcept { return static_cast<int>(derivatives.size()) - 1; }
    std::size_t size() const noexcept { return derivatives.empty() ? 0 : derivatives[0].size(); }
};

struct StrictMetricValue {
    double sobolev_part = 0.0; // ||u - v||_{m-1,1}
    double tv_gap = 0.0;       // | |u^(m)|(0,1) - |v^(m)|(0,1) |
    double area_gap = 0.0;     // | f(u^(m))(0,1) - f(v^(m))(0,1) |

    double total() const noexcept { return sobolev_part + tv_gap + area_gap; }
};

inline StrictMetricValue strict_distance(const PiecewiseSignal& u, const PiecewiseSignal& v)
{
    if (u.order() != v.order())
        throw domain_error("strict distance needs signals of the same order");
    std::vector<double> cuts = u.breakpoints();
    cuts.insert(cuts.end(), v.breakpoints().begin(), v.breakpoints().end());
    StrictMetricValue d;
    for (int k = 0; k < u.order(); ++k)
        d.sobolev_part += detail::integrate_split(
            [&](double x) { return std::abs(u.derivative(k, x) - v.derivative(k, x)); }, cuts);
    d.tv_gap = std::abs(u.total_variation() - v.total_variation());
    d.area_gap = std::abs(u.area() - v.area());
    return d;
}

inline StrictMetricValue strict_distance(const PiecewiseSignal& u, const SampledSmooth& v)
{
    const int m = u.order();
    if (v.order() != m)
        throw domain_error("sampled approximant carries the wrong number of derivatives");
    const std::size_t n = v.size();
    if (n < 3 || std::abs(v.dx * static_cast<double>(n - 1) - 1.0) > 1e-9)
        throw size_error("sampled approximant must cover [0,1]");
    std::vector<double> w(n);
    StrictMetricValue d;
    for (int k = 0; k < m; ++k) {
        const auto& vk = v.derivatives[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < n; ++i)
            w[i] = std::abs(u.derivative(k, static_cast<double>(i) * v.dx) - vk[i]);
        d.sobolev_part += detail::simpson(w, v.dx);
    }
    const auto& vm = v.derivatives[static_cast<std::size_t>(m)];
    for (std::size_t i = 0; i < n; ++i)
        w[i] = std::abs(vm[i]);
    d.tv_gap = std::abs(u.total_variation() - detail::simpson(w, v.dx));
    for (std::size_t i = 0; i < n; ++i)
        w[i] = detail::area_integrand(vm[i]);
    d.area_gap = std::abs(u.area() - detail::simpson(w, v.dx));
    return d;
}

/// Equispaced samples x_i = x0 + i dx.
struct SampledGrid {
    double x0 = 0.0;
    double dx = 1.0;
    std::vector<double> values;

    double x(std::size_t i) const noexcept { return x0 + static_cast<double>(i) * dx; }
};

/// Symmetric discrete kernel from the C^infinity bump, unit discrete mass.
inline std::vector<double> mollifier_weights(double eps, double dx)
{
    if (!(dx > 0.0) || !(eps >= dx))
        throw domain_error("mollifier radius must be at least one grid spacing");
    const int r = static_cast<int>(std::floor(eps / dx));
    std::vector<double> w(static_cast<std::size_t>(2 * r + 1));
    double s = 0.0;
    for (int t = -r; t <= r; ++t) {
        w[static_cast<std::size_t>(t + r)] = detail::bump(t * dx / eps);
        s += w[static_cast<std::size_t>(t + r)];
    }
    for (double& v : w)
        v /= s;
    return w;
}

/// Valid-mode convolution: the result loses floor(eps/dx) samples per side.
inline SampledGrid mollify(const SampledGrid& g, double eps)
{
    const std::vector<double> w = mollifier_weights(eps, g.dx);
    const std::size_t r = w.size() / 2;
    if (g.values.size() < w.size())
        throw domain_error("mollifier radius exceeds the sampled domain");
    SampledGrid out{g.x(r), g.dx, std::vector<double>(g.values.size() - 2 * r)};
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        double acc = 0.0;
        for (std::size_t t = 0; t < w.size(); ++t)
            acc += w[t] * g.values[i + t];
        out.values[i] = acc;
    }
    return out;
}

/// +1 or -1: the direction from D into (0,1) - D. D must touch exactly one end.
inline int shift_direction(Interval hole)
{
    if (!(hole.lo < hole.hi) || hole.lo < 0.0 || hole.hi > 1.0)
        throw domain_error("hole must be a nonempty sub-interval of [0,1]");
    const bool at_left = hole.lo <= 0.0;
    const bool at_right = hole.hi >= 1.0;
    if (at_left == at_right)
        throw domain_error("hole must touch exactly one end of (0,1)");
    const int s = at_right ? -1 : 1;
    // points from the hole's midpoint toward the observed part's midpoint
    const double observed_mid = at_right ? 0.5 * hole.lo : 0.5 * (hole.hi + 1.0);
    if (!(s * (observed_mid - 0.5 * (hole.lo + hole.hi)) > 0.0))
        throw domain_error("shift direction does not point into the observed set");
    return s;
}

/// eta_1 .. eta_J on the shells Omega_i = {dist(x, boundary) > 1/(i+1)}.
/// zeta_i is a smooth step from 0 (dist < 1/(i+2)) to 1 (dist > 1/(i+1));
/// eta_1 = zeta_1, eta_j = zeta_j - zeta_{j-1}, eta_J = 1 - zeta_{J-1}.
class ShellPartition {
public:
    explicit ShellPartition(int count) : count_(count)
    {
        if (count < 2)
            throw domain_error("need at least two shells");
    }

    int count() const noexcept { return count_; }

    /// Lower edge in dist of the support of zeta_i.
    static double zeta_lower(int i)
    {
        const double a = 1.0 / (i + 2), b = 1.0 / (i + 1);
        return a + 0.25 * (b - a);
    }
    static double zeta_upper(int i)
    {
        const double a = 1.0 / (i + 2), b = 1.0 / (i + 1);
        return b - 0.25 * (b - a);
    }

    template <int K>
    static Jet<K> zeta(int i, double x)
    {
        const double lo = zeta_lower(i), hi = zeta_upper(i);
        const double d = std::min(x, 1.0 - x);
        if (d <= lo)
            return Jet<K>::constant(0.0);
        if (d >= hi)
            return Jet<K>::constant(1.0);
        const double slope = (x < 0.5 ? 1.0 : -1.0) / (hi - lo);
        const Jet<K> t = Jet<K>::variable((d - lo) / (hi - lo), slope);
        const Jet<K> one = Jet<K>::constant(1.0);
        const Jet<K> pa = exp(-1.0 * (one / t));
        const Jet<K> pb = exp(-1.0 * (one / (1.0 - t)));
        return pa / (pa + pb);
    }

    template <int K>
    Jet<K> eta(int j, double x) const
    {
        if (j == 1)
            return zeta<K>(1, x);
        if (j < count_)
            return zeta<K>(j, x) - zeta<K>(j - 1, x);
        return 1.0 - zeta<K>(count_ - 1, x);
    }

    /// Open x-interval outside which eta_j vanishes (unbounded for j = J).
    Interval support(int j) const
    {
        if (j >= count_)
            return {-1e300, 1e300};
        const double lo = zeta_lower(j);
        return {lo, 1.0 - lo};
    }

private:
    int count_;
};

struct ApproxOptions {
    int min_shells = 3;
    int max_shells = 8;
    int min_grid_exponent = 12;
    int max_grid_exponent = 22;
    int max_rounds = 60;
    double min_eps_cells = 4.0;  // resolution floor for eps_j in grid cells
    double shift_share = 0.75;   // part of a shell budget for the shift error
};

struct ShellReport {
    int index = 0;
    double budget = 0.0;
    double h = 0.0;
    double eps = 0.0;
    double shift_error = 0.0;
    double mollify_error = 0.0;
};

struct ApproxResult {
    SampledSmooth approximant;
    StrictMetricValue distance;
    double lq_error = 0.0;      // ||u - phi||_{L^q((0,1) - D)}
    double achieved = 0.0;      // distance.total() + lq_error
    double target = 0.0;
    bool ok = false;
    std::string failure;
    int shift_direction = 0;
    int grid_exponent = 0;
    int rounds = 0;
    std::vector<ShellReport> shells;
    double approximant_tv = 0.0; // integral of |phi^(m)|
    double kink_mass = 0.0;
};

namespace detail {

/// Simpson weight (in units of dx) of node i in the even-length range [a, b].
inline double simpson_weight(std::size_t i, std::size_t a, std::size_t b) noexcept
{
    if (i < a || i > b)
        return 0.0;
    if (i == a || i == b)
        return 1.0 / 3.0;
    return ((i - a) % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
}

struct ApproxContext {
    const PiecewiseSignal* u;
    ShellPartition part;
    int m;
    int sigma;
    double q;
    std::size_t n;   // intervals on [0,1], even
    double dx;
    std::size_t pad; // extra samples per side
    std::size_t lq_begin, lq_end; // node range of (0,1) - D, even length

    std::size_t ext_size() const { return n + 1 + 2 * pad; }
    double x_of(std::size_t e) const { return (static_cast<double>(e) - static_cast<double>(pad)) * dx; }
};

struct ShellErrors {
    double shift = 0.0;
    double mollify = 0.0;
};

/// Adds rho_eps * (eta_j u(. + s h)) and its derivatives to acc; returns the
/// shell's W^{m-1,1} + L^q errors of the shift and of the mollification.
template <int M>
ShellErrors eval_shell(const ApproxContext& c, int j, double h, double eps, std::vector<std::vector<double>>& acc)
{
    const PiecewiseSignal& u = *c.u;
    const std::size_t ne = c.ext_size();
    const std::vector<double> w = mollifier_weights(eps, c.dx);
    const std::size_t r = w.size() / 2;

    const Interval sup = c.part.support(j);
    const double xa = std::max(sup.lo, c.x_of(0));
    const double xb = std::min(sup.hi, c.x_of(ne - 1));
    const auto ea = static_cast<std::size_t>(std::max(0.0, std::floor(xa / c.dx + static_cast<double>(c.pad)) - 1.0));
    const auto eb = std::min(ne - 1, static_cast<std::size_t>(std::ceil(xb / c.dx + static_cast<double>(c.pad)) + 1.0));

    std::vector<std::vector<double>> g(M + 1, std::vector<double>(ne, 0.0));
    std::vector<int> live(ne + 1, 0); // prefix count of nodes with eta != 0
    constexpr double binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};

    CompensatedSum shift_w, shift_q;
    for (std::size_t e = ea; e <= eb; ++e) {
        const double x = c.x_of(e);
        const Jet<M> eta = c.part.template eta<M>(j, x);
        bool zero = true;
        for (double v : eta.c)
            zero = zero && v == 0.0;
        if (zero)
            continue;
        live[e + 1] = 1;
        double dn[M + 1], us[M + 1], u0[M + 1];
        for (int k = 0; k <= M; ++k) {
            dn[k] = eta.derivative(k);
            us[k] = u.derivative(k, x + c.sigma * h);
            u0[k] = k < M ? u.derivative(k, x) : 0.0;
        }
        const bool inside = e >= c.pad && e <= c.pad + c.n;
        const std::size_t i = e - c.pad;
        for (int k = 0; k <= M; ++k) {
            double a = 0.0, b = 0.0;
            for (int t = 0; t <= k; ++t) {
                a += binom[k][t] * dn[k - t] * us[t];
                b += binom[k][t] * dn[k - t] * u0[t];
            }
            g[k][e] = a;
            if (k < M && inside) {
                shift_w.add(simpson_weight(i, 0, c.n) * std::abs(a - b));
                if (k == 0)
                    shift_q.add(simpson_weight(i, c.lq_begin, c.lq_end) * std::pow(std::abs(a - b), c.q));
            }
        }
    }
    for (std::size_t e = 0; e < ne; ++e)
        live[e + 1] += live[e];

    ShellErrors err;
    err.shift = c.dx * shift_w.value() + std::pow(c.dx * shift_q.value(), 1.0 / c.q);

    CompensatedSum moll_w, moll_q;
    for (int k = 0; k <= M; ++k) {
        auto& out = acc[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i <= c.n; ++i) {
            const std::size_t e = i + c.pad;
            if (live[e + r + 1] - live[e - r] == 0)
                continue;
            const double* src = &g[static_cast<std::size_t>(k)][e - r];
            double s = 0.0;
            for (std::size_t t = 0; t < w.size(); ++t)
                s += w[t] * src[t];
            out[i] += s;
            if (k < M) {
                const double d = s - g[static_cast<std::size_t>(k)][e];
                moll_w.add(simpson_weight(i, 0, c.n) * std::abs(d));
                if (k == 0)
                    moll_q.add(simpson_weight(i, c.lq_begin, c.lq_end) * std::pow(std::abs(d), c.q));
            }
        }
    }
    err.mollify = c.dx * moll_w.value() + std::pow(c.dx * moll_q.value(), 1.0 / c.q);

    // atoms of u^(m), moved by the shift and weighted by eta_j, mollified in
    // closed form and scaled to unit quadrature mass
    const std::vector<double> kinks = u.kinks();
    auto& top = acc[static_cast<std::size_t>(M)];
    for (std::size_t b = 0; b < kinks.size(); ++b) {
        const double xk = u.breakpoints()[b] - c.sigma * h;
        const double weight = kinks[b] * c.part.template eta<0>(j, xk).value();
        if (weight == 0.0)
            continue;
        const long i0 = std::max(0L, static_cast<long>(std::ceil((xk - eps) / c.dx)));
        const long i1 = std::min(static_cast<long>(c.n), static_cast<long>(std::floor((xk + eps) / c.dx)));
        double mass = 0.0;
        for (long i = i0; i <= i1; ++i)
            mass += simpson_weight(static_cast<std::size_t>(i), 0, c.n) * bump((static_cast<double>(i) * c.dx - xk) / eps);
        mass *= c.dx;
        if (!(mass > 0.0))
            throw domain_error("mollified atom is not resolved by the grid");
        for (long i = i0; i <= i1; ++i)
            top[static_cast<std::size_t>(i)] += weight / mass * bump((static_cast<double>(i) * c.dx - xk) / eps);
    }
    return err;
}

/// Smallest J >= min_shells whose boundary layer {dist < 1/J} carries at
/// most `budget` of |u^(m)|.
inline int choose_shell_count(const PiecewiseSignal& u, double budget, const ApproxOptions& opt)
{
    const int m = u.order();
    const std::vector<double> kinks = u.kinks();
    for (int j = opt.min_shells; j < opt.max_shells; ++j) {
        const double layer = 1.0 / j;
        std::vector<double> cuts = u.breakpoints();
        cuts.push_back(layer);
        cuts.push_back(1.0 - layer);
        double mass = integrate_split(
            [&](double x) { return std::min(x, 1.0 - x) < layer ? std::abs(u.derivative(m, x)) : 0.0; }, cuts);
        for (std::size_t b = 0; b < kinks.size(); ++b) {
            const double x = u.breakpoints()[b];
            if (std::min(x, 1.0 - x) < layer)
                mass += std::abs(kinks[b]);
        }
        if (mass <= budget)
            return j;
    }
    return opt.max_shells;
}

inline double lq_error(const PiecewiseSignal& u, const SampledSmooth& phi, std::size_t a, std::size_t b, double q)
{
    CompensatedSum s;
    for (std::size_t i = a; i <= b; ++i) {
        const double d = u.value(static_cast<double>(i) * phi.dx) - phi.derivatives[0][i];
        s.add(simpson_weight(i, a, b) * std::pow(std::abs(d), q));
    }
    return std::pow(phi.dx * s.value(), 1.0 / q);
}

} // namespace detail

/// Builds phi with strict_distance(u, phi) + ||u - phi||_{L^q((0,1)-D)} <= target.
/// Shell j gets the budget target 2^-(j+2): its shift error picks the shift h,
/// its mollification error picks eps_j <= h/2. The shift is common to all
/// shells so that the partition's derivatives cancel in the sum.
inline ApproxResult smooth_approximate(const PiecewiseSignal& u, double target, Interval hole, double q = 2.0,
                                       const ApproxOptions& opt = {})
{
    if (!(target > 0.0))
        throw domain_error("approximation target must be > 0");
    if (!(q >= 1.0) || !std::isfinite(q))
        throw domain_error("integrability exponent q must lie in [1, inf)");
    const int m = u.order();
    ApproxResult res;
    res.target = target;
    res.kink_mass = u.kink_mass();
    res.shift_direction = shift_direction(hole);

    const int shells = detail::choose_shell_count(u, 0.25 * target, opt);
    const int p = std::clamp(static_cast<int>(std::ceil(std::log2(4096.0 / target))), opt.min_grid_exponent,
                             opt.max_grid_exponent);
    res.grid_exponent = p;
    const std::size_t n = std::size_t{1} << p;
    const double dx = 1.0 / static_cast<double>(n);

    double h = std::ldexp(1.0, -static_cast<int>(std::ceil(std::log2(64.0 / target))));
    h = std::min(h, 1.0 / 64.0);
    std::vector<double> eps(static_cast<std::size_t>(shells), 0.5 * h);

    std::size_t lq_begin = 0, lq_end = n;
    if (res.shift_direction < 0)
        lq_end = static_cast<std::size_t>(std::llround(hole.lo / dx));
    else
        lq_begin = static_cast<std::size_t>(std::llround(hole.hi / dx));
    if ((lq_end - lq_begin) % 2 == 1)
        res.shift_direction < 0 ? --lq_end : ++lq_begin;
    if (lq_end <= lq_begin)
        throw domain_error("observed part of (0,1) is below the grid resolution");

    const detail::ApproxContext ctx{&u,  ShellPartition(shells), m,  res.shift_direction, q, n, dx,
                                    static_cast<std::size_t>(std::floor(0.5 * h / dx)) + 2, lq_begin, lq_end};

    std::vector<std::vector<double>> acc;
    for (int round = 0; round < opt.max_rounds; ++round) {
        res.rounds = round + 1;
        if (*std::min_element(eps.begin(), eps.end()) < opt.min_eps_cells * dx) {
            res.failure = "per-shell budget needs eps below the quadrature resolution";
            break;
        }
        acc.assign(static_cast<std::size_t>(m + 1), std::vector<double>(n + 1, 0.0));
        res.shells.clear();
        bool retry = false;
        bool shrink_h = false;
        for (int j = 1; j <= shells; ++j) {
            const double e = eps[static_cast<std::size_t>(j - 1)];
            detail::ShellErrors se;
            switch (m) {
            case 1: se = detail::eval_shell<1>(ctx, j, h, e, acc); break;
            case 2: se = detail::eval_shell<2>(ctx, j, h, e, acc); break;
            default: se = detail::eval_shell<3>(ctx, j, h, e, acc); break;
            }
            const double budget = target * std::ldexp(1.0, -(j + 2));
            res.shells.push_back({j, budget, h, e, se.shift, se.mollify});
            if (se.shift > opt.shift_share * budget) {
                shrink_h = true;
                break;
            }
            if (se.mollify > (1.0 - opt.shift_share) * budget) {
                eps[static_cast<std::size_t>(j - 1)] *= 0.5;
                retry = true;
            }
        }
        if (shrink_h) {
            h *= 0.5;
            for (double& e : eps)
                e = std::min(e, 0.5 * h);
            continue;
        }
        if (retry)
            continue;

        res.approximant = SampledSmooth{dx, std::move(acc)};
        res.distance = strict_distance(u, res.approximant);
        res.lq_error = detail::lq_error(u, res.approximant, lq_begin, lq_end, q);
        res.achieved = res.distance.total() + res.lq_error;
        std::vector<double> mag(n + 1);
        for (std::size_t i = 0; i <= n; ++i)
            mag[i] = std::abs(res.approximant.derivatives[static_cast<std::size_t>(m)][i]);
        res.approximant_tv = detail::simpson(mag, dx);
        if (res.achieved <= target) {
            res.ok = true;
            return res;
        }
        h *= 0.5;
        for (double& e : eps)
            e *= 0.5;
    }
    if (res.failure.empty())
        res.failure = "target not reached within the round limit";
    return res;
}

} // namespace hotv
