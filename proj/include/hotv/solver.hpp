#pragma once

// Minimization of J_delta by accelerated gradient descent with a fixed 1/L step
// and monotone restart, and the warm-started continuation delta -> delta_min.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "energy.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "stencil.hpp"
#include "summation.hpp"

namespace hotv {

struct SolveConfig {
    double tol = 1e-8;
    int max_iter = 20000;
    double delta0 = 0.5;
    double delta_factor = 0.25;
    double delta_min = 1e-6;
    std::uint64_t seed = 0x5eed;

    void validate() const
    {
        if (!(tol > 0.0))
            throw domain_error("tol must be > 0");
        if (max_iter < 1)
            throw domain_error("max_iter must be >= 1");
        if (!(delta_min > 0.0) || !(delta_min <= delta0))
            throw domain_error("need 0 < delta_min <= delta0");
        if (!(delta_factor > 0.0 && delta_factor < 1.0))
            throw domain_error("delta_factor must lie in (0, 1)");
    }

    /// delta0, delta0*q, ... while above delta_min, then delta_min itself.
    std::vector<double> schedule() const
    {
        validate();
        std::vector<double> out;
        for (double d = delta0; d > delta_min; d *= delta_factor)
            out.push_back(d);
        out.push_back(delta_min);
        return out;
    }
};

struct StageRecord {
    double delta = 0.0;
    int iterations = 0;
    int restarts = 0;
    EnergyBreakdown energy;          // J_delta at the stage result
    double energy_unregularized = 0; // J (delta = 0) at the stage result
    double grad_norm = 0.0;          // ||grad J_delta||
    double residual = 0.0;           // grad_norm / (1 + lambda ||f|| h)
    double delta_energy = 0.0;       // delta h^2 sum |Gu|^2
    bool converged = false;          // residual <= tol
    bool stalled = false;            // max_iter hit with residual > 1e3 tol
};

struct SolveReport {
    std::vector<StageRecord> stages;
    int total_iterations = 0;
    double lipschitz = 0.0;          // for delta = delta0; stages rescale by delta
    double norm_sq_upper = 0.0;      // bound on ||G||^2 used for the step
    double wall_seconds = 0.0;

    bool converged() const noexcept
    {
        for (const auto& s : stages)
            if (s.stalled)
                return false;
        return !stages.empty() && stages.back().converged;
    }
};

struct StageResult {
    ScalarField u;
    StageRecord record;
};

/// f with unobserved pixels replaced by the mean of the observed ones.
inline ScalarField initial_guess(const Problem& pr)
{
    CompensatedSum s;
    for (std::size_t p = 0; p < pr.f.size(); ++p)
        if (pr.mask.observed(p))
            s.add(pr.f[p]);
    const double mean = s.value() / static_cast<double>(pr.mask.observed_count());
    ScalarField u = pr.f;
    for (std::size_t p = 0; p < u.size(); ++p)
        if (!pr.mask.observed(p))
            u[p] = mean;
    return u;
}

namespace detail {

inline double residual_scale(const Problem& pr)
{
    CompensatedSum s;
    for (std::size_t p = 0; p < pr.f.size(); ++p)
        if (pr.mask.observed(p))
            s.add(pr.f[p] * pr.f[p]);
    return 1.0 + pr.lambda * std::sqrt(s.value()) * pr.h();
}

inline StageResult run_stage(EnergyEvaluator& ev, double delta, ScalarField u, const SolveConfig& cfg,
                             double norm_sq_upper)
{
    const Problem& pr = ev.problem();
    const double lip = lipschitz_bound(pr, norm_sq_upper, delta);
    const double step = 1.0 / lip;
    const double scale = residual_scale(pr);

    StageRecord rec;
    rec.delta = delta;

    ScalarField grad(pr.extents(), pr.h());
    ScalarField grad_y(pr.extents(), pr.h());
    ScalarField prev = u;
    ScalarField y = u;
    ScalarField trial = u;

    EnergyBreakdown e = ev.energy_and_gradient(u, delta, grad);
    double t = 1.0;
    int it = 0;
    for (;; ++it) {
        const double gnorm = norm2(grad);
        rec.grad_norm = gnorm;
        rec.residual = gnorm / scale;
        if (rec.residual <= cfg.tol || it >= cfg.max_iter)
            break;

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        for (std::size_t p = 0; p < u.size(); ++p)
            y[p] = u[p] + beta * (u[p] - prev[p]);
        ev.energy_and_gradient(y, delta, grad_y);
        for (std::size_t p = 0; p < u.size(); ++p)
            trial[p] = y[p] - step * grad_y[p];
        EnergyBreakdown e_trial = ev.energy(trial, delta);

        if (e_trial.total > e.total) {
            // momentum overshot: restart from a plain gradient step at u
            ++rec.restarts;
            t = 1.0;
            for (std::size_t p = 0; p < u.size(); ++p)
                trial[p] = u[p] - step * grad[p];
            e_trial = ev.energy(trial, delta);
            if (e_trial.total > e.total)
                break; // no descent possible at this precision
        } else {
            t = t_next;
        }
        std::swap(prev, u);
        std::swap(u, trial);
        e = ev.energy_and_gradient(u, delta, grad);
    }
    rec.iterations = it;
    rec.energy = e;
    rec.energy_unregularized = e.regularizer + e.fidelity;
    rec.delta_energy = e.quadratic_delta;
    rec.converged = rec.residual <= cfg.tol;
    rec.stalled = !rec.converged && rec.residual > 1e3 * cfg.tol;
    return {std::move(u), rec};
}

} // namespace detail

/// One delta-stage from u0. Computes its own step bound.
inline StageResult minimize_stage(const Problem& pr, double delta, const ScalarField& u0, const SolveConfig& cfg)
{
    pr.validate();
    cfg.validate();
    if (!(delta > 0.0))
        throw domain_error("stage delta must be > 0");
    require_same_extents(pr.extents(), u0.extents(), "initial guess");
    EnergyEvaluator ev(pr);
    const double nsq = operator_norm_upper(ev.op(), cfg.seed);
    return detail::run_stage(ev, delta, u0, cfg, nsq);
}

using StageObserver = std::function<void(const StageRecord&, const ScalarField&)>;

struct SolveResult {
    ScalarField u;
    SolveReport report;
};

/// Continuation over the geometric delta schedule with warm starts.
inline SolveResult solve(const Problem& pr, const SolveConfig& cfg, const ScalarField& u0,
                         const StageObserver& observer = {})
{
    pr.validate();
    const auto deltas = cfg.schedule();
    require_same_extents(pr.extents(), u0.extents(), "initial guess");
    const auto start = std::chrono::steady_clock::now();

    EnergyEvaluator ev(pr);
    SolveReport report;
    report.norm_sq_upper = operator_norm_upper(ev.op(), cfg.seed);
    report.lipschitz = lipschitz_bound(pr, report.norm_sq_upper, deltas.front());

    ScalarField u = u0;
    for (double d : deltas) {
        auto stage = detail::run_stage(ev, d, std::move(u), cfg, report.norm_sq_upper);
        u = std::move(stage.u);
        report.total_iterations += stage.record.iterations;
        if (observer)
            observer(stage.record, u);
        report.stages.push_back(stage.record);
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(u), std::move(report)};
}

inline SolveResult solve(const Problem& pr, const SolveConfig& cfg, const StageObserver& observer = {})
{
    return solve(pr, cfg, initial_guess(pr), observer);
}

} // namespace hotv
