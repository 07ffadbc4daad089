#pragma once

// JSON reports with a fixed field order and CSV tables. Everything that
// depends on the clock lives under "timing", so two runs with the same inputs
// agree byte for byte once that field is dropped.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "dual.hpp"
#include "energy.hpp"
#include "error.hpp"
#include "solver.hpp"

namespace hotv {

using Json = nlohmann::ordered_json;

inline constexpr const char* report_schema = "hotv.report/1";

/// Top-level keys in output order.
inline const std::vector<std::string>& report_keys()
{
    static const std::vector<std::string> k{"schema", "command", "status",      "error",   "config",
                                            "energy", "solve",   "certificate", "results", "timing"};
    return k;
}

inline Json to_json(const EnergyBreakdown& e)
{
    Json j;
    j["regularizer"] = e.regularizer;
    j["quadratic_delta"] = e.quadratic_delta;
    j["fidelity"] = e.fidelity;
    j["total"] = e.total;
    return j;
}

inline Json to_json(const StageRecord& s)
{
    Json j;
    j["delta"] = s.delta;
    j["iterations"] = s.iterations;
    j["restarts"] = s.restarts;
    j["energy"] = to_json(s.energy);
    j["energy_unregularized"] = s.energy_unregularized;
    j["grad_norm"] = s.grad_norm;
    j["residual"] = s.residual;
    j["delta_energy"] = s.delta_energy;
    j["converged"] = s.converged;
    j["stalled"] = s.stalled;
    return j;
}

/// The wall time is reported under "timing" instead.
inline Json to_json(const SolveReport& r)
{
    Json j;
    j["converged"] = r.converged();
    j["total_iterations"] = r.total_iterations;
    j["lipschitz"] = r.lipschitz;
    j["norm_sq_upper"] = r.norm_sq_upper;
    Json stages = Json::array();
    for (const auto& s : r.stages)
        stages.push_back(to_json(s));
    j["stages"] = std::move(stages);
    return j;
}

inline Json to_json(const Certificate& c)
{
    Json j;
    j["primal_value"] = c.primal_value;
    j["dual_value"] = c.dual_value;
    j["gap"] = c.gap;
    j["relative_gap"] = c.relative_gap;
    j["duality_relation_residual"] = c.duality_relation_residual;
    j["feasible"] = c.candidate.feasible;
    j["max_norm_ratio"] = c.candidate.max_norm_ratio;
    j["divergence_residual_on_D"] = c.candidate.divergence_residual_on_D;
    j["clip_magnitude"] = c.candidate.clip_magnitude;
    j["correction_norm"] = c.candidate.correction_norm;
    j["cg_iterations"] = c.candidate.cg_iterations;
    return j;
}

inline Json to_json(const RunConfig& c)
{
    Json j;
    j["mu"] = c.mu;
    j["m"] = c.m;
    j["lambda"] = c.lambda;
    j["h"] = c.h;
    j["tol"] = c.tol;
    j["max_iter"] = c.max_iter;
    j["delta0"] = c.delta0;
    j["delta_factor"] = c.delta_factor;
    j["delta_min"] = c.delta_min;
    j["seed"] = c.seed;
    j["input"] = c.input;
    j["mask"] = c.mask;
    j["output"] = c.output;
    j["report"] = c.report;
    j["csv"] = c.csv;
    j["maxval"] = c.maxval;
    j["rho"] = c.rho;
    j["excess_threshold"] = c.excess_threshold;
    j["r_max"] = c.r_max;
    j["mu_list"] = c.mu_list;
    j["targets"] = c.targets;
    j["q"] = c.q;
    j["apex"] = c.apex;
    j["hole_start"] = c.hole_start;
    j["scale"] = c.scale;
    return j;
}

/// Report under construction; sections left unset are written as null.
class Report {
public:
    explicit Report(std::string command) : command_(std::move(command)), start_(std::chrono::system_clock::now()) {}

    void set_config(const RunConfig& c) { config_ = to_json(c); }
    void set_energy(const EnergyBreakdown& e) { energy_ = to_json(e); }
    void set_solve(const SolveReport& r)
    {
        solve_ = to_json(r);
        solve_seconds_ += r.wall_seconds;
    }
    void set_solve(Json j, double seconds)
    {
        solve_ = std::move(j);
        solve_seconds_ += seconds;
    }
    void set_certificate(const Certificate& c) { certificate_ = to_json(c); }
    Json& results() { return results_; }

    void set_error(const std::string& kind, const std::string& message)
    {
        error_ = Json{{"kind", kind}, {"message", message}};
    }
    bool failed() const { return !error_.is_null(); }

    Json json() const
    {
        Json j;
        j["schema"] = report_schema;
        j["command"] = command_;
        j["status"] = failed() ? "error" : "ok";
        j["error"] = error_;
        j["config"] = config_;
        j["energy"] = energy_;
        j["solve"] = solve_;
        j["certificate"] = certificate_;
        j["results"] = results_.is_null() ? Json::object() : results_;
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(start_);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        j["timing"] = Json{{"started_utc", buf},
                           {"wall_seconds", std::chrono::duration<double>(now - start_).count()},
                           {"solve_seconds", solve_seconds_}};
        return j;
    }

    void write(const std::string& path) const
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw io_error("cannot open report " + path);
        out << json().dump(2) << '\n';
        if (!out)
            throw io_error("write failed for " + path);
    }

private:
    std::string command_;
    std::chrono::system_clock::time_point start_;
    Json error_;
    Json config_;
    Json energy_;
    Json solve_;
    Json certificate_;
    Json results_;
    double solve_seconds_ = 0.0;
};

/// Report JSON with the clock-dependent field removed.
inline Json deterministic_part(Json report)
{
    report.erase("timing");
    return report;
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(const std::vector<double>& row)
    {
        if (row.size() != header_.size())
            throw size_error("CSV row has " + std::to_string(row.size()) + " cells, header has "
                             + std::to_string(header_.size()));
        rows_.push_back(row);
    }

    std::size_t rows() const noexcept { return rows_.size(); }

    std::string str() const
    {
        std::string out;
        for (std::size_t i = 0; i < header_.size(); ++i)
            out += (i ? "," : "") + header_[i];
        out += '\n';
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", r[i]);
                out += (i ? "," : "") + std::string(buf);
            }
            out += '\n';
        }
        return out;
    }

    void write(const std::string& path) const
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw io_error("cannot open CSV " + path);
        out << str();
        if (!out)
            throw io_error("write failed for " + path);
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

} // namespace hotv
