// hotv: command-line front end.
//
// Exit status: 0 ok, 1 numerical failure, 2 usage or I/O failure.

#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hotv/hotv.hpp"

namespace {

using namespace hotv;

enum Exit { exit_ok = 0, exit_math = 1, exit_usage = 2 };

struct MathFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string with_suffix(const std::string& path, const std::string& suffix)
{
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + suffix;
    return path.substr(0, dot) + suffix + path.substr(dot);
}

std::string report_path(const RunConfig& cfg)
{
    if (!cfg.report.empty())
        return cfg.report;
    if (cfg.output.empty())
        return {};
    // out.pgm -> out.json
    const std::string& o = cfg.output;
    const auto slash = o.find_last_of('/');
    const auto dot = o.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return o + ".json";
    return o.substr(0, dot) + ".json";
}

ScalarField load_input(const RunConfig& cfg)
{
    if (cfg.input.empty())
        throw UsageError("this command needs an input image (-i)");
    return read_pgm(cfg.input, cfg.h);
}

Problem load_problem(const RunConfig& cfg, bool mask_required)
{
    ScalarField f = load_input(cfg);
    Mask mask = Mask::full(f.extents());
    if (!cfg.mask.empty())
        mask = read_mask(cfg.mask, f.extents());
    else if (mask_required)
        throw UsageError("inpaint needs a mask image (--mask)");
    DensityParams d = cfg.density();
    d.n = f.extents().dim();
    return Problem(std::move(f), std::move(mask), cfg.lambda, d);
}

void write_output(const RunConfig& cfg, const ScalarField& u, const std::string& suffix = "")
{
    if (!cfg.output.empty())
        write_pgm(u, with_suffix(cfg.output, suffix), cfg.maxval);
}

void require_converged(const SolveReport& r)
{
    if (!r.converged())
        throw MathFailure("solver did not reach the residual tolerance");
}

// ---- commands -----------------------------------------------------------

void run_solve(const RunConfig& cfg, Report& rep, bool inpaint, bool with_certificate)
{
    const Problem pr = load_problem(cfg, inpaint);
    Json gaps = Json::array();
    StageObserver obs;
    if (with_certificate)
        obs = [&](const StageRecord& s, const ScalarField& u) {
            const Certificate c = certify(pr, u);
            gaps.push_back(Json{{"delta", s.delta}, {"gap", c.gap}, {"relative_gap", c.relative_gap}});
        };
    const SolveResult res = solve(pr, cfg.solve_config(), obs);
    Problem plain = pr;
    plain.density.delta = 0.0;
    rep.set_energy(eval_energy(plain, res.u));
    rep.set_solve(res.report);
    rep.results()["observed_pixels"] = pr.mask.observed_count();
    rep.results()["hole_pixels"] = pr.mask.hole_count();
    write_output(cfg, res.u);
    if (with_certificate) {
        const Certificate c = certify(pr, res.u);
        rep.set_certificate(c);
        rep.results()["stage_gaps"] = gaps;
        if (!c.candidate.feasible)
            throw MathFailure("no feasible dual candidate");
    }
    require_converged(res.report);
}

void run_excess(const RunConfig& cfg, Report& rep)
{
    const Problem pr = load_problem(cfg, false);
    Json phi_norms = Json::array();
    const bool phi_ok = cfg.mu < 2.0;
    const int margin = cfg.m + 1;
    const SolveResult res = solve(pr, cfg.solve_config(), [&](const StageRecord& s, const ScalarField& u) {
        if (phi_ok)
            phi_norms.push_back(Json{{"delta", s.delta}, {"w12_seminorm", w12_seminorm(phi_field(u, pr.density), margin)}});
    });
    Problem plain = pr;
    plain.density.delta = 0.0;
    rep.set_energy(eval_energy(plain, res.u));
    rep.set_solve(res.report);

    const auto rows = excess_decay(res.u, cfg.m, cfg.rho);
    CsvTable table({"rho", "mean_excess", "max_excess", "pixels"});
    Json jrows = Json::array();
    for (const auto& r : rows) {
        table.add_row({r.rho, r.mean, r.max, static_cast<double>(r.pixels)});
        jrows.push_back(Json{{"rho", r.rho}, {"mean", r.mean}, {"max", r.max}, {"pixels", r.pixels}});
    }
    rep.results()["excess_decay"] = jrows;
    rep.results()["phi_w12_per_stage"] = phi_ok ? phi_norms : Json(nullptr);
    if (!cfg.csv.empty())
        table.write(cfg.csv);

    const ExcessMap em = excess_map(res.u, cfg.m, cfg.rho.front());
    double peak = 0.0;
    for (std::size_t i = 0; i < em.values.size(); ++i)
        peak = std::max(peak, em.values[i]);
    rep.results()["excess_peak"] = peak;
    if (!cfg.output.empty()) {
        ScalarField img = em.values;
        if (peak > 0.0)
            img *= 1.0 / peak;
        write_pgm(img, cfg.output, cfg.maxval);
        write_pgm(res.u, with_suffix(cfg.output, "_solution"), cfg.maxval);
        if (cfg.excess_threshold > 0.0) {
            const auto flags = excess_above(em, cfg.excess_threshold);
            std::size_t count = 0;
            for (bool b : flags)
                count += b;
            rep.results()["pixels_above_threshold"] = count;
            write_pgm(flags_image(em.values.extents(), flags), with_suffix(cfg.output, "_singular"), cfg.maxval);
        }
    }
    require_converged(res.report);
}

void run_limit_study(const RunConfig& cfg, Report& rep)
{
    CsvTable table({"mu", "r_max", "sup_error", "bound"});
    Json rows = Json::array();
    bool within = true;
    for (double mu : cfg.mu_list) {
        const double err = tv_limit_error(mu, cfg.r_max);
        const double bound = 1.0 / (mu - 2.0);
        within = within && err <= bound;
        table.add_row({mu, cfg.r_max, err, bound});
        rows.push_back(Json{{"mu", mu}, {"r_max", cfg.r_max}, {"sup_error", err}, {"bound", bound}});
    }
    rep.results()["tv_limit"] = rows;
    DensityParams d = cfg.density();
    const EllipticityBounds eb = ellipticity_probe(d, 10000, cfg.seed);
    rep.results()["ellipticity"] = Json{{"mu", cfg.mu}, {"m", cfg.m}, {"samples", 10000},
                                        {"nu4_measured", eb.nu4_measured}, {"nu5_measured", eb.nu5_measured}};
    if (!cfg.csv.empty())
        table.write(cfg.csv);
    if (!within)
        throw MathFailure("TV-limit deviation exceeded 1/(mu-2)");
}

void run_approx_demo(const RunConfig& cfg, Report& rep)
{
    const PiecewiseSignal u = PiecewiseSignal::hat(cfg.apex);
    const Interval hole{cfg.hole_start, 1.0};
    CsvTable table({"target", "achieved", "sobolev_part", "tv_gap", "area_gap", "lq_error", "approximant_tv",
                    "kink_mass", "ok", "shells", "h", "eps_min", "grid_exponent"});
    Json rows = Json::array();
    bool all_ok = true;
    for (double t : cfg.targets) {
        const ApproxResult r = smooth_approximate(u, t, hole, cfg.q);
        double h = 0.0, eps_min = 0.0;
        if (!r.shells.empty()) {
            h = r.shells.front().h;
            eps_min = r.shells.front().eps;
            for (const auto& s : r.shells)
                eps_min = std::min(eps_min, s.eps);
        }
        all_ok = all_ok && r.ok;
        table.add_row({t, r.achieved, r.distance.sobolev_part, r.distance.tv_gap, r.distance.area_gap, r.lq_error,
                       r.approximant_tv, r.kink_mass, r.ok ? 1.0 : 0.0, static_cast<double>(r.shells.size()), h,
                       eps_min, static_cast<double>(r.grid_exponent)});
        Json shells = Json::array();
        for (const auto& s : r.shells)
            shells.push_back(Json{{"index", s.index}, {"budget", s.budget}, {"h", s.h}, {"eps", s.eps},
                                  {"shift_error", s.shift_error}, {"mollify_error", s.mollify_error}});
        rows.push_back(Json{{"target", t},
                            {"ok", r.ok},
                            {"failure", r.failure},
                            {"achieved", r.achieved},
                            {"sobolev_part", r.distance.sobolev_part},
                            {"tv_gap", r.distance.tv_gap},
                            {"area_gap", r.distance.area_gap},
                            {"lq_error", r.lq_error},
                            {"approximant_tv", r.approximant_tv},
                            {"kink_mass", r.kink_mass},
                            {"shift_direction", r.shift_direction},
                            {"grid_exponent", r.grid_exponent},
                            {"shells", shells}});
    }
    rep.results()["approximation"] = rows;
    if (!cfg.csv.empty())
        table.write(cfg.csv);
    if (!all_ok)
        throw MathFailure("some approximation target was not met");
}

void run_staircase(RunConfig cfg, Report& rep)
{
    ScalarField f;
    if (cfg.input.empty()) {
        if (!cfg.assigned.count("lambda"))
            cfg.lambda = fixtures::staircase_lambda;
        if (!cfg.assigned.count("scale"))
            cfg.scale = fixtures::staircase_scale;
        f = fixtures::noisy_ramp(fixtures::default_seed, 128, 0.05, cfg.scale, cfg.h);
        rep.results()["input"] = "built-in noisy ramp";
    } else {
        f = load_input(cfg);
        if (f.height() != 1)
            throw size_error("staircase-compare needs a 1D signal (an image of height 1)");
        f *= cfg.scale;
    }
    rep.set_config(cfg);

    Json per_order = Json::array();
    Json solves = Json::object();
    double seconds = 0.0;
    std::vector<ScalarField> sol;
    std::map<int, StaircaseMetric> metric;
    bool converged = true;
    for (int m : {1, 2}) {
        DensityParams d = cfg.density();
        d.m = m;
        d.n = 1;
        const Problem pr = Problem::denoising(f, cfg.lambda, d);
        const SolveResult r = solve(pr, cfg.solve_config());
        seconds += r.report.wall_seconds;
        converged = converged && r.report.converged();
        metric[m] = staircase_metric(r.u);
        solves["m" + std::to_string(m)] = to_json(r.report);
        Problem plain = pr;
        plain.density.delta = 0.0;
        per_order.push_back(Json{{"m", m},
                                 {"jump_count", metric[m].jump_count},
                                 {"gradient_tv", metric[m].gradient_tv},
                                 {"threshold", metric[m].threshold},
                                 {"energy", to_json(eval_energy(plain, r.u))}});
        sol.push_back(r.u);
    }
    rep.set_solve(solves, seconds);
    rep.results()["orders"] = per_order;
    rep.results()["input_jump_count"] = staircase_metric(f).jump_count;
    rep.results()["second_order_not_worse"] = metric[2].jump_count <= metric[1].jump_count;

    if (!cfg.csv.empty()) {
        CsvTable t({"x", "f", "u_m1", "u_m2"});
        for (int x = 0; x < f.width(); ++x)
            t.add_row({static_cast<double>(x), f(x, 0), sol[0](x, 0), sol[1](x, 0)});
        t.write(cfg.csv);
    }
    if (!cfg.output.empty()) {
        for (int k = 0; k < 2; ++k) {
            ScalarField img = sol[static_cast<std::size_t>(k)];
            img *= 1.0 / cfg.scale;
            write_pgm(img, with_suffix(cfg.output, k == 0 ? "_m1" : "_m2"), cfg.maxval);
        }
    }
    if (!converged)
        throw MathFailure("solver did not reach the residual tolerance");
}

// ---- dispatch ------------------------------------------------------------

struct CommonOptions {
    std::string config_file;
    std::vector<std::string> overrides;
    std::optional<std::string> input, output, mask, report, csv;
    std::optional<double> mu, lambda;
    std::optional<int> m;
};

void add_common(CLI::App* sub, CommonOptions& o)
{
    sub->add_option("-c,--config", o.config_file, "key=value configuration file");
    sub->add_option("-s,--set", o.overrides, "override a configuration key (key=value), repeatable");
    sub->add_option("-i,--input", o.input, "input PGM");
    sub->add_option("-o,--output", o.output, "output PGM");
    sub->add_option("--mask", o.mask, "mask PGM (white = observed)");
    sub->add_option("-r,--report", o.report, "JSON report path");
    sub->add_option("--csv", o.csv, "CSV table path");
    sub->add_option("--mu", o.mu, "density exponent");
    sub->add_option("--lambda", o.lambda, "fidelity weight");
    sub->add_option("-m,--order", o.m, "derivative order");
}

RunConfig build_config(const CommonOptions& o)
{
    RunConfig cfg;
    if (!o.config_file.empty())
        load_config_file(cfg, o.config_file);
    auto put = [&](const char* key, const auto& v) {
        if (!v)
            return;
        if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>)
            cfg.set(key, *v);
        else
            cfg.set(key, detail::format_double(static_cast<double>(*v)));
    };
    put("input", o.input);
    put("output", o.output);
    put("mask", o.mask);
    put("report", o.report);
    put("csv", o.csv);
    put("mu", o.mu);
    put("lambda", o.lambda);
    if (o.m)
        cfg.set("m", std::to_string(*o.m));
    for (const auto& a : o.overrides)
        apply_override(cfg, a);
    return cfg;
}

int run_command(const std::string& name, const CommonOptions& opts)
{
    Report rep(name);
    std::string path;
    int code = exit_ok;
    try {
        RunConfig cfg = build_config(opts);
        path = report_path(cfg);
        rep.set_config(cfg);
        try {
            cfg.validate();
        } catch (const domain_error& e) {
            // an out-of-range setting is a usage error, not a numerical one
            throw UsageError(e.what());
        }
        if (name == "denoise")
            run_solve(cfg, rep, false, false);
        else if (name == "inpaint")
            run_solve(cfg, rep, true, false);
        else if (name == "certify")
            run_solve(cfg, rep, false, true);
        else if (name == "excess")
            run_excess(cfg, rep);
        else if (name == "limit-study")
            run_limit_study(cfg, rep);
        else if (name == "approx-demo")
            run_approx_demo(cfg, rep);
        else if (name == "staircase-compare")
            run_staircase(cfg, rep);
    } catch (const UsageError& e) {
        rep.set_error("usage", e.what());
        code = exit_usage;
    } catch (const parse_error& e) {
        rep.set_error("usage", e.what());
        code = exit_usage;
    } catch (const io_error& e) {
        rep.set_error("io", e.what());
        code = exit_usage;
    } catch (const MathFailure& e) {
        rep.set_error("math", e.what());
        code = exit_math;
    } catch (const std::exception& e) {
        rep.set_error("math", e.what());
        code = exit_math;
    }
    if (rep.failed())
        std::cerr << "hotv " << name << ": " << rep.json()["error"]["message"].get<std::string>() << '\n';
    try {
        if (path.empty())
            std::cout << rep.json().dump(2) << '\n';
        else
            rep.write(path);
    } catch (const std::exception& e) {
        std::cerr << "hotv " << name << ": " << e.what() << '\n';
        return exit_usage;
    }
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Higher-order linear-growth image regularization"};
    app.require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> commands{
        {"denoise", "denoise an image (mask optional, absent means nothing is masked)"},
        {"inpaint", "denoise and fill the black region of the mask"},
        {"certify", "solve and report a duality-gap certificate"},
        {"excess", "solve, then tabulate the excess function and its decay"},
        {"limit-study", "deviation from the TV limit for a list of exponents"},
        {"approx-demo", "1D smooth approximation of a hat function"},
        {"staircase-compare", "first- vs second-order staircasing on a 1D signal"},
    };
    std::vector<CommonOptions> opts(commands.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        subs.push_back(app.add_subcommand(commands[i].first, commands[i].second));
        add_common(subs.back(), opts[i]);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }
    for (std::size_t i = 0; i < subs.size(); ++i)
        if (subs[i]->parsed())
            return run_command(commands[i].first, opts[i]);
    return exit_usage;
}
