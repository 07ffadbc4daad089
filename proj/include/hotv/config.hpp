#pragma once

// Run configuration: a flat key=value file ('#' starts a comment) with
// later assignments, including command-line overrides, taking precedence.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "density.hpp"
#include "error.hpp"
#include "solver.hpp"

namespace hotv {

struct RunConfig {
    // model
    double mu = 1.4;
    int m = 2;
    double lambda = 10.0;
    double h = 1.0;
    // solver
    double tol = 1e-8;
    int max_iter = 20000;
    double delta0 = 0.5;
    double delta_factor = 0.25;
    double delta_min = 1e-6;
    std::uint64_t seed = 0x5eed;
    // files
    std::string input;
    std::string mask;
    std::string output;
    std::string report;
    std::string csv;
    int maxval = 255;
    // command options
    std::vector<double> rho{1.0, 2.0, 4.0};
    double excess_threshold = 0.0; // > 0: also write the mask of pixels above it
    double r_max = 100.0;
    std::vector<double> mu_list{3.0, 5.0, 10.0, 30.0, 100.0};
    std::vector<double> targets{1e-1, 1e-2, 1e-3};
    double q = 2.0;
    double apex = 0.4;
    double hole_start = 0.75;
    double scale = 1.0; // multiplies 1D input signals

    std::set<std::string> assigned; // keys set by a file or an override

    /// Key names in echo order.
    static const std::vector<std::string>& keys()
    {
        static const std::vector<std::string> k{
            "mu",     "m",    "lambda",         "h",     "tol",     "max_iter", "delta0",  "delta_factor",
            "delta_min", "seed", "input",        "mask",  "output",  "report",   "csv",     "maxval",
            "rho",    "excess_threshold", "r_max", "mu_list", "targets", "q",        "apex",    "hole_start", "scale"};
        return k;
    }

    DensityParams density() const { return DensityParams{mu, m, 2, 0.0}; }

    SolveConfig solve_config() const { return SolveConfig{tol, max_iter, delta0, delta_factor, delta_min, seed}; }

    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    void validate() const;
};

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size())
        throw parse_error("'" + key + "' expects a number, got '" + v + "'", 0);
    return d;
}

inline long long parse_int(const std::string& key, const std::string& v)
{
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw parse_error("'" + key + "' expects an integer, got '" + v + "'", 0);
    return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_double(key, trim(item)));
    if (out.empty())
        throw parse_error("'" + key + "' expects a comma-separated list", 0);
    return out;
}

inline std::string format_double(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline std::string format_list(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + format_double(v[i]);
    return s;
}

} // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& raw)
{
    const std::string v = detail::trim(raw);
    using detail::parse_double;
    using detail::parse_int;
    using detail::parse_list;
    if (key == "mu") mu = parse_double(key, v);
    else if (key == "m") m = static_cast<int>(parse_int(key, v));
    else if (key == "lambda") lambda = parse_double(key, v);
    else if (key == "h") h = parse_double(key, v);
    else if (key == "tol") tol = parse_double(key, v);
    else if (key == "max_iter") max_iter = static_cast<int>(parse_int(key, v));
    else if (key == "delta0") delta0 = parse_double(key, v);
    else if (key == "delta_factor") delta_factor = parse_double(key, v);
    else if (key == "delta_min") delta_min = parse_double(key, v);
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(key, v));
    else if (key == "input") input = v;
    else if (key == "mask") mask = v;
    else if (key == "output") output = v;
    else if (key == "report") report = v;
    else if (key == "csv") csv = v;
    else if (key == "maxval") maxval = static_cast<int>(parse_int(key, v));
    else if (key == "rho") rho = parse_list(key, v);
    else if (key == "excess_threshold") excess_threshold = parse_double(key, v);
    else if (key == "r_max") r_max = parse_double(key, v);
    else if (key == "mu_list") mu_list = parse_list(key, v);
    else if (key == "targets") targets = parse_list(key, v);
    else if (key == "q") q = parse_double(key, v);
    else if (key == "apex") apex = parse_double(key, v);
    else if (key == "hole_start") hole_start = parse_double(key, v);
    else if (key == "scale") scale = parse_double(key, v);
    else throw parse_error("unknown configuration key '" + key + "'", 0);
    assigned.insert(key);
}

inline std::string RunConfig::get(const std::string& key) const
{
    using detail::format_double;
    using detail::format_list;
    if (key == "mu") return format_double(mu);
    if (key == "m") return std::to_string(m);
    if (key == "lambda") return format_double(lambda);
    if (key == "h") return format_double(h);
    if (key == "tol") return format_double(tol);
    if (key == "max_iter") return std::to_string(max_iter);
    if (key == "delta0") return format_double(delta0);
    if (key == "delta_factor") return format_double(delta_factor);
    if (key == "delta_min") return format_double(delta_min);
    if (key == "seed") return std::to_string(seed);
    if (key == "input") return input;
    if (key == "mask") return mask;
    if (key == "output") return output;
    if (key == "report") return report;
    if (key == "csv") return csv;
    if (key == "maxval") return std::to_string(maxval);
    if (key == "rho") return format_list(rho);
    if (key == "excess_threshold") return format_double(excess_threshold);
    if (key == "r_max") return format_double(r_max);
    if (key == "mu_list") return format_list(mu_list);
    if (key == "targets") return format_list(targets);
    if (key == "q") return format_double(q);
    if (key == "apex") return format_double(apex);
    if (key == "hole_start") return format_double(hole_start);
    if (key == "scale") return format_double(scale);
    throw parse_error("unknown configuration key '" + key + "'", 0);
}

inline void RunConfig::validate() const
{
    density().validate();
    solve_config().validate();
    if (!(lambda > 0.0))
        throw domain_error("lambda must be > 0");
    if (!(h > 0.0))
        throw domain_error("h must be > 0");
    if (maxval < 1 || maxval > 65535)
        throw domain_error("maxval must lie in [1, 65535]");
    for (double r : rho)
        if (!(r >= 1.0))
            throw domain_error("every rho must be >= 1 pixel");
    if (!(r_max >= 0.0))
        throw domain_error("r_max must be >= 0");
    for (double t : targets)
        if (!(t > 0.0))
            throw domain_error("approximation targets must be > 0");
    if (!(q >= 1.0))
        throw domain_error("q must be >= 1");
    if (!(apex > 0.0 && apex < 1.0))
        throw domain_error("apex must lie in (0,1)");
    if (!(hole_start > 0.0 && hole_start < 1.0))
        throw domain_error("hole_start must lie in (0,1)");
    if (!(scale > 0.0))
        throw domain_error("scale must be > 0");
}

/// Applies every "key = value" line of the text; the error offset is the
/// byte offset of the offending line.
inline void apply_config_text(RunConfig& cfg, const std::string& text)
{
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos)
            end = text.size();
        std::string line = text.substr(pos, end - pos);
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (!line.empty()) {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw parse_error("expected key = value", pos);
            try {
                cfg.set(detail::trim(line.substr(0, eq)), line.substr(eq + 1));
            } catch (const parse_error& e) {
                throw parse_error(e.message(), pos);
            }
        }
        pos = end + 1;
    }
}

inline void load_config_file(RunConfig& cfg, const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
}

/// "key=value" override from the command line.
inline void apply_override(RunConfig& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw parse_error("override must look like key=value: '" + assignment + "'", 0);
    cfg.set(detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

} // namespace hotv
