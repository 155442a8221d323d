#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "toeplab/ensemble.hpp"
#include "toeplab/format.hpp"
#include "toeplab/harness/parallel.hpp"

namespace toeplab::harness {

using json = nlohmann::json;

enum class Experiment { growth, mean_case, noniid_limsup, concentration, hankel_check, sandwich_audit };
enum class OutputFormat { csv, json };

inline std::string to_string(Experiment e)
{
    switch (e)
    {
    case Experiment::growth: return "growth";
    case Experiment::mean_case: return "mean_case";
    case Experiment::noniid_limsup: return "noniid_limsup";
    case Experiment::concentration: return "concentration";
    case Experiment::hankel_check: return "hankel_check";
    case Experiment::sandwich_audit: return "sandwich_audit";
    }
    return "growth";
}

inline Experiment experiment_from_string(std::string const& s)
{
    for (auto e : {Experiment::growth, Experiment::mean_case, Experiment::noniid_limsup, Experiment::concentration,
                   Experiment::hankel_check, Experiment::sandwich_audit})
        if (to_string(e) == s)
            return e;
    if (s == "mean-case")
        return Experiment::mean_case;
    if (s == "noniid")
        return Experiment::noniid_limsup;
    if (s == "hankel")
        return Experiment::hankel_check;
    if (s == "sandwich")
        return Experiment::sandwich_audit;
    throw std::invalid_argument("unknown experiment '" + s + "'");
}

inline OutputFormat format_from_string(std::string const& s)
{
    if (s == "csv")
        return OutputFormat::csv;
    if (s == "json")
        return OutputFormat::json;
    throw std::invalid_argument("unknown format '" + s + "' (expected csv or json)");
}

namespace detail {

inline std::vector<double> parse_numbers(std::string const& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        if (item.empty())
            continue;
        std::size_t pos = 0;
        double v = std::stod(item, &pos);
        if (pos != item.size())
            throw std::invalid_argument("malformed number '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace detail

/// Parse "name[:p1,p2]", e.g. "gaussian:1,1", "uniform:2", "student_t:5",
/// "constant:3", "rademacher", "two_point_heavy".
inline Family parse_family(std::string const& text)
{
    std::string name = text, args;
    if (auto colon = text.find(':'); colon != std::string::npos)
    {
        name = text.substr(0, colon);
        args = text.substr(colon + 1);
    }
    std::vector<double> p;
    try
    {
        p = detail::parse_numbers(args);
    }
    catch (std::exception const&)
    {
        throw std::invalid_argument("bad distribution parameters in '" + text + "'");
    }
    auto want = [&](std::size_t lo, std::size_t hi) {
        if (p.size() < lo || p.size() > hi)
            throw std::invalid_argument("wrong number of parameters for distribution '" + name + "'");
    };
    Family f;
    if (name == "rademacher")
    {
        want(0, 0);
        f = family::Rademacher{};
    }
    else if (name == "gaussian" || name == "normal")
    {
        want(0, 2);
        f = family::Gaussian{p.size() > 0 ? p[0] : 0.0, p.size() > 1 ? p[1] : 1.0};
    }
    else if (name == "uniform" || name == "uniform_centered")
    {
        want(0, 1);
        f = family::UniformCentered{p.empty() ? 1.0 : p[0]};
    }
    else if (name == "student_t" || name == "t")
    {
        want(1, 1);
        f = family::StudentT{p[0]};
    }
    else if (name == "two_point_heavy")
    {
        want(0, 0);
        f = family::TwoPointHeavy{};
    }
    else if (name == "constant")
    {
        want(1, 1);
        f = family::Constant{p[0]};
    }
    else
        throw std::invalid_argument("unknown distribution '" + name + "'");
    toeplab::detail::validate(f);
    return f;
}

inline std::string family_to_string(Family const& f)
{
    return std::visit(
        [](auto const& fam) -> std::string {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, family::Gaussian>)
                return "gaussian:" + format_double(fam.mean) + "," + format_double(fam.sd);
            else if constexpr (std::is_same_v<T, family::UniformCentered>)
                return "uniform_centered:" + format_double(fam.halfwidth);
            else if constexpr (std::is_same_v<T, family::StudentT>)
                return "student_t:" + format_double(fam.dof);
            else if constexpr (std::is_same_v<T, family::Constant>)
                return "constant:" + format_double(fam.value);
            else if constexpr (std::is_same_v<T, family::Rademacher>)
                return "rademacher";
            else
                return "two_point_heavy";
        },
        f);
}

inline std::string truncation_to_string(std::optional<TruncationRule> const& rule)
{
    if (!rule)
        return "none";
    return rule->kind == TruncationRule::Kind::by_index ? "by_index" : "by_dimension";
}

inline std::optional<TruncationRule> truncation_from_string(std::string const& s)
{
    if (s == "none" || s.empty())
        return std::nullopt;
    if (s == "by_index")
        return TruncationRule::per_index();
    if (s == "by_dimension")
        return TruncationRule::per_dimension(0);  // dimension set per task
    throw std::invalid_argument("unknown truncation '" + s + "'");
}

inline void to_json(json& j, EnsembleSpec const& spec)
{
    j = json{{"dist", family_to_string(spec.family)},
             {"truncation", truncation_to_string(spec.truncation)},
             {"master_seed", spec.master_seed}};
}

inline void from_json(json const& j, EnsembleSpec& spec)
{
    if (j.contains("dist"))
        spec.family = parse_family(j.at("dist").get<std::string>());
    if (j.contains("truncation"))
        spec.truncation = truncation_from_string(j.at("truncation").get<std::string>());
    if (j.contains("master_seed"))
        spec.master_seed = j.at("master_seed").get<std::uint64_t>();
}

struct ExperimentConfig {
    Experiment experiment = Experiment::growth;
    EnsembleSpec ensemble;
    std::vector<std::size_t> n_grid{256, 1024, 4096};
    std::size_t samples_per_n = 200;
    double tol = 1e-7;             ///< relative residual tolerance for norms
    int max_iter = 0;              ///< 0 means 4n
    int workers = default_workers();
    std::string out_path;
    OutputFormat format = OutputFormat::csv;

    bool with_symbols = false;     ///< record sup|fejer| and sup|laurent| in growth-type runs
    double symbol_tol = 1e-6;      ///< sandwich tolerance
    double conf_alpha = 0.01;      ///< Clopper-Pearson level for tail envelopes
    std::size_t tail_points = 40;  ///< threshold grid size for concentration
    double exceed_c = 0.5;         ///< threshold multiplier c in |x_{n-1}| > c sqrt(n log n)
    bool noniid_norms = true;      ///< compute ||T_N|| at the grid points (else entry bounds only)
    bool record_timing = false;    ///< fill elapsed_ms (breaks byte-reproducibility)
    std::size_t dense_cap = 2048;

    /// Sort and dedupe n_grid, then check invariants.
    void normalize()
    {
        std::sort(n_grid.begin(), n_grid.end());
        n_grid.erase(std::unique(n_grid.begin(), n_grid.end()), n_grid.end());
        if (n_grid.empty())
            throw std::invalid_argument("config: n_grid must be non-empty");
        if (n_grid.front() == 0)
            throw std::invalid_argument("config: n_grid entries must be >= 1");
        if (samples_per_n == 0)
            throw std::invalid_argument("config: samples_per_n must be >= 1");
        if (!(tol > 0.0))
            throw std::invalid_argument("config: tol must be positive");
        if (!(symbol_tol > 0.0))
            throw std::invalid_argument("config: symbol_tol must be positive");
        if (!(conf_alpha > 0.0 && conf_alpha < 1.0))
            throw std::invalid_argument("config: conf_alpha must lie in (0, 1)");
        if (tail_points < 2)
            throw std::invalid_argument("config: tail_points must be >= 2");
        if (workers < 1)
            workers = 1;
        toeplab::detail::validate(ensemble.family);
    }

    int max_iter_for(std::size_t n) const { return max_iter > 0 ? max_iter : static_cast<int>(4 * n); }
};

/// Experiment-defining fields. Execution settings (workers, out_path) are
/// left out so that reports do not depend on them.
inline void to_json(json& j, ExperimentConfig const& c)
{
    json ensemble;
    to_json(ensemble, c.ensemble);
    j = json{{"experiment", to_string(c.experiment)},
             {"ensemble", ensemble},
             {"n_grid", c.n_grid},
             {"samples_per_n", c.samples_per_n},
             {"tol", c.tol},
             {"max_iter", c.max_iter},
             {"format", c.format == OutputFormat::csv ? "csv" : "json"},
             {"with_symbols", c.with_symbols},
             {"symbol_tol", c.symbol_tol},
             {"conf_alpha", c.conf_alpha},
             {"tail_points", c.tail_points},
             {"exceed_c", c.exceed_c},
             {"noniid_norms", c.noniid_norms},
             {"record_timing", c.record_timing},
             {"dense_cap", c.dense_cap}};
}

/// Overlay the fields present in `j` onto `c`.
inline void from_json(json const& j, ExperimentConfig& c)
{
    if (j.contains("experiment"))
        c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
    if (j.contains("ensemble"))
        from_json(j.at("ensemble"), c.ensemble);
    if (j.contains("dist"))
        c.ensemble.family = parse_family(j.at("dist").get<std::string>());
    if (j.contains("seed"))
        c.ensemble.master_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n_grid"))
        c.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    if (j.contains("samples_per_n"))
        c.samples_per_n = j.at("samples_per_n").get<std::size_t>();
    if (j.contains("tol"))
        c.tol = j.at("tol").get<double>();
    if (j.contains("max_iter"))
        c.max_iter = j.at("max_iter").get<int>();
    if (j.contains("workers"))
        c.workers = j.at("workers").get<int>();
    if (j.contains("out_path"))
        c.out_path = j.at("out_path").get<std::string>();
    if (j.contains("format"))
        c.format = format_from_string(j.at("format").get<std::string>());
    if (j.contains("with_symbols"))
        c.with_symbols = j.at("with_symbols").get<bool>();
    if (j.contains("symbol_tol"))
        c.symbol_tol = j.at("symbol_tol").get<double>();
    if (j.contains("conf_alpha"))
        c.conf_alpha = j.at("conf_alpha").get<double>();
    if (j.contains("tail_points"))
        c.tail_points = j.at("tail_points").get<std::size_t>();
    if (j.contains("exceed_c"))
        c.exceed_c = j.at("exceed_c").get<double>();
    if (j.contains("noniid_norms"))
        c.noniid_norms = j.at("noniid_norms").get<bool>();
    if (j.contains("record_timing"))
        c.record_timing = j.at("record_timing").get<bool>();
    if (j.contains("dense_cap"))
        c.dense_cap = j.at("dense_cap").get<std::size_t>();
}

inline ExperimentConfig load_config(std::string const& path, ExperimentConfig base = {})
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file '" + path + "'");
    json j;
    try
    {
        in >> j;
    }
    catch (json::exception const& e)
    {
        throw std::invalid_argument("config file '" + path + "': " + e.what());
    }
    from_json(j, base);
    return base;
}

}  // namespace toeplab::harness
