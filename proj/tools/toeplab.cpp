// toeplab: command-line front end for the random Toeplitz norm laboratory.
//
// Exit codes: 0 success, 1 contract violation or runtime failure, 2 usage error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "toeplab/harness.hpp"
#include "toeplab/toeplab.hpp"

namespace {

using toeplab::harness::ExperimentConfig;
using toeplab::harness::json;

constexpr int exit_ok = 0;
constexpr int exit_violation = 1;
constexpr int exit_usage = 2;

struct CommonFlags {
    std::string config_path;
    std::size_t n = 0;
    std::string n_grid;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::string dist;
    std::string truncate;
    int workers = 0;
    double tol = 0.0;
    std::string out;
    std::string format;
    bool symbols = false;
    bool timing = false;
    double exceed_c = 0.0;
    double conf_alpha = 0.0;
    double symbol_tol = 0.0;
    bool skip_norms = false;
};

void add_common(CLI::App* sub, CommonFlags& f)
{
    sub->add_option("--config", f.config_path, "JSON config file (CLI flags override it)");
    sub->add_option("--n", f.n, "single matrix dimension (replaces the n grid)");
    sub->add_option("--n-grid", f.n_grid, "comma-separated dimensions, e.g. 256,1024,4096");
    sub->add_option("--samples", f.samples, "samples per n (seeds for noniid)");
    sub->add_option("--seed", f.seed, "master seed");
    sub->add_option("--dist", f.dist, "rademacher | gaussian[:mean,sd] | uniform[:a] | student_t:dof | "
                                      "two_point_heavy | constant:m");
    sub->add_option("--truncate", f.truncate, "none | by_index | by_dimension");
    sub->add_option("--workers", f.workers, "worker threads (default: $TOEPLAB_WORKERS or hardware)");
    sub->add_option("--tol", f.tol, "relative residual tolerance for norms");
    sub->add_option("--out", f.out, "output path (stdout when omitted)");
    sub->add_option("--format", f.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--symbols", f.symbols, "also certify sup|fejer| and sup|laurent| (growth)");
    sub->add_flag("--timing", f.timing, "record elapsed_ms (output is then not byte-reproducible)");
    sub->add_option("--exceed-c", f.exceed_c, "c in |x_{n-1}| > c sqrt(n log n) (noniid)");
    sub->add_option("--conf-alpha", f.conf_alpha, "Clopper-Pearson level alpha (concentration)");
    sub->add_option("--symbol-tol", f.symbol_tol, "sandwich tolerance");
    sub->add_flag("--skip-norms", f.skip_norms, "noniid: track entry lower bounds only");
}

ExperimentConfig build_config(CLI::App const* sub, CommonFlags const& f, toeplab::harness::Experiment experiment)
{
    ExperimentConfig cfg;
    if (!f.config_path.empty())
        cfg = toeplab::harness::load_config(f.config_path, cfg);
    cfg.experiment = experiment;
    auto given = [&](char const* name) { return sub->count(name) > 0; };
    if (given("--n"))
        cfg.n_grid = {f.n};
    if (given("--n-grid"))
    {
        cfg.n_grid.clear();
        for (double v : toeplab::harness::detail::parse_numbers(f.n_grid))
        {
            if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
                throw std::invalid_argument("--n-grid entries must be positive integers");
            cfg.n_grid.push_back(static_cast<std::size_t>(v));
        }
    }
    if (given("--samples"))
        cfg.samples_per_n = f.samples;
    if (given("--seed"))
        cfg.ensemble.master_seed = f.seed;
    if (given("--dist"))
        cfg.ensemble.family = toeplab::harness::parse_family(f.dist);
    if (given("--truncate"))
        cfg.ensemble.truncation = toeplab::harness::truncation_from_string(f.truncate);
    if (given("--workers"))
        cfg.workers = f.workers;
    if (given("--tol"))
        cfg.tol = f.tol;
    if (given("--out"))
        cfg.out_path = f.out;
    if (given("--format"))
        cfg.format = toeplab::harness::format_from_string(f.format);
    if (given("--symbols"))
        cfg.with_symbols = true;
    if (given("--timing"))
        cfg.record_timing = true;
    if (given("--exceed-c"))
        cfg.exceed_c = f.exceed_c;
    if (given("--conf-alpha"))
        cfg.conf_alpha = f.conf_alpha;
    if (given("--symbol-tol"))
        cfg.symbol_tol = f.symbol_tol;
    if (given("--skip-norms"))
        cfg.noniid_norms = false;
    cfg.normalize();
    return cfg;
}

int run_experiment_command(CLI::App const* sub, CommonFlags const& f, toeplab::harness::Experiment experiment)
{
    ExperimentConfig const cfg = build_config(sub, f, experiment);
    auto const result = toeplab::harness::run_experiment(cfg);
    if (cfg.out_path.empty())
    {
        if (cfg.format == toeplab::harness::OutputFormat::csv)
            toeplab::harness::write_records_csv(std::cout, result.records);
        else
            std::cout << toeplab::harness::report_json(result, cfg).dump(2) << '\n';
    }
    else
    {
        for (auto const& path : toeplab::harness::emit_report(result, cfg))
            std::cerr << "wrote " << path.string() << '\n';
    }
    std::cerr << toeplab::harness::to_string(cfg.experiment) << ": " << result.report.dump() .substr(0, 400)
              << (result.report.dump().size() > 400 ? " ..." : "") << '\n';
    if (!result.contract_ok)
    {
        std::cerr << "contract violation: " << result.contract_message << '\n';
        return exit_violation;
    }
    return exit_ok;
}

json norm_json(toeplab::NormEstimate const& e)
{
    return {{"value", e.value},         {"rayleigh_lower", e.rayleigh_lower}, {"upper_cert", e.upper_cert},
            {"iterations", e.iterations}, {"converged", e.converged},         {"residual", e.residual},
            {"start_seed", e.start_seed}};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"toeplab - operator norms of random Toeplitz matrices"};
    app.require_subcommand(1);

    struct Sub {
        char const* name;
        char const* help;
        toeplab::harness::Experiment experiment;
        CommonFlags flags;
        CLI::App* app = nullptr;
    };
    std::vector<Sub> subs{
        {"growth", "norm growth and LLN statistics over an n grid", toeplab::harness::Experiment::growth, {}},
        {"mean-case", "nonzero-mean ensembles: ||T_n||/n versus |m|", toeplab::harness::Experiment::mean_case, {}},
        {"noniid", "running max of ||T_n||/sqrt(n log n) along nested prefixes",
         toeplab::harness::Experiment::noniid_limsup, {}},
        {"concentration", "empirical tails versus the bounded-summand tail bound",
         toeplab::harness::Experiment::concentration, {}},
        {"hankel", "Hankel / row-reversed Toeplitz singular value identity",
         toeplab::harness::Experiment::hankel_check, {}},
        {"sandwich", "audit sup|fejer| <= ||T_n|| <= sup|laurent|", toeplab::harness::Experiment::sandwich_audit, {}},
    };
    for (auto& s : subs)
    {
        s.app = app.add_subcommand(s.name, s.help);
        add_common(s.app, s.flags);
    }

    // norm: single-matrix utility.
    CLI::App* norm_cmd = app.add_subcommand("norm", "operator norm of one symmetric Toeplitz matrix");
    std::string coeffs_text, norm_dist = "rademacher";
    std::size_t norm_n = 64;
    std::uint64_t norm_seed = 1;
    double norm_tol = 1e-10, sym_tol = 1e-6;
    int norm_max_iter = 0;
    bool norm_dense = false, norm_symbols = false;
    norm_cmd->add_option("--coeffs", coeffs_text, "comma-separated x_0,...,x_{n-1}");
    norm_cmd->add_option("--dist", norm_dist, "distribution used when --coeffs is absent");
    norm_cmd->add_option("--n", norm_n, "dimension for a random draw");
    norm_cmd->add_option("--seed", norm_seed, "master seed for a random draw");
    norm_cmd->add_option("--tol", norm_tol, "relative residual tolerance");
    norm_cmd->add_option("--max-iter", norm_max_iter, "Lanczos iteration cap (default 4n)");
    norm_cmd->add_flag("--dense", norm_dense, "also run the dense eigenvalue oracle");
    norm_cmd->add_flag("--symbols", norm_symbols, "also certify the Fejer/Laurent sandwich");
    norm_cmd->add_option("--symbol-tol", sym_tol, "sandwich tolerance");

    // bounds: formula values.
    CLI::App* bounds_cmd = app.add_subcommand("bounds", "evaluate the tail-bound formulas");
    std::string t_text = "1";
    toeplab::BoundParams bp;
    double emax = 1.0, psi = 1.0, Sigma2 = 1.0, sum_psi2 = 1.0;
    bool alpha_power = false;
    bounds_cmd->add_option("--t", t_text, "threshold(s), comma-separated");
    bounds_cmd->add_option("--sigma2", bp.sigma2, "weak variance");
    bounds_cmd->add_option("--M", bp.M, "summand norm bound");
    bounds_cmd->add_option("--EZ", bp.EZ, "expected norm");
    bounds_cmd->add_option("--delta", bp.delta);
    bounds_cmd->add_option("--eta", bp.eta);
    bounds_cmd->add_option("--p", bp.p, "moment order");
    bounds_cmd->add_option("--emax", emax, "E max_i |X_i|^p");
    bounds_cmd->add_option("--alpha", bp.alpha, "Orlicz exponent in (0,1]");
    bounds_cmd->add_option("--psi", psi, "psi_alpha norm of max_i |X_i|");
    bounds_cmd->add_option("--K", bp.free_constants.K);
    bounds_cmd->add_option("--C", bp.free_constants.C);
    bounds_cmd->add_option("--K-alpha", bp.free_constants.K_alpha);
    bounds_cmd->add_option("--Sigma2", Sigma2, "strong variance");
    bounds_cmd->add_option("--sum-psi2", sum_psi2, "sum_i ||X_i||_{psi_2}^2");
    bounds_cmd->add_flag("--alpha-power", alpha_power, "raise t/psi to the power alpha in the psi_alpha bound");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::CallForAllHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        app.exit(e);
        return exit_usage;
    }

    try
    {
        for (auto& s : subs)
            if (s.app->parsed())
                return run_experiment_command(s.app, s.flags, s.experiment);

        if (norm_cmd->parsed())
        {
            toeplab::CoeffSeq x;
            if (!coeffs_text.empty())
                x = toeplab::CoeffSeq(toeplab::harness::detail::parse_numbers(coeffs_text));
            else
            {
                toeplab::EnsembleSpec spec;
                spec.family = toeplab::harness::parse_family(norm_dist);
                spec.master_seed = norm_seed;
                x = toeplab::sample_sequence(spec, norm_n, 0);
            }
            toeplab::SymmetricToeplitz const t(x);
            int const max_iter = norm_max_iter > 0 ? norm_max_iter : static_cast<int>(4 * x.size());
            auto const est = toeplab::operator_norm_iterative(t, norm_tol, max_iter);
            json out{{"n", x.size()}, {"iterative", norm_json(est)}};
            if (norm_dense)
                out["dense"] = norm_json(toeplab::operator_norm_dense(t));
            int code = exit_ok;
            if (norm_symbols)
            {
                auto const sw = toeplab::sandwich(x, sym_tol, norm_tol, max_iter);
                out["sandwich"] = {{"sup_fejer_lo", sw.lower.lo},   {"sup_fejer_hi", sw.lower.hi},
                                   {"sup_laurent_lo", sw.upper.lo}, {"sup_laurent_hi", sw.upper.hi},
                                   {"holds", sw.holds()}};
                if (!sw.holds())
                    code = exit_violation;
            }
            std::cout << out.dump(2) << '\n';
            return code;
        }

        if (bounds_cmd->parsed())
        {
            bp.validate();
            json rows = json::array();
            for (double t : toeplab::harness::detail::parse_numbers(t_text))
            {
                rows.push_back(
                    {{"t", t},
                     {"klein_rio", toeplab::klein_rio_bound(t, bp.sigma2, bp.M, bp.EZ)},
                     {"bounded_tail", toeplab::bounded_tail_bound(t, bp.sigma2, bp.delta, bp.M, bp.free_constants.K)},
                     {"fuk_nagaev",
                      toeplab::fuk_nagaev_bound(t, bp.sigma2, bp.delta, bp.p, emax, bp.free_constants.C)},
                     {"psi_alpha_sum",
                      toeplab::psi_alpha_sum_bound(t, bp.sigma2, bp.delta, bp.alpha, psi, bp.free_constants.C)},
                     {"psi2_toeplitz", toeplab::psi2_toeplitz_bound(t, sum_psi2, bp.free_constants.K)},
                     {"psi_alpha_toeplitz", toeplab::psi_alpha_toeplitz_bound(t, Sigma2, psi, bp.alpha,
                                                                              bp.free_constants.K_alpha, alpha_power)}});
            }
            json out{{"rho", toeplab::hj_truncation_level(bp.p, emax)}, {"bounds", rows}};
            std::cout << out.dump(2) << '\n';
            return exit_ok;
        }
    }
    catch (std::invalid_argument const& e)
    {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    }
    catch (std::length_error const& e)
    {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_violation;
    }
    return exit_usage;
}
