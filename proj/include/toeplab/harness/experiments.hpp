#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "toeplab/concentration.hpp"
#include "toeplab/ensemble.hpp"
#include "toeplab/harness/config.hpp"
#include "toeplab/harness/parallel.hpp"
#include "toeplab/norm.hpp"
#include "toeplab/seed.hpp"
#include "toeplab/symbol.hpp"
#include "toeplab/toeplitz.hpp"

namespace toeplab::harness {

/// Seed of one (n, sample_index) task; a pure function of its inputs.
constexpr std::uint64_t derive_sample_seed(std::uint64_t master_seed, std::uint64_t n, std::uint64_t sample_index)
{
    return mix_seed(master_seed, n, sample_index);
}

/// sqrt(n log n) for n >= 2, NaN otherwise.
inline double sqrt_nlogn(std::size_t n)
{
    if (n < 2)
        return std::numeric_limits<double>::quiet_NaN();
    double const nd = static_cast<double>(n);
    return std::sqrt(nd * std::log(nd));
}

struct RunRecord {
    std::string experiment;
    std::string ensemble;
    std::size_t n = 0;
    std::uint64_t sample_index = 0;
    std::uint64_t seed = 0;
    double norm = 0.0;
    std::optional<double> sup_fejer;    ///< certified lower end of sup|fejer|
    std::optional<double> sup_laurent;  ///< certified upper end of sup|laurent|
    double ratio_sqrt_nlogn = 0.0;
    double elapsed_ms = 0.0;
    bool converged = true;
};

struct SummaryStats {
    std::size_t n = 0;
    std::string statistic;
    std::size_t count = 0;
    std::size_t flagged = 0;
    double mean = 0.0;
    double std = 0.0;
    double cv = 0.0;
    bool cv_defined = true;
    double min = 0.0;
    double max = 0.0;
    double q05 = 0.0;
    double q95 = 0.0;
    double ratio_q05 = 0.0;  ///< quantiles of value / mean
    double ratio_q50 = 0.0;
    double ratio_q95 = 0.0;
    double within_3cv = 0.0;  ///< fraction with value/mean in [1 - 3 cv, 1 + 3 cv]
    double r_n = 0.0;         ///< mean / sqrt(n log n)
};

/// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(std::vector<double> const& sorted, double q)
{
    if (sorted.empty())
        return std::numeric_limits<double>::quiet_NaN();
    double const pos = q * static_cast<double>(sorted.size() - 1);
    auto const lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t const hi = std::min(lo + 1, sorted.size() - 1);
    double const frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline SummaryStats summarize(std::size_t n, std::string statistic, std::vector<double> values, std::size_t flagged)
{
    SummaryStats s;
    s.n = n;
    s.statistic = std::move(statistic);
    s.count = values.size();
    s.flagged = flagged;
    if (values.empty())
    {
        s.cv_defined = false;
        return s;
    }
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values)
        sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values)
        ss += (v - s.mean) * (v - s.mean);
    s.std = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    s.min = values.front();
    s.max = values.back();
    s.q05 = quantile_sorted(values, 0.05);
    s.q95 = quantile_sorted(values, 0.95);
    if (s.mean != 0.0)
    {
        s.cv = s.std / std::abs(s.mean);
        std::vector<double> ratio(values.size());
        std::size_t inside = 0;
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            ratio[i] = values[i] / s.mean;
            inside += ratio[i] >= 1.0 - 3.0 * s.cv && ratio[i] <= 1.0 + 3.0 * s.cv;
        }
        s.ratio_q05 = quantile_sorted(ratio, 0.05);
        s.ratio_q50 = quantile_sorted(ratio, 0.5);
        s.ratio_q95 = quantile_sorted(ratio, 0.95);
        s.within_3cv = static_cast<double>(inside) / static_cast<double>(values.size());
    }
    else
    {
        s.cv = 0.0;
        s.cv_defined = false;
        s.within_3cv = 1.0;
    }
    s.r_n = s.mean / sqrt_nlogn(n);
    return s;
}

inline void to_json(json& j, SummaryStats const& s)
{
    j = json{{"n", s.n},
             {"statistic", s.statistic},
             {"count", s.count},
             {"flagged", s.flagged},
             {"mean", s.mean},
             {"std", s.std},
             {"cv", s.cv},
             {"cv_defined", s.cv_defined},
             {"min", s.min},
             {"max", s.max},
             {"q05", s.q05},
             {"q95", s.q95},
             {"ratio_q05", s.ratio_q05},
             {"ratio_q50", s.ratio_q50},
             {"ratio_q95", s.ratio_q95},
             {"within_3cv", s.within_3cv},
             {"r_n", s.r_n}};
}

struct NamedCurve {
    std::string name;
    TailCurve curve;
};

struct ExperimentResult {
    std::vector<RunRecord> records;
    std::vector<SummaryStats> summaries;
    json report = json::object();
    std::vector<NamedCurve> curves;
    bool contract_ok = true;
    std::string contract_message;
};

namespace detail {

struct Task {
    std::size_t n;
    std::uint64_t sample_index;
};

inline std::vector<Task> grid_tasks(ExperimentConfig const& cfg)
{
    std::vector<Task> tasks;
    for (std::size_t n : cfg.n_grid)
        for (std::uint64_t k = 0; k < cfg.samples_per_n; ++k)
            tasks.push_back({n, k});
    return tasks;
}

/// Ensemble used for one task: the derived seed replaces the master seed and
/// a by_dimension truncation is bound to this task's n.
inline EnsembleSpec task_spec(ExperimentConfig const& cfg, std::uint64_t seed, std::size_t n)
{
    EnsembleSpec spec = cfg.ensemble;
    spec.master_seed = seed;
    if (spec.truncation && spec.truncation->kind == TruncationRule::Kind::by_dimension)
        spec.truncation->dimension = n;
    return spec;
}

class Stopwatch {
public:
    double elapsed_ms() const
    {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline RunRecord base_record(ExperimentConfig const& cfg, Task const& task, std::uint64_t seed)
{
    RunRecord rec;
    rec.experiment = to_string(cfg.experiment);
    rec.ensemble = family_name(cfg.ensemble.family);
    rec.n = task.n;
    rec.sample_index = task.sample_index;
    rec.seed = seed;
    return rec;
}

inline std::vector<double> collect(std::vector<RunRecord> const& records, std::size_t n, std::size_t* flagged)
{
    std::vector<double> out;
    *flagged = 0;
    for (auto const& r : records)
    {
        if (r.n != n)
            continue;
        if (r.converged)
            out.push_back(r.norm);
        else
            ++*flagged;
    }
    return out;
}

inline void require_centered(ExperimentConfig const& cfg, char const* what)
{
    double const mean = family_mean(cfg.ensemble.family);
    double const m2 = family_second_moment(cfg.ensemble.family, 0);
    if (!(mean == 0.0) || !std::isfinite(m2))
        throw std::invalid_argument(std::string(what) + " requires a mean-zero, finite-variance ensemble (got "
                                    + family_to_string(cfg.ensemble.family) + ")");
}

}  // namespace detail

/// Norms of T_n over the n grid; LLN and sqrt(n log n) scaling statistics.
inline ExperimentResult run_growth(ExperimentConfig cfg)
{
    cfg.experiment = Experiment::growth;
    cfg.normalize();
    detail::require_centered(cfg, "growth");
    auto const tasks = detail::grid_tasks(cfg);
    ExperimentResult res;
    res.records.resize(tasks.size());
    parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
        detail::Stopwatch watch;
        auto const& task = tasks[i];
        std::uint64_t const seed = derive_sample_seed(cfg.ensemble.master_seed, task.n, task.sample_index);
        CoeffSeq const x = sample_sequence(detail::task_spec(cfg, seed, task.n), task.n, task.sample_index);
        SymmetricToeplitz const t(x);
        NormEstimate const est = operator_norm_iterative(t, cfg.tol, cfg.max_iter_for(task.n));
        RunRecord rec = detail::base_record(cfg, task, seed);
        rec.norm = est.value;
        rec.converged = est.converged;
        rec.ratio_sqrt_nlogn = est.value / sqrt_nlogn(task.n);
        if (cfg.with_symbols)
        {
            rec.sup_fejer = sup_norm_certified(fejer_symbol(x), cfg.symbol_tol / 4.0).lo;
            rec.sup_laurent = sup_norm_certified(laurent_symbol(x), cfg.symbol_tol / 4.0).hi;
        }
        rec.elapsed_ms = cfg.record_timing ? watch.elapsed_ms() : 0.0;
        res.records[i] = std::move(rec);
    });

    json per_n = json::array();
    bool cv_decreasing = true;
    double prev_cv = std::numeric_limits<double>::infinity();
    std::size_t flagged_total = 0;
    for (std::size_t n : cfg.n_grid)
    {
        std::size_t flagged = 0;
        auto values = detail::collect(res.records, n, &flagged);
        flagged_total += flagged;
        SummaryStats s = summarize(n, "norm", std::move(values), flagged);
        cv_decreasing = cv_decreasing && s.cv < prev_cv;
        prev_cv = s.cv;
        per_n.push_back({{"n", n}, {"mean", s.mean}, {"cv", s.cv}, {"r_n", s.r_n}, {"within_3cv", s.within_3cv}});
        res.summaries.push_back(std::move(s));
    }
    res.report = {{"per_n", per_n}, {"cv_strictly_decreasing", cv_decreasing}, {"flagged", flagged_total}};
    return res;
}

/// Nonzero-mean ensembles: ||T_n|| / n against |m|, plus the centered residual.
inline ExperimentResult run_mean_case(ExperimentConfig cfg)
{
    cfg.experiment = Experiment::mean_case;
    cfg.normalize();
    double const m = family_mean(cfg.ensemble.family);
    if (!std::isfinite(m))
        throw std::invalid_argument("mean-case requires an ensemble with a finite mean");
    auto const tasks = detail::grid_tasks(cfg);
    ExperimentResult res;
    res.records.resize(tasks.size());
    std::vector<double> residual(tasks.size(), 0.0);
    std::vector<char> residual_ok(tasks.size(), 1);
    parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
        detail::Stopwatch watch;
        auto const& task = tasks[i];
        std::uint64_t const seed = derive_sample_seed(cfg.ensemble.master_seed, task.n, task.sample_index);
        CoeffSeq const x = sample_sequence(detail::task_spec(cfg, seed, task.n), task.n, task.sample_index);
        NormEstimate const est = operator_norm_iterative(SymmetricToeplitz(x), cfg.tol, cfg.max_iter_for(task.n));
        std::vector<double> centered(x.entries().begin(), x.entries().end());
        for (double& v : centered)
            v -= m;
        NormEstimate const cen
            = operator_norm_iterative(SymmetricToeplitz(CoeffSeq(std::move(centered))), cfg.tol,
                                      cfg.max_iter_for(task.n));
        RunRecord rec = detail::base_record(cfg, task, seed);
        rec.norm = est.value;
        rec.converged = est.converged;
        rec.ratio_sqrt_nlogn = est.value / sqrt_nlogn(task.n);
        rec.elapsed_ms = cfg.record_timing ? watch.elapsed_ms() : 0.0;
        residual[i] = cen.value / sqrt_nlogn(task.n);
        residual_ok[i] = cen.converged;
        res.records[i] = std::move(rec);
    });

    json per_n = json::array();
    for (std::size_t n : cfg.n_grid)
    {
        std::vector<double> scaled, resid;
        std::size_t flagged = 0;
        for (std::size_t i = 0; i < tasks.size(); ++i)
        {
            if (tasks[i].n != n)
                continue;
            if (!res.records[i].converged || !residual_ok[i])
            {
                ++flagged;
                continue;
            }
            scaled.push_back(res.records[i].norm / static_cast<double>(n));
            resid.push_back(residual[i]);
        }
        SummaryStats s = summarize(n, "norm_over_n", std::move(scaled), flagged);
        SummaryStats r = summarize(n, "centered_residual_over_sqrt_nlogn", std::move(resid), flagged);
        per_n.push_back({{"n", n},
                         {"abs_mean_param", std::abs(m)},
                         {"mean_norm_over_n", s.mean},
                         {"deviation_from_abs_m", s.mean - std::abs(m)},
                         {"std_norm_over_n", s.std},
                         {"mean_centered_residual", r.mean}});
        res.summaries.push_back(std::move(s));
        res.summaries.push_back(std::move(r));
    }
    res.report = {{"mean_param", m}, {"per_n", per_n}};
    return res;
}

/// Running max of ||T_n|| / sqrt(n log n) along nested prefixes, and the
/// count of entries with |x_{n-1}| > c sqrt(n log n).
///
/// ||T_n|| >= |x_{n-1}|, so every entry contributes a certified lower bound
/// to the running max; exact norms are added at the grid points.
inline ExperimentResult run_noniid_limsup(ExperimentConfig cfg)
{
    cfg.experiment = Experiment::noniid_limsup;
    cfg.normalize();
    std::size_t const n_max = cfg.n_grid.back();
    std::size_t const seeds = cfg.samples_per_n;
    std::size_t const points = cfg.n_grid.size();
    ExperimentResult res;
    res.records.resize(seeds * points);
    std::vector<std::vector<double>> running(seeds, std::vector<double>(points, 0.0));
    std::vector<std::vector<double>> exceed(seeds, std::vector<double>(points, 0.0));

    parallel_for(seeds, cfg.workers, [&](std::size_t k) {
        std::uint64_t const seed = derive_sample_seed(cfg.ensemble.master_seed, 0, k);
        CoeffSeq const x = sample_sequence(detail::task_spec(cfg, seed, n_max), n_max, k);
        double run_max = 0.0;
        std::size_t count = 0;
        std::size_t n = 2;
        for (std::size_t p = 0; p < points; ++p)
        {
            std::size_t const big_n = cfg.n_grid[p];
            for (; n <= big_n; ++n)
            {
                double const scale = sqrt_nlogn(n);
                double const entry = std::abs(x[n - 1]);
                run_max = std::max(run_max, entry / scale);
                count += entry > cfg.exceed_c * scale;
            }
            detail::Stopwatch watch;
            RunRecord rec = detail::base_record(cfg, {big_n, k}, seed);
            if (cfg.noniid_norms)
            {
                NormEstimate const est = operator_norm_iterative(SymmetricToeplitz(x.prefix(big_n)), cfg.tol,
                                                                 cfg.max_iter_for(big_n));
                rec.norm = est.value;
                rec.converged = est.converged;
                rec.ratio_sqrt_nlogn = est.value / sqrt_nlogn(big_n);
                if (est.converged && big_n >= 2)
                    run_max = std::max(run_max, rec.ratio_sqrt_nlogn);
            }
            else
            {
                rec.norm = std::numeric_limits<double>::quiet_NaN();
                rec.ratio_sqrt_nlogn = std::numeric_limits<double>::quiet_NaN();
                rec.converged = false;
            }
            rec.elapsed_ms = cfg.record_timing ? watch.elapsed_ms() : 0.0;
            running[k][p] = run_max;
            exceed[k][p] = static_cast<double>(count);
            res.records[k * points + p] = std::move(rec);
        }
    });

    // Expected exceedance count by direct summation of P(|X_{n-1}| > c sqrt(n log n)).
    bool const oracle_available = !cfg.ensemble.truncation.has_value();
    std::vector<double> oracle(points, 0.0);
    if (oracle_available)
    {
        double acc = 0.0;
        std::size_t n = 2;
        for (std::size_t p = 0; p < points; ++p)
        {
            for (; n <= cfg.n_grid[p]; ++n)
                acc += family_tail_probability(cfg.ensemble.family, n - 1, cfg.exceed_c * sqrt_nlogn(n));
            oracle[p] = acc;
        }
    }

    json per_n = json::array();
    for (std::size_t p = 0; p < points; ++p)
    {
        std::vector<double> rm(seeds), ex(seeds);
        for (std::size_t k = 0; k < seeds; ++k)
        {
            rm[k] = running[k][p];
            ex[k] = exceed[k][p];
        }
        SummaryStats s = summarize(cfg.n_grid[p], "running_max_ratio", rm, 0);
        double ex_mean = 0.0;
        for (double e : ex)
            ex_mean += e;
        ex_mean /= static_cast<double>(seeds);
        json row = {{"N", cfg.n_grid[p]},
                    {"running_max_mean", s.mean},
                    {"running_max_q05", s.q05},
                    {"running_max_q95", s.q95},
                    {"exceedance_mean", ex_mean}};
        row["exceedance_expected"] = oracle_available ? json(oracle[p]) : json(nullptr);
        per_n.push_back(std::move(row));
        res.summaries.push_back(std::move(s));
    }
    json traj = json::array();
    for (std::size_t k = 0; k < seeds; ++k)
        traj.push_back(running[k]);
    res.report = {{"per_N", per_n}, {"trajectories", traj}, {"exceed_c", cfg.exceed_c}};
    return res;
}

/// Empirical upper and lower tails of ||T_n|| around its mean against the
/// bounded-summand tail bound with sigma^2 = Sigma^2, M = 2 sup|X|, EZ = mean.
inline ExperimentResult run_concentration(ExperimentConfig cfg)
{
    cfg.experiment = Experiment::concentration;
    cfg.normalize();
    double const bound = family_bound(cfg.ensemble.family);
    if (!std::isfinite(bound))
        throw std::invalid_argument("concentration: the bounded-summand comparison needs a bounded ensemble (got "
                                    + family_to_string(cfg.ensemble.family) + ")");
    if (!(family_mean(cfg.ensemble.family) == 0.0))
        throw std::invalid_argument("concentration: ensemble must be centered");
    auto const tasks = detail::grid_tasks(cfg);
    ExperimentResult res;
    res.records.resize(tasks.size());
    std::vector<double> max_entry(tasks.size(), 0.0);
    parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
        detail::Stopwatch watch;
        auto const& task = tasks[i];
        std::uint64_t const seed = derive_sample_seed(cfg.ensemble.master_seed, task.n, task.sample_index);
        CoeffSeq const x = sample_sequence(detail::task_spec(cfg, seed, task.n), task.n, task.sample_index);
        NormEstimate const est = operator_norm_iterative(SymmetricToeplitz(x), cfg.tol, cfg.max_iter_for(task.n));
        RunRecord rec = detail::base_record(cfg, task, seed);
        rec.norm = est.value;
        rec.converged = est.converged;
        rec.ratio_sqrt_nlogn = est.value / sqrt_nlogn(task.n);
        rec.elapsed_ms = cfg.record_timing ? watch.elapsed_ms() : 0.0;
        double mx = 0.0;
        for (double v : x.entries())
            mx = std::max(mx, std::abs(v));
        max_entry[i] = mx;
        res.records[i] = std::move(rec);
    });

    // psi_2 norm of a single entry, from a dedicated draw.
    EnsembleSpec entry_spec = cfg.ensemble;
    entry_spec.master_seed = derive_sample_seed(cfg.ensemble.master_seed, 0, ~std::uint64_t{0});
    CoeffSeq const pool = sample_sequence(entry_spec, 4096, 0);
    double const psi2_entry = orlicz_norm_empirical(pool.entries(), 2.0);

    json per_n = json::array();
    bool all_ok = true;
    for (std::size_t n : cfg.n_grid)
    {
        std::size_t flagged = 0;
        std::vector<double> z = detail::collect(res.records, n, &flagged);
        std::vector<double> maxima;
        for (std::size_t i = 0; i < tasks.size(); ++i)
            if (tasks[i].n == n)
                maxima.push_back(max_entry[i]);
        SummaryStats s = summarize(n, "norm", z, flagged);
        if (z.empty())
        {
            res.summaries.push_back(std::move(s));
            continue;
        }
        double const span = s.std > 0.0 ? 4.0 * s.std : 1.0;
        std::vector<double> grid(cfg.tail_points);
        for (std::size_t g = 0; g < grid.size(); ++g)
            grid[g] = span * static_cast<double>(g) / static_cast<double>(grid.size() - 1);

        std::vector<double> moments(n);
        for (std::size_t i = 0; i < n; ++i)
            moments[i] = family_second_moment(cfg.ensemble.family, i);
        double const sigma2 = sigma2_strong(moments, n).value;
        double const m_cap = 2.0 * bound;
        double const ez = s.mean;
        auto kr = [&](double t) { return klein_rio_bound(t, sigma2, m_cap, ez); };

        TailCurve upper = empirical_tail(z, s.mean, grid, cfg.conf_alpha);
        upper.set_bound(kr);
        std::vector<double> neg(z.size());
        for (std::size_t i = 0; i < z.size(); ++i)
            neg[i] = -z[i];
        TailCurve lower = empirical_tail(neg, -s.mean, grid, cfg.conf_alpha);
        lower.set_bound(kr);
        DominationReport const du = check_bound_dominates(upper);
        DominationReport const dl = check_bound_dominates(lower);
        all_ok = all_ok && du.confident_violations == 0 && dl.confident_violations == 0;

        // Two-sided deviations, for calibrating the free constants of the
        // sub-Gaussian and psi_alpha Toeplitz bounds.
        std::vector<double> dev(z.size());
        for (std::size_t i = 0; i < z.size(); ++i)
            dev[i] = std::abs(z[i] - s.mean);
        TailCurve two_sided = empirical_tail(dev, 0.0, grid, cfg.conf_alpha);
        double const sum_psi2 = static_cast<double>(n) * psi2_entry * psi2_entry;
        double const psi1_max = orlicz_norm_empirical(maxima, 1.0);
        std::vector<TailCurve> fit_curves{two_sided};
        ConstantFit const k_fit = fit_min_constant(fit_curves, psi2_toeplitz_family(sum_psi2), 1e-3, 1e3);
        ConstantFit const ka_fit
            = fit_min_constant(fit_curves, psi_alpha_toeplitz_family(sigma2, psi1_max, 1.0), 1e-3, 1e3);

        auto dom_json = [](DominationReport const& d) {
            return json{{"violations", d.violations},
                        {"confident_violations", d.confident_violations},
                        {"envelope_violations", d.envelope_violations},
                        {"worst_gap", d.worst_gap},
                        {"worst_envelope_gap", d.worst_envelope_gap}};
        };
        per_n.push_back({{"n", n},
                         {"mean", s.mean},
                         {"std", s.std},
                         {"Sigma2", sigma2},
                         {"M", m_cap},
                         {"upper_tail", dom_json(du)},
                         {"lower_tail", dom_json(dl)},
                         {"psi2_entry", psi2_entry},
                         {"fit_K_psi2", k_fit.value},
                         {"fit_K_psi2_feasible", k_fit.feasible},
                         {"fit_K_alpha", ka_fit.value},
                         {"fit_K_alpha_feasible", ka_fit.feasible}});
        res.curves.push_back({"n" + std::to_string(n) + "_upper_tail", std::move(upper)});
        res.curves.push_back({"n" + std::to_string(n) + "_lower_tail", std::move(lower)});
        res.summaries.push_back(std::move(s));
    }
    res.contract_ok = all_ok;
    if (!all_ok)
        res.contract_message = "tail bound violated with statistical confidence";
    res.report = {{"per_n", per_n}, {"conf_alpha", cfg.conf_alpha}};
    return res;
}

/// Singular values of H_n versus its row-reversed Toeplitz matrix.
inline ExperimentResult run_hankel_check(ExperimentConfig cfg)
{
    cfg.experiment = Experiment::hankel_check;
    cfg.normalize();
    if (cfg.n_grid.back() > cfg.dense_cap)
        throw std::length_error("hankel: n exceeds dense cap " + std::to_string(cfg.dense_cap));
    auto const tasks = detail::grid_tasks(cfg);
    ExperimentResult res;
    res.records.resize(tasks.size());
    std::vector<double> rel_gap(tasks.size(), 0.0);
    parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
        detail::Stopwatch watch;
        auto const& task = tasks[i];
        std::uint64_t const seed = derive_sample_seed(cfg.ensemble.master_seed, task.n, task.sample_index);
        CoeffSeq const y = sample_sequence(detail::task_spec(cfg, seed, task.n), 2 * task.n - 1, task.sample_index);
        HankelSeq const h(std::vector<double>(y.entries().begin(), y.entries().end()), task.n);
        HankelCheckReport const rep = hankel_toeplitz_singular_check(h, cfg.dense_cap);
        RunRecord rec = detail::base_record(cfg, task, seed);
        rec.norm = rep.scale;
        rec.ratio_sqrt_nlogn = rep.scale / sqrt_nlogn(task.n);
        rec.elapsed_ms = cfg.record_timing ? watch.elapsed_ms() : 0.0;
        rel_gap[i] = rep.scale > 0.0 ? rep.max_abs_gap / rep.scale : rep.max_abs_gap;
        res.records[i] = std::move(rec);
    });
    double worst = 0.0;
    json per_n = json::array();
    for (std::size_t n : cfg.n_grid)
    {
        double w = 0.0;
        std::vector<double> scales;
        for (std::size_t i = 0; i < tasks.size(); ++i)
            if (tasks[i].n == n)
            {
                w = std::max(w, rel_gap[i]);
                scales.push_back(res.records[i].norm);
            }
        worst = std::max(worst, w);
        per_n.push_back({{"n", n}, {"max_relative_gap", w}});
        res.summaries.push_back(summarize(n, "hankel_norm", std::move(scales), 0));
    }
    res.contract_ok = worst <= 1e-9;
    if (!res.contract_ok)
        res.contract_message = "Hankel/Toeplitz singular values differ by more than 1e-9 * scale";
    res.report = {{"per_n", per_n}, {"max_relative_gap", worst}};
    return res;
}

/// sup|fejer| <= ||T_n|| <= sup|laurent| on every sample.
inline ExperimentResult run_sandwich_audit(ExperimentConfig cfg)
{
    cfg.experiment = Experiment::sandwich_audit;
    cfg.normalize();
    auto const tasks = detail::grid_tasks(cfg);
    ExperimentResult res;
    res.records.resize(tasks.size());
    std::vector<char> violated(tasks.size(), 0);
    parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
        detail::Stopwatch watch;
        auto const& task = tasks[i];
        std::uint64_t const seed = derive_sample_seed(cfg.ensemble.master_seed, task.n, task.sample_index);
        CoeffSeq const x = sample_sequence(detail::task_spec(cfg, seed, task.n), task.n, task.sample_index);
        RunRecord rec = detail::base_record(cfg, task, seed);
        try
        {
            SandwichReport const sw = sandwich(x, cfg.symbol_tol, cfg.tol, cfg.max_iter_for(task.n));
            rec.norm = sw.norm.value;
            rec.sup_fejer = sw.lower.lo;
            rec.sup_laurent = sw.upper.hi;
            violated[i] = !sw.holds();
        }
        catch (std::runtime_error const&)
        {
            rec.converged = false;
        }
        rec.ratio_sqrt_nlogn = rec.norm / sqrt_nlogn(task.n);
        rec.elapsed_ms = cfg.record_timing ? watch.elapsed_ms() : 0.0;
        res.records[i] = std::move(rec);
    });

    std::size_t violations = 0, flagged_total = 0;
    json per_n = json::array();
    for (std::size_t n : cfg.n_grid)
    {
        std::vector<double> upper_slack, lower_slack, norms;
        std::size_t v = 0, flagged = 0;
        for (std::size_t i = 0; i < tasks.size(); ++i)
        {
            if (tasks[i].n != n)
                continue;
            RunRecord const& r = res.records[i];
            if (!r.converged)
            {
                ++flagged;
                continue;
            }
            v += violated[i];
            norms.push_back(r.norm);
            if (r.norm > 0.0)
                upper_slack.push_back(*r.sup_laurent / r.norm);
            if (*r.sup_fejer > 0.0)
                lower_slack.push_back(r.norm / *r.sup_fejer);
        }
        violations += v;
        flagged_total += flagged;
        std::sort(upper_slack.begin(), upper_slack.end());
        std::sort(lower_slack.begin(), lower_slack.end());
        per_n.push_back({{"n", n},
                         {"violations", v},
                         {"flagged", flagged},
                         {"upper_slack_q05", quantile_sorted(upper_slack, 0.05)},
                         {"upper_slack_q50", quantile_sorted(upper_slack, 0.5)},
                         {"upper_slack_q95", quantile_sorted(upper_slack, 0.95)},
                         {"lower_slack_q05", quantile_sorted(lower_slack, 0.05)},
                         {"lower_slack_q50", quantile_sorted(lower_slack, 0.5)},
                         {"lower_slack_q95", quantile_sorted(lower_slack, 0.95)}});
        res.summaries.push_back(summarize(n, "norm", std::move(norms), flagged));
    }
    res.contract_ok = violations == 0;
    if (!res.contract_ok)
        res.contract_message = std::to_string(violations) + " sandwich violation(s)";
    res.report = {{"per_n", per_n}, {"violations", violations}, {"flagged", flagged_total}};
    return res;
}

inline ExperimentResult run_experiment(ExperimentConfig const& cfg)
{
    switch (cfg.experiment)
    {
    case Experiment::growth: return run_growth(cfg);
    case Experiment::mean_case: return run_mean_case(cfg);
    case Experiment::noniid_limsup: return run_noniid_limsup(cfg);
    case Experiment::concentration: return run_concentration(cfg);
    case Experiment::hankel_check: return run_hankel_check(cfg);
    case Experiment::sandwich_audit: return run_sandwich_audit(cfg);
    }
    throw std::invalid_argument("unknown experiment");
}

}  // namespace toeplab::harness
