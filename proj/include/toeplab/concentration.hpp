#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "toeplab/format.hpp"
#include "toeplab/norm.hpp"
#include "toeplab/toeplitz.hpp"

namespace toeplab {

/// Parameters shared by the tail-bound evaluators. Absolute constants
/// that are only known to exist (K, C, K_alpha) are caller inputs.
struct BoundParams {
    double sigma2 = 0.0;  ///< weak variance
    double M = 0.0;       ///< a.s. bound on summand norms
    double EZ = 0.0;      ///< expected norm
    double delta = 1.0;
    double eta = 1.0;
    double p = 2.0;
    double alpha = 1.0;
    struct FreeConstants {
        double K = 1.0;
        double C = 1.0;
        double K_alpha = 1.0;
    } free_constants;

    void validate() const
    {
        if (sigma2 < 0.0 || M < 0.0 || EZ < 0.0)
            throw std::invalid_argument("BoundParams: sigma2, M and EZ must be nonnegative");
        if (!(delta > 0.0))
            throw std::invalid_argument("BoundParams: delta must be positive");
        if (!(eta > 0.0 && eta <= 1.0))
            throw std::invalid_argument("BoundParams: eta must lie in (0, 1]");
        if (!(p >= 1.0))
            throw std::invalid_argument("BoundParams: p must be >= 1");
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw std::invalid_argument("BoundParams: alpha must lie in (0, 1]");
        if (!(free_constants.K > 0.0 && free_constants.C > 0.0 && free_constants.K_alpha > 0.0))
            throw std::invalid_argument("BoundParams: free constants must be positive");
    }
};

namespace detail {

inline double capped(double v) { return std::clamp(v, 0.0, 1.0); }

/// exp(-t^2 / (2 (1 + delta) sigma2)), with a zero variance contributing 0 for t > 0.
inline double gaussian_term(double t, double sigma2, double delta)
{
    if (sigma2 <= 0.0)
        return 0.0;
    return std::exp(-t * t / (2.0 * (1.0 + delta) * sigma2));
}

}  // namespace detail

/// exp[-t^2 / (2(sigma^2 + 2 M EZ) + 3 M t)], for either tail of a bounded
/// empirical process sup.
inline double klein_rio_bound(double t, double sigma2, double M, double EZ)
{
    if (t < 0.0 || sigma2 < 0.0 || M < 0.0 || EZ < 0.0)
        throw std::invalid_argument("klein_rio_bound: arguments must be nonnegative");
    if (t == 0.0)
        return 1.0;
    double const denom = 2.0 * (sigma2 + 2.0 * M * EZ) + 3.0 * M * t;
    if (denom <= 0.0)
        return 0.0;
    return detail::capped(std::exp(-t * t / denom));
}

/// Gaussian term plus exp(-t / (K M)) for summands bounded by M.
inline double bounded_tail_bound(double t, double sigma2, double delta, double M, double K)
{
    if (t < 0.0 || !(delta > 0.0) || !(K > 0.0))
        throw std::invalid_argument("bounded_tail_bound: need t >= 0, delta > 0, K > 0");
    if (t == 0.0)
        return 1.0;
    double const jump = M > 0.0 ? std::exp(-t / (K * M)) : 0.0;
    return detail::capped(detail::gaussian_term(t, sigma2, delta) + jump);
}

/// Gaussian term plus C E max_i ||X_i||^p / t^p.
inline double fuk_nagaev_bound(double t, double sigma2, double delta, double p, double emax_p, double C)
{
    if (t < 0.0 || !(p >= 1.0) || !(C > 0.0) || emax_p < 0.0 || !(delta > 0.0))
        throw std::invalid_argument("fuk_nagaev_bound: invalid arguments");
    if (t == 0.0)
        return 1.0;
    return detail::capped(detail::gaussian_term(t, sigma2, delta) + C * emax_p / std::pow(t, p));
}

/// Gaussian term plus 3 exp(-(t / (C psi_max))^alpha).
inline double psi_alpha_sum_bound(double t, double sigma2, double delta, double alpha, double psi_max, double C)
{
    if (t < 0.0 || !(alpha > 0.0 && alpha <= 1.0) || !(C > 0.0) || psi_max < 0.0 || !(delta > 0.0))
        throw std::invalid_argument("psi_alpha_sum_bound: invalid arguments");
    if (t == 0.0)
        return 1.0;
    double const tail = psi_max > 0.0 ? 3.0 * std::exp(-std::pow(t / (C * psi_max), alpha)) : 0.0;
    return detail::capped(detail::gaussian_term(t, sigma2, delta) + tail);
}

/// K exp(-t^2 / (K sum_i ||X_i||_{psi_2}^2)).
inline double psi2_toeplitz_bound(double t, double sum_psi2_sq, double K)
{
    if (t < 0.0 || sum_psi2_sq < 0.0 || !(K > 0.0))
        throw std::invalid_argument("psi2_toeplitz_bound: invalid arguments");
    if (t == 0.0)
        return std::min(1.0, K);
    if (sum_psi2_sq == 0.0)
        return 0.0;
    return detail::capped(K * std::exp(-t * t / (K * sum_psi2_sq)));
}

/// 2 exp(-(1/K_alpha) min(t^2 / Sigma^2, r)) with r = t/psi, or (t/psi)^alpha
/// when `apply_alpha_power` is set.
inline double psi_alpha_toeplitz_bound(double t, double Sigma2, double psi_max_norm, double alpha, double K_alpha,
                                       bool apply_alpha_power = false)
{
    if (t < 0.0 || Sigma2 < 0.0 || psi_max_norm < 0.0 || !(alpha > 0.0) || !(K_alpha > 0.0))
        throw std::invalid_argument("psi_alpha_toeplitz_bound: invalid arguments");
    if (t == 0.0)
        return 1.0;
    double const inf = std::numeric_limits<double>::infinity();
    double const quad = Sigma2 > 0.0 ? t * t / Sigma2 : inf;
    double lin = inf;
    if (psi_max_norm > 0.0)
        lin = apply_alpha_power ? std::pow(t / psi_max_norm, alpha) : t / psi_max_norm;
    double const arg = std::min(quad, lin);
    if (std::isinf(arg))
        return 0.0;
    return detail::capped(2.0 * std::exp(-arg / K_alpha));
}

/// rho = (2 4^p E max_i ||X_i||^p)^{1/p}: the truncation level for which
/// P(max_i ||X_i|| > rho) <= 1/(2 4^p) by Markov.
inline double hj_truncation_level(double p, double emax_p)
{
    if (!(p >= 1.0) || emax_p < 0.0)
        throw std::invalid_argument("hj_truncation_level: need p >= 1 and emax_p >= 0");
    return std::pow(2.0 * std::pow(4.0, p) * emax_p, 1.0 / p);
}

struct StrongVariance {
    double value = 0.0;  ///< sum_i ||A_i||^2 E X_i^2
    double cap = 0.0;    ///< 4 sum_i E X_i^2
};

inline StrongVariance sigma2_strong(std::span<const double> second_moments, std::size_t n)
{
    if (second_moments.size() != n || n == 0)
        throw std::invalid_argument("sigma2_strong: need exactly n >= 1 second moments");
    StrongVariance out;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (second_moments[i] < 0.0)
            throw std::invalid_argument("sigma2_strong: negative second moment");
        double const a = a_basis_norm(n, i);
        out.value += a * a * second_moments[i];
        out.cap += 4.0 * second_moments[i];
    }
    return out;
}

struct WeakVariance {
    double lower = 0.0;      ///< objective at gamma = 1/sqrt(n)
    double upper = 0.0;      ///< strong variance
    double heuristic = 0.0;  ///< best objective found by alternating maximization
    std::vector<double> gamma;
};

/// Bracket for sigma^2 = sup_{||gamma||_2 <= 1} ||[gamma_{|i-j|} s_{|i-j|}]||^2
/// with s_k = sqrt(E X_k^2).
///
/// Each step takes the top singular pair (u, v) of the current matrix and
/// sets gamma_k proportional to s_k sum_{|i-j|=k} u_i v_j, which never
/// decreases the objective.
inline WeakVariance sigma2_weak(std::span<const double> second_moments, std::size_t n, int iters = 20)
{
    if (second_moments.size() != n || n == 0)
        throw std::invalid_argument("sigma2_weak: need exactly n >= 1 second moments");
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        if (second_moments[k] < 0.0)
            throw std::invalid_argument("sigma2_weak: negative second moment");
        s[k] = std::sqrt(second_moments[k]);
    }
    WeakVariance out;
    out.upper = sigma2_strong(second_moments, n).value;
    if (n == 1)
    {
        out.lower = out.heuristic = out.upper = second_moments[0];
        out.gamma = {1.0};
        return out;
    }

    std::vector<double> gamma(n, 1.0 / std::sqrt(static_cast<double>(n)));
    auto objective = [&](std::vector<double> const& g, std::vector<double>* top) {
        std::vector<double> c(n);
        for (std::size_t k = 0; k < n; ++k)
            c[k] = g[k] * s[k];
        SymmetricToeplitz const t{CoeffSeq(std::move(c))};
        EigenPair pair = dominant_eigenpair(t, 1e-12, static_cast<int>(4 * n));
        if (top)
            *top = std::move(pair.vector);
        return pair.estimate.value * pair.estimate.value;
    };

    std::vector<double> w;
    out.lower = objective(gamma, &w);
    out.heuristic = out.lower;
    out.gamma = gamma;
    for (int it = 0; it < iters; ++it)
    {
        // For a symmetric matrix the top singular pair is (sign(lambda) w, w);
        // the sign drops out after squaring.
        std::vector<double> next(n, 0.0);
        double norm2 = 0.0;
        for (std::size_t k = 0; k < n; ++k)
        {
            double corr = 0.0;
            for (std::size_t i = 0; i + k < n; ++i)
                corr += w[i] * w[i + k];
            if (k > 0)
                corr *= 2.0;
            next[k] = s[k] * corr;
            norm2 += next[k] * next[k];
        }
        if (!(norm2 > 0.0))
            break;
        double const inv = 1.0 / std::sqrt(norm2);
        for (double& g : next)
            g *= inv;
        double const value = objective(next, &w);
        if (value > out.heuristic)
        {
            out.heuristic = value;
            out.gamma = next;
        }
        gamma = std::move(next);
    }
    out.heuristic = std::clamp(out.heuristic, out.lower, std::max(out.lower, out.upper));
    return out;
}

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 1.0;
};

/// Exact two-sided Clopper-Pearson interval for k successes in n trials at
/// level 1 - alpha.
inline ConfidenceInterval clopper_pearson(std::size_t k, std::size_t n, double alpha)
{
    if (n == 0 || k > n)
        throw std::invalid_argument("clopper_pearson: need 0 <= k <= n, n >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("clopper_pearson: alpha must lie in (0, 1)");
    double const kd = static_cast<double>(k), nd = static_cast<double>(n);
    ConfidenceInterval ci;
    ci.lower = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, alpha / 2.0);
    ci.upper = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - alpha / 2.0);
    return ci;
}

/// Empirical survival of (sample - center) on a threshold grid, with its
/// pointwise confidence envelope and the theoretical bound on the same grid.
struct TailCurve {
    std::vector<double> thresholds;
    std::vector<double> empirical_survival;
    std::vector<double> lower_confidence;
    std::vector<double> upper_confidence;
    std::vector<double> bound_values;
    std::size_t n_samples = 0;
    double conf_alpha = 0.01;

    /// Evaluate `bound` on every threshold.
    template <class F>
    void set_bound(F&& bound)
    {
        bound_values.resize(thresholds.size());
        for (std::size_t i = 0; i < thresholds.size(); ++i)
            bound_values[i] = bound(thresholds[i]);
    }
};

inline TailCurve empirical_tail(std::span<const double> samples, double center, std::span<const double> thresholds,
                                double conf_alpha = 0.01)
{
    if (samples.empty())
        throw std::invalid_argument("empirical_tail: samples must be non-empty");
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (!(thresholds[i] > thresholds[i - 1]))
            throw std::invalid_argument("empirical_tail: thresholds must be strictly increasing");

    std::vector<double> dev(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        dev[i] = samples[i] - center;
    std::sort(dev.begin(), dev.end());

    TailCurve curve;
    curve.n_samples = samples.size();
    curve.conf_alpha = conf_alpha;
    curve.thresholds.assign(thresholds.begin(), thresholds.end());
    for (double t : thresholds)
    {
        auto first = std::lower_bound(dev.begin(), dev.end(), t);
        auto const k = static_cast<std::size_t>(dev.end() - first);
        auto const ci = clopper_pearson(k, dev.size(), conf_alpha);
        curve.empirical_survival.push_back(static_cast<double>(k) / static_cast<double>(dev.size()));
        curve.lower_confidence.push_back(ci.lower);
        curve.upper_confidence.push_back(ci.upper);
    }
    curve.bound_values.assign(thresholds.size(), 1.0);
    return curve;
}

struct DominationReport {
    std::size_t violations = 0;            ///< survival > bound
    std::size_t confident_violations = 0;  ///< lower confidence > bound
    std::size_t envelope_violations = 0;   ///< upper confidence > bound
    double worst_gap = -std::numeric_limits<double>::infinity();  ///< max(survival - bound)
    double worst_envelope_gap = -std::numeric_limits<double>::infinity();
};

inline DominationReport check_bound_dominates(TailCurve const& curve)
{
    if (curve.bound_values.size() != curve.thresholds.size())
        throw std::invalid_argument("check_bound_dominates: bound values not populated");
    DominationReport rep;
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
    {
        double const b = curve.bound_values[i];
        rep.violations += curve.empirical_survival[i] > b;
        rep.confident_violations += curve.lower_confidence[i] > b;
        rep.envelope_violations += curve.upper_confidence[i] > b;
        rep.worst_gap = std::max(rep.worst_gap, curve.empirical_survival[i] - b);
        rep.worst_envelope_gap = std::max(rep.worst_envelope_gap, curve.upper_confidence[i] - b);
    }
    return rep;
}

/// A tail-bound shape with one free constant; eval(t, constant) must be
/// nondecreasing in the constant.
struct BoundFamily {
    std::string name;
    std::function<double(double t, double constant)> eval;
};

inline BoundFamily bounded_tail_family(double sigma2, double delta, double M)
{
    return {"bounded_tail", [=](double t, double K) { return bounded_tail_bound(t, sigma2, delta, M, K); }};
}

inline BoundFamily fuk_nagaev_family(double sigma2, double delta, double p, double emax_p)
{
    return {"fuk_nagaev", [=](double t, double C) { return fuk_nagaev_bound(t, sigma2, delta, p, emax_p, C); }};
}

inline BoundFamily psi_alpha_sum_family(double sigma2, double delta, double alpha, double psi_max)
{
    return {"psi_alpha_sum",
            [=](double t, double C) { return psi_alpha_sum_bound(t, sigma2, delta, alpha, psi_max, C); }};
}

inline BoundFamily psi2_toeplitz_family(double sum_psi2_sq)
{
    return {"psi2_toeplitz", [=](double t, double K) { return psi2_toeplitz_bound(t, sum_psi2_sq, K); }};
}

inline BoundFamily psi_alpha_toeplitz_family(double Sigma2, double psi_max_norm, double alpha,
                                             bool apply_alpha_power = false)
{
    return {"psi_alpha_toeplitz", [=](double t, double K) {
                return psi_alpha_toeplitz_bound(t, Sigma2, psi_max_norm, alpha, K, apply_alpha_power);
            }};
}

struct ConstantFit {
    double value = 0.0;
    bool feasible = false;  ///< false: no constant in range dominates; value is the range max
};

/// Smallest constant in [range_lo, range_hi] (bisection, relative precision
/// 1e-3) for which the bound dominates the upper-confidence envelope of
/// every curve.
inline ConstantFit fit_min_constant(std::span<const TailCurve> curves, BoundFamily const& family, double range_lo,
                                    double range_hi)
{
    if (curves.empty())
        throw std::invalid_argument("fit_min_constant: no curves");
    if (!(range_lo > 0.0 && range_hi >= range_lo))
        throw std::invalid_argument("fit_min_constant: invalid search range");
    auto dominates = [&](double c) {
        for (TailCurve const& curve : curves)
            for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
                if (curve.upper_confidence[i] > family.eval(curve.thresholds[i], c))
                    return false;
        return true;
    };
    if (dominates(range_lo))
        return {range_lo, true};
    if (!dominates(range_hi))
        return {range_hi, false};
    double lo = range_lo, hi = range_hi;
    while (hi - lo > 1e-3 * hi)
    {
        double const mid = 0.5 * (lo + hi);
        if (dominates(mid))
            hi = mid;
        else
            lo = mid;
    }
    return {hi, true};
}

/// CSV with columns t, survival, upper_conf, bound.
inline void write_tail_csv(std::ostream& os, TailCurve const& curve)
{
    os << "t,survival,upper_conf,bound\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
        os << format_double(curve.thresholds[i]) << ',' << format_double(curve.empirical_survival[i]) << ','
           << format_double(curve.upper_confidence[i]) << ','
           << format_double(i < curve.bound_values.size() ? curve.bound_values[i] : 1.0) << '\n';
}

}  // namespace toeplab
