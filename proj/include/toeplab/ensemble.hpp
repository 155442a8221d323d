#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "toeplab/seed.hpp"
#include "toeplab/toeplitz.hpp"

namespace toeplab {

namespace family {

struct Rademacher {};
struct Gaussian {
    double mean = 0.0;
    double sd = 1.0;
};
struct UniformCentered {
    double halfwidth = 1.0;
};
struct StudentT {
    double dof = 5.0;
};
/// Index-dependent two-point law: X_i = +-sqrt(i log i logloglog i) with
/// probability p_i = 1/(i log i loglog i logloglog i) each, else 0.
struct TwoPointHeavy {};
struct Constant {
    double value = 0.0;
};

}  // namespace family

using Family = std::variant<family::Rademacher, family::Gaussian, family::UniformCentered, family::StudentT,
                            family::TwoPointHeavy, family::Constant>;

struct TruncationRule {
    enum class Kind { by_index, by_dimension };
    Kind kind = Kind::by_index;
    std::size_t dimension = 0;  ///< used by by_dimension

    static TruncationRule per_index() { return {Kind::by_index, 0}; }
    static TruncationRule per_dimension(std::size_t n) { return {Kind::by_dimension, n}; }

    /// sqrt(k log k) with k = i (by_index) or n (by_dimension); +inf for k <= 1.
    double threshold(std::size_t i) const
    {
        std::size_t const k = kind == Kind::by_index ? i : dimension;
        if (k <= 1)
            return std::numeric_limits<double>::infinity();
        double const kd = static_cast<double>(k);
        return std::sqrt(kd * std::log(kd));
    }
};

struct EnsembleSpec {
    Family family = family::Rademacher{};
    std::optional<TruncationRule> truncation;
    std::uint64_t master_seed = 1;
};

/// Smallest index at which the two-point law is switched on: below it
/// logloglog i is undefined or non-positive.
inline constexpr std::size_t two_point_first_index = 16;

struct TwoPointLaw {
    double value = 0.0;        ///< magnitude of the nonzero atoms
    double probability = 0.0;  ///< probability of each atom
};

/// Parameters of the two-point law at index i. Iterated logs are guarded as
/// log(max(., e)), so logloglog is 1 throughout the desk-scale range.
inline TwoPointLaw two_point_law(std::size_t i)
{
    if (i < two_point_first_index)
        return {};
    double const e = std::numbers::e;
    double const x = static_cast<double>(i);
    double const l1 = std::log(std::max(x, e));
    double const l2 = std::log(std::max(l1, e));
    double const l3 = std::log(std::max(l2, e));
    return {std::sqrt(x * l1 * l3), 1.0 / (x * l1 * l2 * l3)};
}

namespace detail {

inline void validate(Family const& f)
{
    std::visit(
        [](auto const& fam) {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, family::Gaussian>)
            {
                if (!(fam.sd >= 0.0) || !std::isfinite(fam.mean))
                    throw std::invalid_argument("gaussian: sd must be >= 0 and mean finite");
            }
            else if constexpr (std::is_same_v<T, family::UniformCentered>)
            {
                if (!(fam.halfwidth >= 0.0))
                    throw std::invalid_argument("uniform_centered: halfwidth must be >= 0");
            }
            else if constexpr (std::is_same_v<T, family::StudentT>)
            {
                if (!(fam.dof > 0.0))
                    throw std::invalid_argument("student_t: dof must be > 0");
            }
            else if constexpr (std::is_same_v<T, family::Constant>)
            {
                if (!std::isfinite(fam.value))
                    throw std::invalid_argument("constant: value must be finite");
            }
        },
        f);
}

inline double draw(Family const& f, std::uint64_t seed, std::uint64_t sample_index, std::size_t entry)
{
    double const u1 = to_open_unit(mix_seed(seed, sample_index, entry, 0));
    return std::visit(
        [&](auto const& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, family::Rademacher>)
                return u1 < 0.5 ? -1.0 : 1.0;
            else if constexpr (std::is_same_v<T, family::Gaussian>)
            {
                double const u2 = to_open_unit(mix_seed(seed, sample_index, entry, 1));
                return fam.mean + fam.sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
            }
            else if constexpr (std::is_same_v<T, family::UniformCentered>)
                return fam.halfwidth * (2.0 * u1 - 1.0);
            else if constexpr (std::is_same_v<T, family::StudentT>)
                return boost::math::quantile(boost::math::students_t_distribution<double>(fam.dof), u1);
            else if constexpr (std::is_same_v<T, family::TwoPointHeavy>)
            {
                TwoPointLaw const law = two_point_law(entry);
                if (u1 < law.probability)
                    return -law.value;
                if (u1 > 1.0 - law.probability)
                    return law.value;
                return 0.0;
            }
            else
                return fam.value;
        },
        f);
}

}  // namespace detail

inline std::string family_name(Family const& f)
{
    return std::visit(
        [](auto const& fam) -> std::string {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, family::Rademacher>)
                return "rademacher";
            else if constexpr (std::is_same_v<T, family::Gaussian>)
                return "gaussian";
            else if constexpr (std::is_same_v<T, family::UniformCentered>)
                return "uniform_centered";
            else if constexpr (std::is_same_v<T, family::StudentT>)
                return "student_t";
            else if constexpr (std::is_same_v<T, family::TwoPointHeavy>)
                return "two_point_heavy";
            else
                return "constant";
        },
        f);
}

/// Mean of the (index-free) law; two_point_heavy is symmetric, so 0.
inline double family_mean(Family const& f)
{
    return std::visit(
        [](auto const& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, family::Gaussian>)
                return fam.mean;
            else if constexpr (std::is_same_v<T, family::StudentT>)
                return fam.dof > 1.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
            else if constexpr (std::is_same_v<T, family::Constant>)
                return fam.value;
            else
                return 0.0;
        },
        f);
}

/// E X_i^2 for entry i.
inline double family_second_moment(Family const& f, std::size_t i)
{
    return std::visit(
        [i](auto const& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, family::Rademacher>)
                return 1.0;
            else if constexpr (std::is_same_v<T, family::Gaussian>)
                return fam.mean * fam.mean + fam.sd * fam.sd;
            else if constexpr (std::is_same_v<T, family::UniformCentered>)
                return fam.halfwidth * fam.halfwidth / 3.0;
            else if constexpr (std::is_same_v<T, family::StudentT>)
                return fam.dof > 2.0 ? fam.dof / (fam.dof - 2.0) : std::numeric_limits<double>::infinity();
            else if constexpr (std::is_same_v<T, family::TwoPointHeavy>)
            {
                TwoPointLaw const law = two_point_law(i);
                return 2.0 * law.probability * law.value * law.value;
            }
            else
                return fam.value * fam.value;
        },
        f);
}

/// Almost-sure bound on |X_i| over all indices, or +inf.
inline double family_bound(Family const& f)
{
    return std::visit(
        [](auto const& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, family::Rademacher>)
                return 1.0;
            else if constexpr (std::is_same_v<T, family::UniformCentered>)
                return fam.halfwidth;
            else if constexpr (std::is_same_v<T, family::Constant>)
                return std::abs(fam.value);
            else if constexpr (std::is_same_v<T, family::Gaussian>)
                return fam.sd == 0.0 ? std::abs(fam.mean) : std::numeric_limits<double>::infinity();
            else
                return std::numeric_limits<double>::infinity();
        },
        f);
}

/// P(|X_i| > threshold) for threshold >= 0.
inline double family_tail_probability(Family const& f, std::size_t i, double threshold)
{
    if (threshold < 0.0)
        return 1.0;
    return std::visit(
        [&](auto const& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, family::Rademacher>)
                return threshold < 1.0 ? 1.0 : 0.0;
            else if constexpr (std::is_same_v<T, family::Gaussian>)
            {
                if (fam.sd == 0.0)
                    return std::abs(fam.mean) > threshold ? 1.0 : 0.0;
                double const up = (threshold - fam.mean) / fam.sd;
                double const down = (-threshold - fam.mean) / fam.sd;
                return 0.5 * std::erfc(up / std::numbers::sqrt2) + 0.5 * std::erfc(-down / std::numbers::sqrt2);
            }
            else if constexpr (std::is_same_v<T, family::UniformCentered>)
            {
                if (fam.halfwidth <= threshold)
                    return 0.0;
                return 1.0 - threshold / fam.halfwidth;
            }
            else if constexpr (std::is_same_v<T, family::StudentT>)
            {
                boost::math::students_t_distribution<double> dist(fam.dof);
                return 2.0 * boost::math::cdf(boost::math::complement(dist, threshold));
            }
            else if constexpr (std::is_same_v<T, family::TwoPointHeavy>)
            {
                TwoPointLaw const law = two_point_law(i);
                return law.value > threshold ? 2.0 * law.probability : 0.0;
            }
            else
                return std::abs(fam.value) > threshold ? 1.0 : 0.0;
        },
        f);
}

/// Entries with |x_i| above the rule's threshold are set to zero.
inline CoeffSeq truncate_sequence(CoeffSeq const& x, TruncationRule const& rule)
{
    std::vector<double> out(x.entries().begin(), x.entries().end());
    for (std::size_t i = 0; i < out.size(); ++i)
        if (std::abs(out[i]) > rule.threshold(i))
            out[i] = 0.0;
    return CoeffSeq(std::move(out));
}

/// Draw x_0..x_{n-1} for sample `sample_index`.
///
/// Entry i depends only on (master_seed, sample_index, i), so the draw is
/// reproducible and the length-m draw is a prefix of the length-n draw.
/// Note that a by_dimension truncation depends on its own n, not on the
/// draw length.
inline CoeffSeq sample_sequence(EnsembleSpec const& spec, std::size_t n, std::uint64_t sample_index)
{
    if (n == 0)
        throw std::invalid_argument("sample_sequence: n must be >= 1");
    detail::validate(spec.family);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = detail::draw(spec.family, spec.master_seed, sample_index, i);
    CoeffSeq seq(std::move(x));
    if (spec.truncation)
        return truncate_sequence(seq, *spec.truncation);
    return seq;
}

/// Smallest c with mean(exp((|x_i|/c)^alpha)) - 1 <= 1, to relative 1e-6.
inline double orlicz_norm_empirical(std::span<const double> samples, double alpha)
{
    if (samples.empty())
        throw std::invalid_argument("orlicz_norm_empirical: samples must be non-empty");
    if (!(alpha > 0.0))
        throw std::invalid_argument("orlicz_norm_empirical: alpha must be positive");
    double max_abs = 0.0;
    for (double s : samples)
        max_abs = std::max(max_abs, std::abs(s));
    if (max_abs == 0.0)
        return 0.0;

    auto excess = [&](double c) {
        double acc = 0.0;
        for (double s : samples)
            acc += std::expm1(std::pow(std::abs(s) / c, alpha));
        return acc / static_cast<double>(samples.size());
    };
    // At c_hi every term is <= exp(log 2) - 1 = 1.
    double hi = max_abs / std::pow(std::log(2.0), 1.0 / alpha);
    double lo = hi;
    while (excess(lo) <= 1.0)
        lo *= 0.5;
    while ((hi - lo) > 1e-7 * hi)
    {
        double mid = 0.5 * (lo + hi);
        if (excess(mid) <= 1.0)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

struct MomentEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo estimate of E max_i |X_i|^p over n_mc length-n draws.
inline MomentEstimate max_abs_moment(EnsembleSpec spec, std::size_t n, double p, std::size_t n_mc,
                                     std::uint64_t seed)
{
    if (!(p >= 1.0))
        throw std::invalid_argument("max_abs_moment: p must be >= 1");
    if (n_mc == 0)
        throw std::invalid_argument("max_abs_moment: n_mc must be >= 1");
    spec.master_seed = seed;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t k = 0; k < n_mc; ++k)
    {
        CoeffSeq const x = sample_sequence(spec, n, k);
        double m = 0.0;
        for (double v : x.entries())
            m = std::max(m, std::abs(v));
        double const mp = std::pow(m, p);
        sum += mp;
        sum2 += mp * mp;
    }
    double const count = static_cast<double>(n_mc);
    MomentEstimate est;
    est.mean = sum / count;
    if (n_mc > 1)
    {
        double const var = std::max(0.0, (sum2 - count * est.mean * est.mean) / (count - 1.0));
        est.std_error = std::sqrt(var / count);
    }
    return est;
}

}  // namespace toeplab
