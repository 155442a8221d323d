#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "toeplab/fft.hpp"
#include "toeplab/norm.hpp"
#include "toeplab/toeplitz.hpp"

namespace toeplab {

/// Cosine polynomial g(t) = c_0 + sum_{j>=1} c_j cos(2 pi j t) on [0, 1].
///
/// g is even and 1-periodic, so sup over [0,1] equals sup over [0,1/2].
class SymbolPoly {
public:
    SymbolPoly() = default;
    explicit SymbolPoly(std::vector<double> c) : c_(std::move(c)) {}

    std::size_t size() const { return c_.size(); }
    std::span<const double> coeffs() const { return c_; }

    /// Direct evaluation; phases are accumulated by complex rotation in long
    /// double with an exact resync every 64 terms.
    double operator()(double t) const
    {
        if (c_.empty())
            return 0.0;
        long double acc = c_[0];
        long double const step = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(t);
        long double const wr = std::cos(step), wi = std::sin(step);
        long double zr = 1.0L, zi = 0.0L;
        for (std::size_t j = 1; j < c_.size(); ++j)
        {
            if (j % 64 == 0)
            {
                long double phase = static_cast<long double>(j) * static_cast<long double>(t);
                phase -= std::floor(phase);
                long double angle = 2.0L * std::numbers::pi_v<long double> * phase;
                zr = std::cos(angle);
                zi = std::sin(angle);
            }
            else
            {
                long double nr = zr * wr - zi * wi;
                zi = zr * wi + zi * wr;
                zr = nr;
            }
            acc += static_cast<long double>(c_[j]) * zr;
        }
        return static_cast<double>(acc);
    }

    /// 2 pi sum j |c_j|: Lipschitz constant of g.
    double lipschitz() const
    {
        double acc = 0.0;
        for (std::size_t j = 1; j < c_.size(); ++j)
            acc += static_cast<double>(j) * std::abs(c_[j]);
        return 2.0 * std::numbers::pi * acc;
    }

    /// (2 pi)^2 sum j^2 |c_j|: bound on |g''|.
    double curvature() const
    {
        double acc = 0.0;
        for (std::size_t j = 1; j < c_.size(); ++j)
            acc += static_cast<double>(j) * static_cast<double>(j) * std::abs(c_[j]);
        return 4.0 * std::numbers::pi * std::numbers::pi * acc;
    }

    double abs_sum() const
    {
        double acc = 0.0;
        for (double c : c_)
            acc += std::abs(c);
        return acc;
    }

private:
    std::vector<double> c_;
};

/// Multiplier of the Laurent matrix: c_0 = x_0, c_j = 2 x_j.
inline SymbolPoly laurent_symbol(CoeffSeq const& x)
{
    std::vector<double> c(x.size());
    c[0] = x[0];
    for (std::size_t j = 1; j < x.size(); ++j)
        c[j] = 2.0 * x[j];
    return SymbolPoly(std::move(c));
}

/// Fejer-damped symbol: c_0 = x_0, c_j = 2 (1 - j/n) x_j.
inline SymbolPoly fejer_symbol(CoeffSeq const& x)
{
    std::size_t const n = x.size();
    std::vector<double> c(n);
    c[0] = x[0];
    for (std::size_t j = 1; j < n; ++j)
        c[j] = 2.0 * (1.0 - static_cast<double>(j) / static_cast<double>(n)) * x[j];
    return SymbolPoly(std::move(c));
}

/// Certified bracket lo <= sup_t |g(t)| <= hi.
struct SupNormCert {
    double lo = 0.0;
    double hi = 0.0;
    long grid_points = 0;  ///< total evaluations of g
    int refinements = 0;   ///< bisection levels used
    bool converged = false;
};

/// Bracket sup |g| over [0, 1/2].
///
/// A uniform grid (>= 4m points, evaluated in one FFT) seeds the bracket.
/// Every cell [a, b] of width h is bounded by
///     max(|g(a)|, |g(b)|) + min(L1 h / 2, L2 h^2 / 8)
/// with L1 = sup|g'| and L2 = sup|g''|; cells whose bound can still exceed
/// lo + tol are bisected, up to `max_refinements` levels. Evaluation rounding
/// is folded into both ends of the bracket.
inline SupNormCert sup_norm_certified(SymbolPoly const& g, double tol, int max_refinements = 24)
{
    if (!(tol > 0.0))
        throw std::invalid_argument("sup_norm_certified: tol must be positive");
    SupNormCert cert;
    std::size_t const m = g.size();
    if (m == 0)
    {
        cert.converged = true;
        return cert;
    }
    double const eps = std::numeric_limits<double>::epsilon();
    double const abs_sum = g.abs_sum();
    double const l1 = g.lipschitz();
    double const l2 = g.curvature();

    std::size_t const big_n = next_power_of_two(std::max<std::size_t>(8 * m, 16));
    FftPlan const plan(big_n);
    std::vector<Complex> buf(big_n, Complex{});
    for (std::size_t j = 0; j < m; ++j)
        buf[j] = g.coeffs()[j];
    plan.backward(buf);
    double const fft_err = 8.0 * (plan.log2_size() + 1) * eps * abs_sum;
    double const direct_err = 16.0 * eps * abs_sum + 4.0 * static_cast<double>(m) * 1.1e-19 * abs_sum;

    std::size_t const points = big_n / 2 + 1;
    std::vector<double> value(points);
    double best = 0.0;
    for (std::size_t k = 0; k < points; ++k)
    {
        value[k] = std::abs(buf[k].real());
        best = std::max(best, value[k]);
    }
    cert.grid_points = static_cast<long>(points);
    double lo = std::max(0.0, best - fft_err);

    struct Cell {
        double a, b;
        double fa, fb;  // |g| at the ends, already inflated by their error allowance
    };
    auto bound = [&](Cell const& c) {
        double h = c.b - c.a;
        return std::max(c.fa, c.fb) + std::min(l1 * h / 2.0, l2 * h * h / 8.0);
    };

    double settled_hi = 0.0;  // max bound over cells that can no longer exceed lo + tol
    std::vector<Cell> active;
    active.reserve(points);
    for (std::size_t k = 0; k + 1 < points; ++k)
    {
        Cell c{static_cast<double>(k) / big_n, static_cast<double>(k + 1) / big_n, value[k] + fft_err,
               value[k + 1] + fft_err};
        double u = bound(c);
        if (u <= lo + tol)
            settled_hi = std::max(settled_hi, u);
        else
            active.push_back(c);
    }

    int level = 0;
    while (!active.empty() && level < max_refinements)
    {
        ++level;
        std::vector<Cell> next;
        next.reserve(active.size() * 2);
        std::vector<double> mids(active.size());
        for (std::size_t i = 0; i < active.size(); ++i)
        {
            double mid = 0.5 * (active[i].a + active[i].b);
            mids[i] = std::abs(g(mid));
            lo = std::max(lo, mids[i] - direct_err);
        }
        cert.grid_points += static_cast<long>(active.size());
        for (std::size_t i = 0; i < active.size(); ++i)
        {
            Cell const& c = active[i];
            double mid = 0.5 * (c.a + c.b);
            double fm = mids[i] + direct_err;
            for (Cell child : {Cell{c.a, mid, c.fa, fm}, Cell{mid, c.b, fm, c.fb}})
            {
                double u = bound(child);
                if (u <= lo + tol)
                    settled_hi = std::max(settled_hi, u);
                else
                    next.push_back(child);
            }
        }
        active = std::move(next);
    }

    double hi = settled_hi;
    for (Cell const& c : active)
        hi = std::max(hi, bound(c));
    cert.lo = lo;
    cert.hi = std::max(hi, lo);
    cert.refinements = level;
    cert.converged = cert.hi - cert.lo <= tol;
    return cert;
}

/// The deterministic sandwich sup|Fejer| <= ||T_n|| <= sup|Laurent|.
struct SandwichReport {
    SupNormCert lower;  ///< bracket for sup |fejer_symbol(x)|
    NormEstimate norm;
    SupNormCert upper;  ///< bracket for sup |laurent_symbol(x)|
    bool lower_holds = true;
    bool upper_holds = true;
    bool holds() const { return lower_holds && upper_holds; }
};

/// Evaluate both symbol bounds and the norm. A side is reported violated only
/// when the certified quantities prove it: Fejer lo - tol above the norm's
/// upper estimate (value + residual), or the Rayleigh lower bound above
/// Laurent hi + tol.
inline SandwichReport sandwich(CoeffSeq const& x, double tol, double norm_tol = 1e-10, int max_iter = 0)
{
    if (!(tol > 0.0))
        throw std::invalid_argument("sandwich: tol must be positive");
    SandwichReport rep;
    SymmetricToeplitz const t(x);
    if (max_iter <= 0)
        max_iter = static_cast<int>(4 * x.size());
    rep.norm = operator_norm_iterative(t, norm_tol, max_iter);
    if (!rep.norm.converged)
        throw std::runtime_error("sandwich: norm estimate did not converge");
    rep.lower = sup_norm_certified(fejer_symbol(x), tol / 4.0);
    rep.upper = sup_norm_certified(laurent_symbol(x), tol / 4.0);
    rep.lower_holds = rep.lower.lo - tol <= rep.norm.value + rep.norm.residual;
    rep.upper_holds = rep.norm.rayleigh_lower <= rep.upper.hi + tol;
    return rep;
}

/// Quantities of the chaining (entropy-integral) bound on E sup|f|.
struct ChainingQuantities {
    double diameter = 0.0;   ///< D = 4 sqrt(sum_{j>=1} x_j^2)
    double lipschitz = 0.0;  ///< A = sqrt(sum_{j>=1} j^2 x_j^2)
    double entropy_bound = 0.0;
};

inline ChainingQuantities chaining_quantities(CoeffSeq const& x, double constant = 1.0)
{
    if (!(constant > 0.0))
        throw std::invalid_argument("chaining_quantities: constant must be positive");
    double s2 = 0.0, sj2 = 0.0;
    for (std::size_t j = 1; j < x.size(); ++j)
    {
        s2 += x[j] * x[j];
        sj2 += static_cast<double>(j) * static_cast<double>(j) * x[j] * x[j];
    }
    ChainingQuantities q;
    q.diameter = 4.0 * std::sqrt(s2);
    q.lipschitz = std::sqrt(sj2);
    if (q.diameter > 0.0)
    {
        double const log_term = std::max(0.0, std::log(constant * q.lipschitz / q.diameter));
        q.entropy_bound = q.diameter * std::sqrt(log_term) + std::sqrt(std::numbers::pi) * q.diameter;
    }
    return q;
}

/// C sqrt(sum E X_i^2) sqrt(log n).
inline double expectation_upper_bound(std::span<const double> second_moments, std::size_t n, double constant = 1.0)
{
    if (n < 2)
        throw std::invalid_argument("expectation_upper_bound: n must be >= 2");
    if (!(constant > 0.0))
        throw std::invalid_argument("expectation_upper_bound: constant must be positive");
    double total = 0.0;
    for (double m : second_moments)
    {
        if (m < 0.0)
            throw std::invalid_argument("expectation_upper_bound: negative second moment");
        total += m;
    }
    return constant * std::sqrt(total) * std::sqrt(std::log(static_cast<double>(n)));
}

/// ||a||_2 sqrt(max(0, log(||a||_2 / ||a||_4))); 0 for the zero vector.
inline double l2l4_lower_diagnostic(std::span<const double> a)
{
    double s2 = 0.0, s4 = 0.0;
    for (double v : a)
    {
        s2 += v * v;
        s4 += v * v * v * v;
    }
    if (s2 == 0.0)
        return 0.0;
    double const l2 = std::sqrt(s2);
    double const l4 = std::sqrt(std::sqrt(s4));
    return l2 * std::sqrt(std::max(0.0, std::log(l2 / l4)));
}

}  // namespace toeplab
