#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "toeplab/dense.hpp"
#include "toeplab/seed.hpp"
#include "toeplab/toeplitz.hpp"

namespace toeplab {

inline constexpr std::size_t default_dense_cap = 2048;
inline constexpr std::uint64_t default_start_seed = 0x70e91177a5eedULL;

/// Operator-norm value with two-sided certificates.
struct NormEstimate {
    double value = 0.0;
    double rayleigh_lower = 0.0;  ///< |Rayleigh quotient| of a unit vector: always <= ||T||
    double upper_cert = 0.0;      ///< triangle-inequality bound: always >= ||T||
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;  ///< ||T y - theta y|| at the returned Ritz pair
    std::uint64_t start_seed = 0;
};

/// |x_0| + sum_{i>=1} ||A_i^{(n)}|| |x_i|. Never smaller than ||T_n||.
inline double triangle_upper_bound(CoeffSeq const& x)
{
    std::size_t const n = x.size();
    double acc = std::abs(x[0]);
    for (std::size_t i = 1; i < n; ++i)
        acc += a_basis_norm(n, i) * std::abs(x[i]);
    return acc;
}

inline double operator_norm_dense(DenseMatrix const& symmetric)
{
    auto eig = symmetric_eigenvalues(symmetric);
    if (eig.empty())
        return 0.0;
    return std::max(std::abs(eig.front()), std::abs(eig.back()));
}

inline NormEstimate operator_norm_dense(SymmetricToeplitz const& t, std::size_t dense_cap = default_dense_cap)
{
    if (t.dim() > dense_cap)
        throw std::length_error("operator_norm_dense: n = " + std::to_string(t.dim()) + " exceeds dense cap "
                                + std::to_string(dense_cap));
    NormEstimate est;
    est.value = operator_norm_dense(t.materialize());
    est.rayleigh_lower = est.value;
    est.upper_cert = std::max(triangle_upper_bound(t.coeffs()), est.value);
    est.converged = true;
    est.iterations = 1;
    return est;
}

/// Dominant eigenpair (largest |eigenvalue|) found by Lanczos.
struct EigenPair {
    double eigenvalue = 0.0;
    std::vector<double> vector;  ///< unit norm
    NormEstimate estimate;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i] * b[i];
    return acc;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Eigenvector of the tridiagonal (diag, off) for the eigenvalue `shift`, by
/// inverse iteration with a partial-pivoting tridiagonal LU.
inline std::vector<double> tridiagonal_eigenvector(std::span<const double> diag, std::span<const double> off,
                                                   double shift, double scale)
{
    std::size_t const k = diag.size();
    std::vector<double> y(k, 1.0);
    if (k == 1)
        return y;
    double const tiny = std::max(scale, std::numeric_limits<double>::min()) * 1e-15;

    // Factor once: U has diagonals d, du, du2; the multipliers and swaps are kept.
    std::vector<double> d(k), du(k - 1), du2(k, 0.0), dl(off.begin(), off.end());
    std::vector<char> swapped(k - 1, 0);
    for (std::size_t i = 0; i < k; ++i)
        d[i] = diag[i] - shift;
    for (std::size_t i = 0; i + 1 < k; ++i)
        du[i] = off[i];
    for (std::size_t i = 0; i + 1 < k; ++i)
    {
        if (std::abs(d[i]) >= std::abs(dl[i]))
        {
            if (d[i] == 0.0)
                d[i] = tiny;
            double fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        }
        else
        {
            double fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            double temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if (i + 2 < k)
            {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            swapped[i] = 1;
        }
    }
    if (d[k - 1] == 0.0)
        d[k - 1] = tiny;

    for (int pass = 0; pass < 3; ++pass)
    {
        std::vector<double> r(y);
        for (std::size_t i = 0; i + 1 < k; ++i)
        {
            if (swapped[i])
            {
                double ri = r[i];
                r[i] = r[i + 1];
                r[i + 1] = ri - dl[i] * r[i + 1];
            }
            else
            {
                r[i + 1] -= dl[i] * r[i];
            }
        }
        y[k - 1] = r[k - 1] / d[k - 1];
        y[k - 2] = (r[k - 2] - du[k - 2] * y[k - 1]) / d[k - 2];
        for (std::size_t i = k - 2; i-- > 0;)
            y[i] = (r[i] - du[i] * y[i + 1] - du2[i] * y[i + 2]) / d[i];
        double nrm = norm2(y);
        if (!(nrm > 0.0) || !std::isfinite(nrm))
        {
            std::fill(y.begin(), y.end(), 1.0);
            nrm = std::sqrt(static_cast<double>(k));
        }
        for (double& v : y)
            v /= nrm;
    }
    return y;
}

}  // namespace detail

/// Lanczos with full reorthogonalization on T, using matvec only.
///
/// Tracks both extreme Ritz values; the dominant one (largest modulus) is
/// returned together with its explicit Ritz vector. Convergence is declared
/// when the dominant pair's residual is <= tol * |theta| and the opposite
/// extreme is either converged too or cannot overtake it.
inline EigenPair dominant_eigenpair(SymmetricToeplitz const& t, double tol, int max_iter,
                                    std::uint64_t start_seed = default_start_seed)
{
    if (!(tol > 0.0))
        throw std::invalid_argument("operator_norm_iterative: tol must be positive");
    if (max_iter < 1)
        throw std::invalid_argument("operator_norm_iterative: max_iter must be >= 1");

    std::size_t const n = t.dim();
    std::size_t const kmax = std::min<std::size_t>(n, static_cast<std::size_t>(max_iter));

    EigenPair out;
    out.estimate.start_seed = start_seed;
    out.estimate.upper_cert = triangle_upper_bound(t.coeffs());

    // Seeded Gaussian start vector (Box-Muller on counter-based uniforms).
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        double u1 = to_open_unit(mix_seed(start_seed, i, 0));
        double u2 = to_open_unit(mix_seed(start_seed, i, 1));
        q[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    {
        double nrm = detail::norm2(q);
        for (double& v : q)
            v /= nrm;
    }

    std::vector<std::vector<double>> basis;
    basis.reserve(std::min<std::size_t>(kmax, 64));
    std::vector<double> alpha, beta;
    std::vector<double> w(n);
    double const scale_hint = std::max(out.estimate.upper_cert, std::numeric_limits<double>::min());

    double theta_lo = 0.0, theta_hi = 0.0, res_lo = 0.0, res_hi = 0.0;
    bool done = false;
    std::size_t check_at = 1;

    for (std::size_t j = 0; j < kmax && !done; ++j)
    {
        basis.push_back(q);
        t.matvec(basis.back(), w);
        double a = detail::dot(w, basis.back());
        alpha.push_back(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for (int pass = 0; pass < 2; ++pass)
        {
            for (auto const& v : basis)
            {
                double h = detail::dot(w, v);
                for (std::size_t i = 0; i < n; ++i)
                    w[i] -= h * v[i];
            }
        }
        double b = detail::norm2(w);
        std::size_t const k = j + 1;
        bool const breakdown = b <= 1e-13 * scale_hint || k == n;
        bool const last = breakdown || k == kmax;

        if (k >= check_at || last)
        {
            check_at = k + std::max<std::size_t>(1, k / 8);
            auto ritz = tridiagonal_eigenvalues(alpha, beta);
            theta_lo = ritz.front();
            theta_hi = ritz.back();
            auto s_lo = detail::tridiagonal_eigenvector(alpha, beta, theta_lo, scale_hint);
            auto s_hi = detail::tridiagonal_eigenvector(alpha, beta, theta_hi, scale_hint);
            res_lo = breakdown ? 0.0 : b * std::abs(s_lo.back());
            res_hi = breakdown ? 0.0 : b * std::abs(s_hi.back());
            double const val = std::max(std::abs(theta_lo), std::abs(theta_hi));
            bool const hi_dominant = std::abs(theta_hi) >= std::abs(theta_lo);
            double const res_dom = hi_dominant ? res_hi : res_lo;
            double const res_oth = hi_dominant ? res_lo : res_hi;
            double const theta_oth = hi_dominant ? theta_lo : theta_hi;
            bool const ok_dom = res_dom <= tol * val;
            bool const ok_oth = res_oth <= tol * val || std::abs(theta_oth) + res_oth < val;
            if ((ok_dom && ok_oth) || last)
            {
                done = true;
                out.estimate.iterations = static_cast<int>(k);
                auto const& s = hi_dominant ? s_hi : s_lo;
                std::vector<double> y(n, 0.0);
                for (std::size_t c = 0; c < k; ++c)
                    for (std::size_t i = 0; i < n; ++i)
                        y[i] += s[c] * basis[c][i];
                double yn = detail::norm2(y);
                if (yn > 0.0)
                    for (double& v : y)
                        v /= yn;
                std::vector<double> ty = t.matvec(y);
                double rq = detail::dot(y, ty);
                double theta = hi_dominant ? theta_hi : theta_lo;
                double r2 = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    r2 += (ty[i] - theta * y[i]) * (ty[i] - theta * y[i]);
                out.eigenvalue = theta;
                out.vector = std::move(y);
                out.estimate.rayleigh_lower = std::abs(rq);
                out.estimate.value = std::max(val, out.estimate.rayleigh_lower);
                out.estimate.residual = std::sqrt(r2);
                bool const explicit_ok = out.estimate.residual <= tol * out.estimate.value
                                         || out.estimate.value == 0.0;
                out.estimate.converged = ((ok_dom && ok_oth) || breakdown) && explicit_ok;
                // Exact arithmetic guarantees value <= upper_cert; absorb rounding.
                out.estimate.upper_cert = std::max(out.estimate.upper_cert, out.estimate.value);
            }
        }
        if (!done)
        {
            beta.push_back(b);
            for (std::size_t i = 0; i < n; ++i)
                q[i] = w[i] / b;
        }
    }
    return out;
}

inline NormEstimate operator_norm_iterative(SymmetricToeplitz const& t, double tol, int max_iter,
                                            std::uint64_t start_seed = default_start_seed)
{
    return dominant_eigenpair(t, tol, max_iter, start_seed).estimate;
}

/// Singular-value comparison between H_n and the Toeplitz matrix obtained by
/// reversing the row order of H_n.
struct HankelCheckReport {
    std::vector<double> hankel_svals;               ///< |eig(H)|, descending
    std::vector<double> reversed_toeplitz_abs_eigs;  ///< singular values of J H, descending
    double max_abs_gap = 0.0;
    double scale = 0.0;  ///< largest singular value
};

inline DenseMatrix reverse_rows(DenseMatrix const& m)
{
    DenseMatrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            out(r, c) = m(m.rows() - 1 - r, c);
    return out;
}

inline HankelCheckReport hankel_toeplitz_singular_check(HankelSeq const& y,
                                                        std::size_t dense_cap = default_dense_cap)
{
    if (y.dim() > dense_cap)
        throw std::length_error("hankel_toeplitz_singular_check: n exceeds dense cap");
    DenseMatrix const h = hankel_from_seq(y);
    HankelCheckReport rep;
    // H is symmetric: its singular values are |eigenvalues|.
    for (double lambda : symmetric_eigenvalues(h))
        rep.hankel_svals.push_back(std::abs(lambda));
    std::sort(rep.hankel_svals.begin(), rep.hankel_svals.end(), std::greater<>());
    // The row-reversed matrix is a nonsymmetric Toeplitz matrix: route through a general SVD.
    rep.reversed_toeplitz_abs_eigs = singular_values(reverse_rows(h));
    for (std::size_t i = 0; i < rep.hankel_svals.size(); ++i)
        rep.max_abs_gap = std::max(rep.max_abs_gap,
                                   std::abs(rep.hankel_svals[i] - rep.reversed_toeplitz_abs_eigs[i]));
    rep.scale = rep.hankel_svals.empty() ? 0.0 : rep.hankel_svals.front();
    return rep;
}

}  // namespace toeplab
