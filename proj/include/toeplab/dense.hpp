#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace toeplab {

/// Row-major dense real matrix. Used for the O(n^3) oracles only.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> data() const { return data_; }

    std::vector<double> multiply(std::span<const double> v) const
    {
        if (v.size() != cols_)
            throw std::invalid_argument("DenseMatrix::multiply: dimension mismatch");
        std::vector<double> out(rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r)
        {
            double acc = 0.0;
            for (std::size_t c = 0; c < cols_; ++c)
                acc += data_[r * cols_ + c] * v[c];
            out[r] = acc;
        }
        return out;
    }

    friend bool operator==(DenseMatrix const&, DenseMatrix const&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

namespace detail {

inline void check_tridiagonal(std::span<const double> diag, std::span<const double> off)
{
    if (!diag.empty() && off.size() + 1 != diag.size())
        throw std::invalid_argument("tridiagonal: off-diagonal must have length n-1");
}

}  // namespace detail

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal, by implicit QL with Wilkinson shifts.
///
/// If `vectors` is non-null it must hold an n x n identity (or any orthogonal
/// basis Q); on return its columns are Q times the eigenvectors, matching the
/// returned eigenvalue order.
inline std::vector<double> tridiagonal_eigenvalues(std::vector<double> diag,
                                                   std::vector<double> off,
                                                   DenseMatrix* vectors = nullptr)
{
    detail::check_tridiagonal(diag, off);
    std::size_t const n = diag.size();
    if (n == 0)
        return {};
    std::vector<double> e(n, 0.0);
    std::copy(off.begin(), off.end(), e.begin());

    for (std::size_t l = 0; l < n; ++l)
    {
        int iter = 0;
        std::size_t m;
        do
        {
            for (m = l; m + 1 < n; ++m)
            {
                double dd = std::abs(diag[m]) + std::abs(diag[m + 1]);
                if (std::abs(e[m]) <= 4.0 * std::numeric_limits<double>::epsilon() * dd)
                    break;
            }
            if (m != l)
            {
                if (++iter > 60)
                    throw std::runtime_error("tridiagonal_eigenvalues: QL iteration did not converge");
                double g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = diag[m] - diag[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                std::size_t i = m;
                bool underflow = false;
                while (i-- > l)
                {
                    double f = s * e[i];
                    double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0)
                    {
                        diag[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = diag[i + 1] - p;
                    r = (diag[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    diag[i + 1] = g + p;
                    g = c * r - b;
                    if (vectors)
                    {
                        DenseMatrix& z = *vectors;
                        for (std::size_t k = 0; k < z.rows(); ++k)
                        {
                            double zf = z(k, i + 1);
                            z(k, i + 1) = s * z(k, i) + c * zf;
                            z(k, i) = c * z(k, i) - s * zf;
                        }
                    }
                }
                if (underflow)
                    continue;
                diag[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return diag[a] < diag[b]; });
    std::vector<double> sorted(n);
    for (std::size_t i = 0; i < n; ++i)
        sorted[i] = diag[order[i]];
    if (vectors)
    {
        DenseMatrix const old = *vectors;
        for (std::size_t k = 0; k < old.rows(); ++k)
            for (std::size_t i = 0; i < n; ++i)
                (*vectors)(k, i) = old(k, order[i]);
    }
    return sorted;
}

/// Eigenvalues (ascending) of a dense symmetric matrix: Householder reduction
/// to tridiagonal form followed by implicit QL. Deterministic for a given input.
inline std::vector<double> symmetric_eigenvalues(DenseMatrix a)
{
    std::size_t const n = a.rows();
    if (a.cols() != n)
        throw std::invalid_argument("symmetric_eigenvalues: matrix must be square");
    if (n == 0)
        return {};

    std::vector<double> diag(n), off(n > 1 ? n - 1 : 0);
    std::vector<double> v(n), w(n);
    for (std::size_t k = 0; k + 2 < n; ++k)
    {
        // Reflector annihilating a(k+2.., k).
        double alpha = 0.0;
        for (std::size_t i = k + 1; i < n; ++i)
            alpha = std::max(alpha, std::abs(a(i, k)));
        if (alpha == 0.0)
        {
            off[k] = 0.0;
            continue;
        }
        double sigma = 0.0;
        for (std::size_t i = k + 1; i < n; ++i)
        {
            v[i] = a(i, k) / alpha;
            sigma += v[i] * v[i];
        }
        double norm = std::sqrt(sigma);
        double beta = v[k + 1] >= 0.0 ? -norm : norm;
        off[k] = beta * alpha;
        v[k + 1] -= beta;
        double vnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i)
            vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0)
            continue;
        double tau = 2.0 / vnorm2;

        // A <- H A H with H = I - tau v v^T on the trailing block.
        for (std::size_t i = k + 1; i < n; ++i)
        {
            double acc = 0.0;
            for (std::size_t j = k + 1; j < n; ++j)
                acc += a(i, j) * v[j];
            w[i] = tau * acc;
        }
        double vw = 0.0;
        for (std::size_t i = k + 1; i < n; ++i)
            vw += v[i] * w[i];
        double half = 0.5 * tau * vw;
        for (std::size_t i = k + 1; i < n; ++i)
            w[i] -= half * v[i];
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                a(i, j) -= v[i] * w[j] + w[i] * v[j];
    }
    for (std::size_t k = 0; k < n; ++k)
        diag[k] = a(k, k);
    if (n >= 2)
        off[n - 2] = a(n - 1, n - 2);
    return tridiagonal_eigenvalues(std::move(diag), std::move(off));
}

/// Singular values (descending) of a general dense matrix by one-sided
/// (Hestenes) Jacobi rotations. Accurate to O(eps) relative to the largest
/// singular value, including the small ones.
inline std::vector<double> singular_values(DenseMatrix const& a, int max_sweeps = 60)
{
    std::size_t const rows = a.rows();
    std::size_t const cols = a.cols();
    // Work on columns stored contiguously.
    std::vector<std::vector<double>> col(cols, std::vector<double>(rows));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            col[c][r] = a(r, c);

    double const eps = std::numeric_limits<double>::epsilon();
    for (int sweep = 0; sweep < max_sweeps; ++sweep)
    {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < cols; ++p)
        {
            for (std::size_t q = p + 1; q < cols; ++q)
            {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t r = 0; r < rows; ++r)
                {
                    alpha += col[p][r] * col[p][r];
                    beta += col[q][r] * col[q][r];
                    gamma += col[p][r] * col[q][r];
                }
                if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta))
                    continue;
                rotated = true;
                double zeta = (beta - alpha) / (2.0 * gamma);
                double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                for (std::size_t r = 0; r < rows; ++r)
                {
                    double xp = col[p][r];
                    double xq = col[q][r];
                    col[p][r] = c * xp - s * xq;
                    col[q][r] = s * xp + c * xq;
                }
            }
        }
        if (!rotated)
            break;
    }

    std::vector<double> sv(cols);
    for (std::size_t c = 0; c < cols; ++c)
    {
        double acc = 0.0;
        for (double x : col[c])
            acc += x * x;
        sv[c] = std::sqrt(acc);
    }
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

}  // namespace toeplab
