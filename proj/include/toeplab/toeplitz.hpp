#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "toeplab/dense.hpp"
#include "toeplab/fft.hpp"

namespace toeplab {

/// Finite real sequence x_0..x_{n-1}; the first row of a symmetric Toeplitz
/// matrix of dimension n.
class CoeffSeq {
public:
    CoeffSeq() = default;

    explicit CoeffSeq(std::vector<double> entries) : entries_(std::move(entries))
    {
        if (entries_.empty())
            throw std::invalid_argument("CoeffSeq: sequence must be non-empty");
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (!std::isfinite(entries_[i]))
                throw std::invalid_argument("CoeffSeq: entry " + std::to_string(i) + " is not finite");
    }

    CoeffSeq(std::initializer_list<double> entries) : CoeffSeq(std::vector<double>(entries)) {}

    std::size_t size() const { return entries_.size(); }
    double operator[](std::size_t i) const { return entries_[i]; }
    std::span<const double> entries() const { return entries_; }

    /// First m entries; valid for 1 <= m <= size().
    CoeffSeq prefix(std::size_t m) const
    {
        if (m == 0 || m > entries_.size())
            throw std::out_of_range("CoeffSeq::prefix: length out of range");
        return CoeffSeq(std::vector<double>(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(m)));
    }

    CoeffSeq scaled(double c) const
    {
        std::vector<double> out(entries_);
        for (double& x : out)
            x *= c;
        return CoeffSeq(std::move(out));
    }

    friend bool operator==(CoeffSeq const&, CoeffSeq const&) = default;

private:
    std::vector<double> entries_;
};

/// Symmetric Toeplitz matrix T[j][l] = x_{|j-l|}, applied matrix-free through
/// a circulant embedding of size 2^k >= 2n-1.
///
/// The embedding spectrum is computed on first use and shared by copies.
/// Once computed it is never modified, so concurrent const use is safe.
class SymmetricToeplitz {
public:
    explicit SymmetricToeplitz(CoeffSeq coeffs)
        : coeffs_(std::move(coeffs)), cache_(std::make_shared<Cache>())
    {
        if (coeffs_.size() == 0)
            throw std::invalid_argument("SymmetricToeplitz: empty coefficient sequence");
    }

    std::size_t dim() const { return coeffs_.size(); }
    CoeffSeq const& coeffs() const { return coeffs_; }

    std::size_t embedding_size() const { return next_power_of_two(2 * dim() - 1); }

    bool spectrum_cached() const { return cache_->ready.load(std::memory_order_acquire); }

    /// Eigenvalues of the circulant embedding (real up to rounding).
    std::span<const Complex> embedded_spectrum() const
    {
        ensure_spectrum();
        return cache_->spectrum;
    }

    std::vector<double> matvec(std::span<const double> v) const
    {
        std::vector<double> out(dim());
        matvec(v, out);
        return out;
    }

    /// out = T v. `out` must have length n.
    void matvec(std::span<const double> v, std::span<double> out) const
    {
        std::size_t const n = dim();
        if (v.size() != n || out.size() != n)
            throw std::invalid_argument("SymmetricToeplitz::matvec: dimension mismatch (expected "
                                        + std::to_string(n) + ", got " + std::to_string(v.size()) + ")");
        if (n == 1)
        {
            out[0] = coeffs_[0] * v[0];
            return;
        }
        ensure_spectrum();
        std::vector<Complex> buf(cache_->plan->size(), Complex{});
        for (std::size_t i = 0; i < n; ++i)
            buf[i] = v[i];
        cache_->plan->forward(buf);
        for (std::size_t k = 0; k < buf.size(); ++k)
            buf[k] *= cache_->spectrum[k];
        cache_->plan->backward(buf);
        double const scale = 1.0 / static_cast<double>(buf.size());
        for (std::size_t i = 0; i < n; ++i)
            out[i] = buf[i].real() * scale;
    }

    /// Dense product, O(n^2); the reference the fast path is checked against.
    std::vector<double> matvec_dense(std::span<const double> v) const
    {
        std::size_t const n = dim();
        if (v.size() != n)
            throw std::invalid_argument("SymmetricToeplitz::matvec_dense: dimension mismatch");
        std::vector<double> out(n, 0.0);
        for (std::size_t j = 0; j < n; ++j)
        {
            double acc = 0.0;
            for (std::size_t l = 0; l < n; ++l)
                acc += coeffs_[j > l ? j - l : l - j] * v[l];
            out[j] = acc;
        }
        return out;
    }

    DenseMatrix materialize() const
    {
        std::size_t const n = dim();
        DenseMatrix m(n, n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l)
                m(j, l) = coeffs_[j > l ? j - l : l - j];
        return m;
    }

private:
    struct Cache {
        std::once_flag once;
        std::atomic<bool> ready{false};
        std::unique_ptr<FftPlan> plan;
        std::vector<Complex> spectrum;
    };

    void ensure_spectrum() const
    {
        std::call_once(cache_->once, [this] {
            std::size_t const n = dim();
            std::size_t const size = embedding_size();
            auto plan = std::make_unique<FftPlan>(size);
            std::vector<Complex> column(size, Complex{});
            column[0] = coeffs_[0];
            for (std::size_t k = 1; k < n; ++k)
            {
                column[k] = coeffs_[k];
                column[size - k] = coeffs_[k];
            }
            plan->forward(column);
            cache_->plan = std::move(plan);
            cache_->spectrum = std::move(column);
            cache_->ready.store(true, std::memory_order_release);
        });
    }

    CoeffSeq coeffs_;
    std::shared_ptr<Cache> cache_;
};

inline SymmetricToeplitz toeplitz_from_coeffs(CoeffSeq x)
{
    return SymmetricToeplitz(std::move(x));
}

/// Entries y_1..y_{2n-1} of an n x n Hankel matrix, H[j][k] = y_{j+k+1}
/// with 0-based j, k.
class HankelSeq {
public:
    HankelSeq(std::vector<double> entries, std::size_t n) : entries_(std::move(entries)), n_(n)
    {
        if (n == 0)
            throw std::invalid_argument("HankelSeq: dimension must be positive");
        if (entries_.size() != 2 * n - 1)
            throw std::invalid_argument("HankelSeq: expected " + std::to_string(2 * n - 1) + " entries, got "
                                        + std::to_string(entries_.size()));
        for (double y : entries_)
            if (!std::isfinite(y))
                throw std::invalid_argument("HankelSeq: non-finite entry");
    }

    std::size_t dim() const { return n_; }
    std::span<const double> entries() const { return entries_; }

private:
    std::vector<double> entries_;
    std::size_t n_;
};

inline DenseMatrix hankel_from_seq(HankelSeq const& y)
{
    std::size_t const n = y.dim();
    DenseMatrix h(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
            h(j, k) = y.entries()[j + k];
    return h;
}

/// Exact operator norm of A_i^{(n)} = [1{|j-l| = i}].
///
/// For i >= 1 the graph with edges {j, j+i} is a disjoint union of i paths,
/// the longest having ceil(n/i) vertices; a path on L vertices has norm
/// 2 cos(pi/(L+1)).
inline double a_basis_norm(std::size_t n, std::size_t i)
{
    if (n == 0 || i >= n)
        throw std::out_of_range("a_basis_norm: index " + std::to_string(i) + " out of range for n = "
                                + std::to_string(n));
    if (i == 0)
        return 1.0;
    std::size_t const longest = (n + i - 1) / i;
    return 2.0 * std::cos(std::numbers::pi / static_cast<double>(longest + 1));
}

/// Dense A_i^{(n)}; used by tests as the oracle for a_basis_norm.
inline DenseMatrix a_basis_matrix(std::size_t n, std::size_t i)
{
    if (n == 0 || i >= n)
        throw std::out_of_range("a_basis_matrix: index out of range");
    DenseMatrix m(n, n);
    for (std::size_t j = 0; j < n; ++j)
    {
        if (j + i < n)
            m(j, j + i) = 1.0;
        if (j >= i)
            m(j, j - i) = 1.0;
    }
    return m;
}

}  // namespace toeplab
