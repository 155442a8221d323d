#pragma once

#include <bit>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace toeplab {

using Complex = std::complex<double>;

/// Radix-2 decimation-in-time FFT of a fixed power-of-two size.
///
/// Twiddles are computed directly from std::polar for every index (no
/// recurrence), so the transform error stays at O(eps log N). The plan is
/// immutable after construction and may be shared between threads.
class FftPlan {
public:
    explicit FftPlan(std::size_t size) : size_(size)
    {
        if (size == 0 || !std::has_single_bit(size))
            throw std::invalid_argument("FftPlan: size must be a power of two");
        log2_ = static_cast<unsigned>(std::countr_zero(size));
        twiddles_.resize(size / 2);
        for (std::size_t k = 0; k < size / 2; ++k)
        {
            double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(size);
            twiddles_[k] = std::polar(1.0, angle);
        }
        reversed_.resize(size);
        for (std::size_t i = 0; i < size; ++i)
        {
            std::size_t r = 0;
            for (unsigned b = 0; b < log2_; ++b)
                if (i & (std::size_t{1} << b))
                    r |= std::size_t{1} << (log2_ - 1 - b);
            reversed_[i] = r;
        }
    }

    std::size_t size() const { return size_; }
    unsigned log2_size() const { return log2_; }

    /// In-place forward transform: X[k] = sum_j x[j] exp(-2 pi i jk/N).
    void forward(std::span<Complex> data) const { transform(data, false); }

    /// In-place unnormalized inverse: x[j] = sum_k X[k] exp(+2 pi i jk/N).
    void backward(std::span<Complex> data) const { transform(data, true); }

private:
    void transform(std::span<Complex> data, bool inverse) const
    {
        if (data.size() != size_)
            throw std::invalid_argument("FftPlan: buffer length does not match plan size");
        for (std::size_t i = 0; i < size_; ++i)
            if (i < reversed_[i])
                std::swap(data[i], data[reversed_[i]]);

        for (std::size_t len = 2; len <= size_; len <<= 1)
        {
            std::size_t half = len / 2;
            std::size_t stride = size_ / len;
            for (std::size_t start = 0; start < size_; start += len)
            {
                for (std::size_t k = 0; k < half; ++k)
                {
                    Complex w = twiddles_[k * stride];
                    if (inverse)
                        w = std::conj(w);
                    Complex a = data[start + k];
                    Complex b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
        }
    }

    std::size_t size_;
    unsigned log2_ = 0;
    std::vector<Complex> twiddles_;
    std::vector<std::size_t> reversed_;
};

/// Least power of two that is >= n (n >= 1).
inline std::size_t next_power_of_two(std::size_t n)
{
    return n <= 1 ? 1 : std::bit_ceil(n);
}

}  // namespace toeplab
