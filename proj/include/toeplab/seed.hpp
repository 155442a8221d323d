#pragma once

#include <cstdint>

namespace toeplab {

/// splitmix64 finalizer: a bijective 64-bit avalanche mix.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based key: mixes each word in sequence so that every input bit
/// affects every output bit.
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    return splitmix64(splitmix64(a) ^ b);
}

constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
    return splitmix64(mix_seed(a, b) ^ c);
}

constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d)
{
    return splitmix64(mix_seed(a, b, c) ^ d);
}

/// Uniform double in the open interval (0, 1) from 53 high bits.
constexpr double to_open_unit(std::uint64_t bits)
{
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace toeplab
