#pragma once

#include <cmath>
#include <cstdint>

namespace gms {

// Counter-based Gaussian generator. Every draw is a pure function of
// (seed, stream, n, k, component), so refinement order and thread
// scheduling cannot change the sampled numbers.

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

/// Uniform in (0,1), never exactly 0 or 1.
inline double to_unit(std::uint64_t u) {
    return (double(u >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

/// Standard normal draw for coefficient component `comp` of node (n,k).
inline double normal_draw(std::uint64_t seed, std::uint64_t stream,
                          int n, int k, int comp) {
    std::uint64_t key = detail::mix(seed, stream);
    key = detail::mix(key, (std::uint64_t(std::uint32_t(n)) << 32) | std::uint32_t(k));
    key = detail::mix(key, std::uint64_t(comp));
    const double u1 = detail::to_unit(detail::splitmix64(key));
    const double u2 = detail::to_unit(detail::splitmix64(key + 0x632be59bd9b4e019ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace gms
