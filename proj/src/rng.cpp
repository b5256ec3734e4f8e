#include "faaslab/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace faaslab {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t Rng::uniform_u64(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("uniform_u64: empty range");
    }
    if (n == 1) {
        return 0; // singleton choice consumes no randomness
    }
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

std::int64_t Rng::uniform_i64(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) {
        throw std::invalid_argument("uniform_i64: lo > hi");
    }
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) { // full 64-bit range
        return static_cast<std::int64_t>(next_u64());
    }
    return lo + static_cast<std::int64_t>(uniform_u64(span));
}

double Rng::normal() {
    // u1 in (0, 1] so the log argument is never zero.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential(double mean) {
    return -mean * std::log(1.0 - uniform01());
}

double Rng::lognormal(double median, double sigma) {
    return median * std::exp(sigma * normal());
}

Rng derive_stream(std::uint64_t master_seed, std::string_view name, std::uint64_t index) {
    std::uint64_t s = mix64(master_seed ^ fnv1a64(name));
    s = mix64(s ^ (index * 0x9e3779b97f4a7c15ULL + 1));
    return Rng(s);
}

} // namespace faaslab
