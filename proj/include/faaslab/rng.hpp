#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace faaslab {

/// 64-bit FNV-1a. Stable across platforms; used for hash-ring positions and
/// for deriving named RNG streams.
std::uint64_t fnv1a64(std::string_view bytes);

/// SplitMix64 finalizer. FNV alone has weak avalanche in the low bits, which
/// matters for ring positions and stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic random source. Wraps std::mt19937_64 (whose output sequence
/// the standard fully specifies) and hand-rolls every sampling routine so
/// that results do not depend on the standard library's distribution
/// implementations. Identical seeds yield identical draw sequences on every
/// platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform over [0, n), n > 0. Rejection sampling; no modulo bias.
    std::uint64_t uniform_u64(std::uint64_t n);

    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(uniform_u64(n));
    }

    /// Uniform over [lo, hi], inclusive.
    std::int64_t uniform_i64(std::int64_t lo, std::int64_t hi);

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform_real(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Standard normal via Box-Muller (two draws per sample, none cached).
    double normal();

    /// Exponential with the given mean (> 0).
    double exponential(double mean);

    /// Lognormal parameterized by median and log-space sigma.
    double lognormal(double median, double sigma);

private:
    std::mt19937_64 engine_;
};

/// Derives an independent named stream from a master seed. Streams with
/// different names (or indices) never share state, so adding draws to one
/// consumer does not perturb the others.
Rng derive_stream(std::uint64_t master_seed, std::string_view name, std::uint64_t index = 0);

} // namespace faaslab
