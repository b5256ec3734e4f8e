#pragma once

#include "faaslab/domain.hpp"
#include "faaslab/rng.hpp"
#include "faaslab/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace faaslab {

struct Arrival {
    SimTime t_us = 0;
    FunctionIndex function = 0;
};

struct ThinkTime {
    SimTime lo_us = 100 * kUsPerMs;
    SimTime hi_us = 1000 * kUsPerMs;
};

/// Virtual-user population from start_us onward (until the next stage).
struct VuStage {
    SimTime start_us = 0;
    std::uint32_t vu_count = 0;
};

/// Piecewise-constant open-loop arrival rate.
struct RateSegment {
    SimTime duration_us = 0;
    double req_per_s = 0.0;
};

struct Popularity {
    enum class Kind { UniformAll, Zipf, Explicit };
    Kind kind = Kind::UniformAll;
    double zipf_s = 1.0;          ///< Zipf exponent; weight of rank k is 1/k^s.
    std::vector<double> weights;  ///< Explicit: aligned with catalog order.

    static Popularity uniform() { return {}; }
    static Popularity zipf(double s) { return {Kind::Zipf, s, {}}; }
    static Popularity explicit_weights(std::vector<double> w) { return {Kind::Explicit, 0.0, std::move(w)}; }
};

struct WorkloadSpec {
    enum class Mode { ClosedLoop, OpenLoop, Trace };
    Mode mode = Mode::ClosedLoop;
    SimTime duration_us = 60 * kUsPerSec;
    Popularity popularity;
    std::vector<VuStage> stages; ///< ClosedLoop only.
    ThinkTime think;             ///< ClosedLoop only.
    std::vector<RateSegment> segments; ///< OpenLoop only.
    std::string trace_path;            ///< Trace only.
    std::vector<Arrival> trace;        ///< Trace only; loaded rows.
};

std::vector<std::string> validate_workload(const WorkloadSpec& spec, std::size_t catalog_size);

/// Weighted random function selection. The cumulative table is built once;
/// sampling costs one uniform draw and a binary search.
class FunctionSampler {
public:
    FunctionSampler(const Popularity& popularity, std::size_t catalog_size);

    FunctionIndex sample(Rng& rng) const;
    const std::vector<double>& pmf() const { return pmf_; }

private:
    std::vector<double> pmf_;
    std::vector<double> cdf_;
};

/// Generates the full open-loop arrival sequence: exponential interarrivals
/// within each rate segment, functions drawn from the sampler. Arrivals are
/// truncated at the workload duration.
std::vector<Arrival> open_loop_arrivals(const WorkloadSpec& spec, const FunctionSampler& sampler, Rng& rng);

/// Parses a CSV trace. The header must name the columns `arrival_ms` and
/// `function` (extra columns, such as those in an exported requests.csv,
/// are ignored). Rows must be non-decreasing in arrival time and reference
/// known functions; violations throw with the offending line number.
std::vector<Arrival> load_trace(const std::string& path, std::span<const FunctionProfile> catalog);

/// Closed-loop virtual users. Each VU cycles sleep -> invoke -> await
/// completion; its think times and function choices come from a private
/// stream derived from (seed, vu), so the sequence of draws of any VU is a
/// pure function of the seed, independent of how the cluster behaves.
class VirtualUsers {
public:
    VirtualUsers(const WorkloadSpec& spec, std::uint64_t master_seed);

    std::uint32_t max_vus() const { return max_vus_; }
    std::uint32_t count_at(SimTime t) const;
    std::span<const VuStage> stages() const { return stages_; }

    SimTime draw_think_us(std::uint32_t vu);
    FunctionIndex draw_function(std::uint32_t vu, const FunctionSampler& sampler);

    /// Combined digest of every draw so far; independent of the order in
    /// which different VUs drew, sensitive to each VU's own sequence.
    std::uint64_t draw_checksum() const;

private:
    struct VuState {
        Rng rng;
        std::uint64_t digest = 0xcbf29ce484222325ULL;
    };

    std::vector<VuStage> stages_;
    ThinkTime think_;
    std::uint32_t max_vus_ = 0;
    std::vector<VuState> vus_;
};

} // namespace faaslab
