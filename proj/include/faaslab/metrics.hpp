#pragma once

#include "faaslab/engine.hpp"
#include "faaslab/types.hpp"
#include "faaslab/workload.hpp"

#include <span>
#include <utility>
#include <vector>

namespace faaslab {

struct LatencyStats {
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p90_ms = 0.0;
    double p95_ms = 0.0;
    double p99_ms = 0.0;
    /// (latency_ms, cumulative fraction), sorted by latency.
    std::vector<std::pair<double, double>> cdf;
};

/// Nearest-rank percentile: the ceil(p*n)-th order statistic, 1-based.
/// `sorted` must be ascending and nonempty; p in (0, 1].
double nearest_rank(std::span<const double> sorted, double p);

/// Latency is t_complete - t_arrival. Throws std::invalid_argument when the
/// log has no completed requests.
LatencyStats latency_stats(const EventLog& log);

/// Fraction of completed requests that cold-started. Throws on an empty log.
double cold_start_rate(const EventLog& log);

/// Per-second coefficient of variation of assignments across workers
/// (population standard deviation / mean), averaged over the seconds in
/// which anything was assigned. Throws if nothing was ever assigned.
double load_imbalance_cv(const EventLog& log);

struct StageBounds {
    SimTime start_us = 0;
    SimTime end_us = 0;
};

struct ThroughputStats {
    std::uint64_t total_completed = 0; ///< Completions within the stage windows.
    std::vector<double> rps_by_stage;
};

ThroughputStats throughput(const EventLog& log, std::span<const StageBounds> stages);

/// Stage windows for a workload: one window per VU stage in closed-loop
/// mode, a single whole-run window otherwise.
std::vector<StageBounds> stage_bounds_for(const WorkloadSpec& workload);

struct MetricsSummary {
    double mean_latency_ms = 0.0;
    double p50_ms = 0.0;
    double p90_ms = 0.0;
    double p95_ms = 0.0;
    double p99_ms = 0.0;
    double cold_start_rate = 0.0;
    std::uint64_t throughput_total = 0;
    std::vector<double> throughput_rps_by_stage;
    double load_cv = 0.0;
    std::vector<std::uint64_t> per_worker_counts;
    double scheduling_overhead_ms = 0.0; ///< Mean wall-clock decision time; informational.
};

MetricsSummary summarize(const EventLog& log, std::span<const StageBounds> stages,
                         double scheduling_overhead_ms = 0.0);

} // namespace faaslab
