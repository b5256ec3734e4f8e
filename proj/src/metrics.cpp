#include "faaslab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace faaslab {

double nearest_rank(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw std::invalid_argument("nearest_rank: empty sample");
    }
    if (!(p > 0.0) || p > 1.0) {
        throw std::invalid_argument("nearest_rank: p must be in (0, 1]");
    }
    const std::size_t rank =
        static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
    return sorted[std::max<std::size_t>(rank, 1) - 1];
}

LatencyStats latency_stats(const EventLog& log) {
    if (log.requests.empty()) {
        throw std::invalid_argument("latency_stats: no completed requests");
    }

    std::vector<double> latencies;
    latencies.reserve(log.requests.size());
    double sum = 0.0;
    for (const RequestRecord& r : log.requests) {
        const double ms = static_cast<double>(r.complete_us - r.arrival_us) / 1000.0;
        latencies.push_back(ms);
        sum += ms;
    }
    std::sort(latencies.begin(), latencies.end());

    LatencyStats stats;
    stats.mean_ms = sum / static_cast<double>(latencies.size());
    stats.p50_ms = nearest_rank(latencies, 0.50);
    stats.p90_ms = nearest_rank(latencies, 0.90);
    stats.p95_ms = nearest_rank(latencies, 0.95);
    stats.p99_ms = nearest_rank(latencies, 0.99);
    stats.cdf.reserve(latencies.size());
    const double n = static_cast<double>(latencies.size());
    for (std::size_t i = 0; i < latencies.size(); ++i) {
        stats.cdf.emplace_back(latencies[i], static_cast<double>(i + 1) / n);
    }
    return stats;
}

double cold_start_rate(const EventLog& log) {
    if (log.requests.empty()) {
        throw std::invalid_argument("cold_start_rate: no completed requests");
    }
    std::uint64_t cold = 0;
    for (const RequestRecord& r : log.requests) {
        cold += r.cold_start ? 1 : 0;
    }
    return static_cast<double>(cold) / static_cast<double>(log.requests.size());
}

double load_imbalance_cv(const EventLog& log) {
    if (log.assignments.empty() || log.assignments.front().empty()) {
        throw std::invalid_argument("load_imbalance_cv: no assignment matrix");
    }

    const double workers = static_cast<double>(log.assignments.front().size());
    double cv_sum = 0.0;
    std::size_t active_seconds = 0;
    for (const auto& counts : log.assignments) {
        std::uint64_t total = 0;
        for (std::uint32_t c : counts) {
            total += c;
        }
        if (total == 0) {
            continue; // idle second
        }
        const double mean = static_cast<double>(total) / workers;
        double var = 0.0;
        for (std::uint32_t c : counts) {
            const double d = static_cast<double>(c) - mean;
            var += d * d;
        }
        var /= workers; // population variance: the worker set is the whole population
        cv_sum += std::sqrt(var) / mean;
        ++active_seconds;
    }
    if (active_seconds == 0) {
        throw std::invalid_argument("load_imbalance_cv: nothing was ever assigned");
    }
    return cv_sum / static_cast<double>(active_seconds);
}

ThroughputStats throughput(const EventLog& log, std::span<const StageBounds> stages) {
    ThroughputStats stats;
    stats.rps_by_stage.assign(stages.size(), 0.0);
    for (std::size_t i = 0; i < stages.size(); ++i) {
        std::uint64_t completed = 0;
        for (const RequestRecord& r : log.requests) {
            if (r.complete_us >= stages[i].start_us && r.complete_us < stages[i].end_us) {
                ++completed;
            }
        }
        stats.total_completed += completed;
        const double seconds =
            static_cast<double>(stages[i].end_us - stages[i].start_us) / static_cast<double>(kUsPerSec);
        stats.rps_by_stage[i] = seconds > 0.0 ? static_cast<double>(completed) / seconds : 0.0;
    }
    return stats;
}

std::vector<StageBounds> stage_bounds_for(const WorkloadSpec& workload) {
    std::vector<StageBounds> bounds;
    if (workload.mode == WorkloadSpec::Mode::ClosedLoop && !workload.stages.empty()) {
        for (std::size_t i = 0; i < workload.stages.size(); ++i) {
            const SimTime start = workload.stages[i].start_us;
            const SimTime end =
                i + 1 < workload.stages.size() ? workload.stages[i + 1].start_us : workload.duration_us;
            bounds.push_back(StageBounds{start, end});
        }
    } else {
        bounds.push_back(StageBounds{0, workload.duration_us});
    }
    return bounds;
}

MetricsSummary summarize(const EventLog& log, std::span<const StageBounds> stages,
                         double scheduling_overhead_ms) {
    MetricsSummary summary;
    const LatencyStats lat = latency_stats(log);
    summary.mean_latency_ms = lat.mean_ms;
    summary.p50_ms = lat.p50_ms;
    summary.p90_ms = lat.p90_ms;
    summary.p95_ms = lat.p95_ms;
    summary.p99_ms = lat.p99_ms;
    summary.cold_start_rate = cold_start_rate(log);
    const ThroughputStats tp = throughput(log, stages);
    summary.throughput_total = tp.total_completed;
    summary.throughput_rps_by_stage = tp.rps_by_stage;
    summary.load_cv = load_imbalance_cv(log);
    summary.per_worker_counts.assign(log.worker_ids.size(), 0);
    for (const RequestRecord& r : log.requests) {
        summary.per_worker_counts[r.worker] += 1;
    }
    summary.scheduling_overhead_ms = scheduling_overhead_ms;
    return summary;
}

} // namespace faaslab
