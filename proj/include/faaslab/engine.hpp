#pragma once

#include "faaslab/domain.hpp"
#include "faaslab/scheduler.hpp"
#include "faaslab/types.hpp"
#include "faaslab/workload.hpp"

#include <functional>
#include <span>
#include <vector>

namespace faaslab {

/// One completed request, as written to requests.csv.
struct RequestRecord {
    RequestId request_id = 0;
    FunctionIndex function = 0;
    WorkerIndex worker = 0;
    DecisionVia via = DecisionVia::Random;
    SimTime arrival_us = 0;
    SimTime exec_us = 0;
    SimTime complete_us = 0;
    bool cold_start = false;
    SimTime queued_us = 0; ///< exec - arrival: time spent in the worker queue.

    bool operator==(const RequestRecord&) const = default;
};

enum class SandboxEventKind { Init, WarmHit, EvictTimeout, EvictForced, Queued };

const char* to_string(SandboxEventKind kind);
std::optional<SandboxEventKind> sandbox_event_kind_from_string(const std::string& name);

struct SandboxEventRecord {
    SimTime time_us = 0;
    WorkerIndex worker = 0;
    FunctionIndex function = 0;
    SandboxEventKind kind = SandboxEventKind::Init;

    bool operator==(const SandboxEventRecord&) const = default;
};

/// Everything a run produces. Two runs of the same configuration and seed
/// yield equal logs; equality is the determinism gate.
struct EventLog {
    std::vector<std::string> worker_ids;
    std::vector<std::string> function_ids;
    SimTime duration_us = 0;
    std::vector<RequestRecord> requests; ///< One per completed request, by request id.
    std::vector<SandboxEventRecord> sandbox_events;
    std::vector<std::vector<std::uint32_t>> assignments; ///< [second][worker] assignment counts.
    std::uint64_t arrivals = 0;
    std::uint64_t arrival_checksum = 0; ///< Digest of the (arrival time, function) sequence.
    std::uint64_t vu_draw_checksum = 0; ///< Digest of every virtual-user draw (closed loop).
    std::uint64_t pull_divergences = 0; ///< Pull hits that nevertheless cold-started.

    bool operator==(const EventLog&) const = default;
};

/// Informational wall-clock figures; kept out of the EventLog so they never
/// affect replay comparisons.
struct RunStats {
    double mean_decision_wallclock_ms = 0.0;
    std::uint64_t decisions = 0;
};

/// Test/inspection hooks. `loads` holds each worker's active connections at
/// decision time (before this assignment); `idle_of_function` counts idle
/// instances of the requested function across the cluster at that moment.
struct DecisionProbe {
    std::function<void(const Request&, const SchedulerDecision&, std::span<const int> loads,
                       int idle_of_function)>
        on_decision;
    std::function<void(std::uint32_t vu, char tag, std::uint64_t value)> on_vu_draw;
};

/// Runs the simulation: processes events in (time, insertion-sequence)
/// order until the workload duration elapses and all in-flight requests
/// drain. Throws std::invalid_argument when the configuration or workload
/// fails validation.
EventLog run(const ClusterConfig& config, const WorkloadSpec& workload, RunStats* stats = nullptr,
             const DecisionProbe* probe = nullptr);

/// Re-runs and compares field by field: the determinism gate.
bool replay_check(const EventLog& log, const ClusterConfig& config, const WorkloadSpec& workload);

} // namespace faaslab
