#pragma once

#include "faaslab/rng.hpp"
#include "faaslab/types.hpp"

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace faaslab {

/// Execution-time distribution of a warm invocation, in milliseconds.
struct ExecDist {
    enum class Kind { Constant, Uniform, Lognormal };
    Kind kind = Kind::Constant;
    double a = 0.0; ///< Constant: value. Uniform: lo. Lognormal: median.
    double b = 0.0; ///< Uniform: hi. Lognormal: sigma.

    static ExecDist constant(double ms) { return {Kind::Constant, ms, 0.0}; }
    static ExecDist uniform(double lo_ms, double hi_ms) { return {Kind::Uniform, lo_ms, hi_ms}; }
    static ExecDist lognormal(double median_ms, double sigma) { return {Kind::Lognormal, median_ms, sigma}; }
};

/// Samples a warm execution time. Always at least one microsecond.
SimTime sample_exec_us(const ExecDist& dist, Rng& rng);

/// One function type in the catalog.
struct FunctionProfile {
    std::string function_id;
    double cold_start_ms = 0.0; ///< Initialization time added on a cold start.
    ExecDist warm_exec;
    int mem_mb = 0; ///< Memory footprint of one instance.
};

struct WorkerSpec {
    std::string worker_id;
    int cap_mb = 0;
};

enum class SchedulerKind { Pull, CH, CHBL, RJCH, LeastConn, Random };

const char* to_string(SchedulerKind kind);
std::optional<SchedulerKind> scheduler_kind_from_string(const std::string& name);

struct SchedulerParams {
    std::uint32_t vnodes = 100;  ///< Virtual nodes per worker on the hash ring.
    double threshold_c = 1.25;   ///< CH-BL / RJ-CH load threshold.
    std::uint64_t hash_seed = 0; ///< Salt for the ring hash function.
};

/// Instances present (idle) on a worker before the first arrival, as if a
/// previous execution of each listed function had just completed at t = 0.
/// Lets canned scenarios start from a prescribed warm state.
struct PrewarmEntry {
    std::string worker_id;
    std::vector<std::string> functions;
};

struct ClusterConfig {
    std::vector<WorkerSpec> workers;
    std::vector<FunctionProfile> catalog;
    SimTime t_idle_us = 60'000 * kUsPerMs; ///< Keep-alive duration.
    SchedulerKind scheduler_kind = SchedulerKind::Pull;
    SchedulerParams scheduler_params;
    std::uint64_t seed = 1;
    std::vector<PrewarmEntry> prewarm;

    std::optional<FunctionIndex> function_index(const std::string& id) const;
    std::optional<WorkerIndex> worker_index(const std::string& id) const;
};

/// Checks every structural invariant of the configuration. Returns one
/// human-readable description per violation; an empty list means valid.
std::vector<std::string> validate_config(const ClusterConfig& config);

/// One invocation. Optional fields are set when execution starts
/// (assigned_worker, cold_start, t_exec_us) and when it finishes
/// (t_complete_us).
struct Request {
    RequestId request_id = 0;
    FunctionIndex function = 0;
    int mem_mb = 0;
    SimTime t_arrival_us = 0;
    std::optional<SimTime> t_exec_us;
    std::optional<SimTime> t_complete_us;
    std::optional<WorkerIndex> assigned_worker;
    std::optional<bool> cold_start;
};

enum class SandboxState { Initializing, Idle, Busy };

/// One function instance on a worker. The "available" state is represented
/// by the sandbox's absence.
struct Sandbox {
    std::uint32_t id = 0;
    FunctionIndex function = 0;
    int mem_mb = 0;
    SandboxState state = SandboxState::Initializing;
    SimTime last_transition_us = 0;
    SimTime idle_deadline_us = 0; ///< Valid while Idle.
    std::uint32_t epoch = 0;      ///< Bumped on every transition; stale timers check it.
    RequestId request_id = 0;     ///< Valid while Initializing or Busy.
    bool announced = false;       ///< The scheduler has been told this instance is idle.
};

struct WorkerState {
    std::string worker_id;
    int cap_mb = 0;
    int usage_mb = 0;           ///< Sum of mem_mb over live sandboxes.
    int active_connections = 0; ///< Requests assigned here and not yet completed.
    std::vector<Sandbox> sandboxes;
    std::deque<RequestId> pending; ///< Admitted but not yet executing, FIFO.
};

/// The default catalog: the eight FunctionBench applications with their
/// measured cold/warm latencies, replicated `copies` times with unique
/// names ("chameleon-1", ...). Warm times are lognormal around the measured
/// value with the given sigma; sigma 0 selects constant warm times.
std::vector<FunctionProfile> default_catalog(int copies = 5, double sigma = 0.3, int mem_mb = 512);

} // namespace faaslab
