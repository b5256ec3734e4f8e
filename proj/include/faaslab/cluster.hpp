#pragma once

#include "faaslab/domain.hpp"
#include "faaslab/types.hpp"

#include <optional>
#include <vector>

namespace faaslab {

enum class AdmitOutcome { StartWarm, StartCold, Queued };

struct ForcedEviction {
    std::uint32_t sandbox_id;
    FunctionIndex function;
    bool announced; ///< The scheduler knew about this instance and must be notified.
};

/// Result of successfully starting a request on a worker.
struct StartInfo {
    bool cold = false;
    std::uint32_t sandbox_id = 0;
    bool reused_announced = false; ///< Warm start consumed an instance the scheduler knew about.
    std::vector<ForcedEviction> forced_evictions; ///< Idle instances evicted to make room.
};

/// Outcome of admitting a request. `start` is meaningful for the two start
/// outcomes; Queued means the request joined the worker's FIFO queue.
struct AdmitResult {
    AdmitOutcome outcome = AdmitOutcome::Queued;
    StartInfo start;
};

/// Result of a completion: the sandbox that went idle and its keep-alive
/// deadline. The epoch identifies this idle period; a timer carrying a
/// stale epoch is ignored.
struct IdleInfo {
    std::uint32_t sandbox_id = 0;
    std::uint32_t epoch = 0;
    SimTime idle_deadline_us = 0;
    FunctionIndex function = 0;
};

/// One worker: memory pool, sandbox lifecycle, keep-alive eviction, and the
/// FIFO queue of requests that were admitted but cannot start yet. Driven
/// exclusively by the (single-threaded) engine; methods return the effects
/// the engine must apply (events to schedule, scheduler notifications).
class WorkerRuntime {
public:
    WorkerRuntime(WorkerSpec spec, SimTime t_idle_us);

    /// Admits a request of `function` needing `mem_mb`: a warm start when
    /// an idle instance of the function exists, else a cold start when free
    /// memory suffices (force-evicting idle instances, least recently used
    /// first, when that actually makes room), else the request joins the
    /// pending queue.
    AdmitResult admit(RequestId request, FunctionIndex function, int mem_mb, SimTime now);

    /// The admission attempt without the queueing step: nullopt when the
    /// request cannot start now. Used to re-test the queue head.
    std::optional<StartInfo> try_start(RequestId request, FunctionIndex function, int mem_mb, SimTime now);

    /// Initialization finished: the sandbox starts executing its request.
    void init_done(std::uint32_t sandbox_id, SimTime now);

    /// Execution finished: the request's sandbox goes idle until
    /// now + t_idle. Throws if the request is not executing here.
    IdleInfo complete(RequestId request, SimTime now);

    /// Keep-alive timer fired. Evicts the sandbox and returns its function
    /// if it is still idle in the same epoch; returns nullopt for stale
    /// timers (instance reused or already gone).
    std::optional<FunctionIndex> idle_timeout(std::uint32_t sandbox_id, std::uint32_t epoch, SimTime now);

    /// Evicts idle sandboxes in LRU order until free memory reaches
    /// needed_mb or no idle instances remain.
    std::vector<ForcedEviction> force_evict(int needed_mb, SimTime now);

    /// Installs an idle instance as if an execution had just completed,
    /// used to start scenarios from a prescribed warm state.
    IdleInfo add_prewarmed(FunctionIndex function, int mem_mb, SimTime now);

    bool has_pending() const { return !state_.pending.empty(); }
    RequestId pending_head() const { return state_.pending.front(); }
    void pop_pending() { state_.pending.pop_front(); }

    void add_connection() { ++state_.active_connections; }
    void remove_connection() { --state_.active_connections; }

    /// Marks an idle sandbox as known to the scheduler.
    void announce(std::uint32_t sandbox_id);
    /// True iff the sandbox is still idle in the given epoch.
    bool is_idle_epoch(std::uint32_t sandbox_id, std::uint32_t epoch) const;

    int free_mb() const { return state_.cap_mb - state_.usage_mb; }
    int idle_count(FunctionIndex function) const;
    const WorkerState& state() const { return state_; }

private:
    Sandbox* find_sandbox(std::uint32_t id);
    /// Most-recently-idled instance of the function (ties by lowest id).
    Sandbox* find_idle(FunctionIndex function);
    void evict(std::uint32_t sandbox_id);
    IdleInfo to_idle(Sandbox& sb, SimTime now);

    WorkerState state_;
    SimTime t_idle_us_;
    std::uint32_t next_sandbox_id_ = 0;
};

} // namespace faaslab
