#pragma once

#include "faaslab/domain.hpp"
#include "faaslab/hash_ring.hpp"
#include "faaslab/rng.hpp"
#include "faaslab/types.hpp"

#include <deque>
#include <memory>
#include <optional>
#include <vector>

namespace faaslab {

/// How a scheduling decision was reached. Emitted into the event log so
/// warm-path and fallback-path behavior can be told apart after the fact.
enum class DecisionVia { PullHit, Fallback, HashHome, HashForwarded, LeastConn, Random };

const char* to_string(DecisionVia via);
std::optional<DecisionVia> decision_via_from_string(const std::string& name);

struct SchedulerDecision {
    WorkerIndex worker = 0;
    DecisionVia via = DecisionVia::Random;
    bool expects_warm = false; ///< True iff a matching idle instance was claimed.
};

/// Per-function-type queue of workers holding idle instances, one entry per
/// instance. Claiming returns the entry whose worker currently has the
/// fewest active connections; ties go to the earliest-enqueued entry.
class IdleQueue {
public:
    void enqueue(WorkerIndex worker);

    /// Removes and returns the minimum-load entry, or nullopt if empty.
    std::optional<WorkerIndex> claim(const LoadView& loads);

    /// Removes the first (earliest-enqueued) occurrence of the worker.
    /// A miss is a silent no-op; eviction notifications for instances the
    /// scheduler never saw are tolerated.
    void remove_first(WorkerIndex worker);

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    std::size_t count(WorkerIndex worker) const;

private:
    struct Entry {
        WorkerIndex worker;
        std::uint64_t seq;
    };
    std::deque<Entry> entries_;
    std::uint64_t next_seq_ = 0;
};

/// Scheduler interface. The engine calls the three operations serially in
/// event order; implementations keep whatever state they need and receive
/// every completion and eviction notification.
class Scheduler {
public:
    virtual ~Scheduler() = default;

    virtual SchedulerDecision schedule(FunctionIndex function, const LoadView& loads) = 0;
    virtual void on_complete(WorkerIndex worker, FunctionIndex function) { (void)worker, (void)function; }
    virtual void on_evict(WorkerIndex worker, FunctionIndex function) { (void)worker, (void)function; }
};

/// Pull-based scheduling: workers enqueue in the idle queue of their last
/// executed function type; requests claim the least-loaded enqueued worker,
/// falling back to least-connections (seeded random among ties) when the
/// queue is empty.
class PullScheduler final : public Scheduler {
public:
    PullScheduler(std::size_t function_count, std::uint64_t master_seed);

    SchedulerDecision schedule(FunctionIndex function, const LoadView& loads) override;
    void on_complete(WorkerIndex worker, FunctionIndex function) override;
    void on_evict(WorkerIndex worker, FunctionIndex function) override;

    std::size_t idle_entries(FunctionIndex function) const { return queues_[function].size(); }
    std::size_t total_idle_entries() const;

private:
    std::vector<IdleQueue> queues_;
    Rng fallback_rng_;
};

class LeastConnScheduler final : public Scheduler {
public:
    explicit LeastConnScheduler(std::uint64_t master_seed);
    SchedulerDecision schedule(FunctionIndex function, const LoadView& loads) override;

private:
    Rng tie_rng_;
};

class RandomScheduler final : public Scheduler {
public:
    explicit RandomScheduler(std::uint64_t master_seed);
    SchedulerDecision schedule(FunctionIndex function, const LoadView& loads) override;

private:
    Rng rng_;
};

/// The three hash-based baselines share one ring; `mode` picks the lookup.
class HashScheduler final : public Scheduler {
public:
    enum class Mode { Plain, BoundedLoads, RandomJump };

    HashScheduler(Mode mode, const ClusterConfig& config);

    SchedulerDecision schedule(FunctionIndex function, const LoadView& loads) override;

    const HashRing& ring() const { return ring_; }

private:
    Mode mode_;
    double threshold_c_;
    std::vector<std::string> function_ids_;
    HashRing ring_;
    Rng jump_rng_;
};

/// Least-connections selection shared by the pull fallback and the
/// least-connections baseline: minimum active connections, seeded-uniform
/// choice among ties (ordered by worker index).
WorkerIndex least_connections_pick(const LoadView& loads, Rng& rng);

std::unique_ptr<Scheduler> make_scheduler(const ClusterConfig& config);

} // namespace faaslab
