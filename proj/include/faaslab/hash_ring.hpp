#pragma once

#include "faaslab/rng.hpp"
#include "faaslab/types.hpp"

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace faaslab {

/// Read access to per-worker load, as seen by the bounded lookups. Load is
/// the number of active connections (requests assigned and not completed).
class LoadView {
public:
    virtual ~LoadView() = default;
    virtual std::size_t worker_count() const = 0;
    virtual int load(WorkerIndex worker) const = 0;
};

/// LoadView over a plain array, for lookups outside a running simulation.
class SpanLoadView final : public LoadView {
public:
    explicit SpanLoadView(std::span<const int> loads) : loads_(loads) {}
    std::size_t worker_count() const override { return loads_.size(); }
    int load(WorkerIndex worker) const override { return loads_[worker]; }

private:
    std::span<const int> loads_;
};

/// CH-BL capacity bound: ceil(c * (1 + total_load) / worker_count).
long chbl_bound(double threshold_c, long total_load, std::size_t worker_count);

/// Consistent hash ring over worker indices.
///
/// Workers occupy `vnodes` pseudo-random positions each (derived from the
/// worker's name, the virtual-node number, and a hash seed); keys map to the
/// worker owning the first position at or clockwise-after the key's hash.
/// Position collisions are resolved by rehashing with a salt counter, so
/// positions are always unique.
///
/// Tests may inject tabulated positions via a custom position function; the
/// key hash is overridable the same way.
class HashRing {
public:
    /// Returns the ring position of virtual node `vnode` (with collision
    /// salt `salt`) for the named worker.
    using PositionFn =
        std::function<std::uint64_t(std::string_view worker_id, std::uint32_t vnode, std::uint32_t salt)>;
    using KeyHashFn = std::function<std::uint64_t(std::string_view key)>;

    HashRing(std::uint32_t vnodes_per_worker, std::uint64_t hash_seed);
    HashRing(std::uint32_t vnodes_per_worker, PositionFn position_fn, KeyHashFn key_hash_fn);

    void add_worker(WorkerIndex worker, std::string_view worker_id);
    void remove_worker(WorkerIndex worker);

    bool contains(WorkerIndex worker) const;
    std::size_t worker_count() const { return positions_by_worker_.size(); }
    std::size_t point_count() const { return points_.size(); }
    std::uint32_t vnodes_per_worker() const { return vnodes_; }

    /// Plain consistent-hash lookup: the worker owning the first ring point
    /// at or clockwise-after hash(key). Throws std::runtime_error on an
    /// empty ring.
    WorkerIndex lookup(std::string_view key) const;

    /// Successor lookup from an explicit ring position.
    WorkerIndex lookup_at(std::uint64_t position) const;

    /// Bounded-loads lookup: the home worker if its load is under the CH-BL
    /// bound, else the first clockwise successor worker under the bound. If
    /// every worker is at the bound, returns the home worker so that the
    /// caller can still assign (worker-side queueing absorbs the overload).
    WorkerIndex bounded_lookup(std::string_view key, const LoadView& loads, double threshold_c) const;

    /// Random-jump lookup: the home worker if under the bound, else a
    /// uniformly random worker among all workers under the bound; the home
    /// worker if none is.
    WorkerIndex random_jump_lookup(std::string_view key, const LoadView& loads, double threshold_c,
                                   Rng& rng) const;

    /// Distinct workers in clockwise order starting at the owner of
    /// hash(key). Exposed for property tests.
    std::vector<WorkerIndex> clockwise_workers(std::string_view key) const;

private:
    std::uint64_t place_point(std::string_view worker_id, std::uint32_t vnode);

    std::uint32_t vnodes_;
    PositionFn position_fn_;
    KeyHashFn key_hash_fn_;
    std::map<std::uint64_t, WorkerIndex> points_;
    std::map<WorkerIndex, std::vector<std::uint64_t>> positions_by_worker_;
};

} // namespace faaslab
