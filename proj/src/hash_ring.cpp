#include "faaslab/hash_ring.hpp"

#include <cmath>
#include <stdexcept>

namespace faaslab {

long chbl_bound(double threshold_c, long total_load, std::size_t worker_count) {
    if (worker_count == 0) {
        throw std::invalid_argument("chbl_bound: no workers");
    }
    return static_cast<long>(
        std::ceil(threshold_c * (1.0 + static_cast<double>(total_load)) / static_cast<double>(worker_count)));
}

namespace {

HashRing::PositionFn default_position_fn(std::uint64_t hash_seed) {
    return [hash_seed](std::string_view worker_id, std::uint32_t vnode, std::uint32_t salt) {
        std::uint64_t h = fnv1a64(worker_id);
        h = mix64(h ^ hash_seed);
        h = mix64(h ^ (static_cast<std::uint64_t>(vnode) << 32 | salt));
        return h;
    };
}

HashRing::KeyHashFn default_key_hash_fn(std::uint64_t hash_seed) {
    return [hash_seed](std::string_view key) { return mix64(fnv1a64(key) ^ hash_seed); };
}

} // namespace

HashRing::HashRing(std::uint32_t vnodes_per_worker, std::uint64_t hash_seed)
    : HashRing(vnodes_per_worker, default_position_fn(hash_seed), default_key_hash_fn(hash_seed)) {}

HashRing::HashRing(std::uint32_t vnodes_per_worker, PositionFn position_fn, KeyHashFn key_hash_fn)
    : vnodes_(vnodes_per_worker), position_fn_(std::move(position_fn)), key_hash_fn_(std::move(key_hash_fn)) {
    if (vnodes_ == 0) {
        throw std::invalid_argument("HashRing: vnodes_per_worker must be >= 1");
    }
}

std::uint64_t HashRing::place_point(std::string_view worker_id, std::uint32_t vnode) {
    std::uint32_t salt = 0;
    std::uint64_t pos = position_fn_(worker_id, vnode, salt);
    while (points_.count(pos)) {
        pos = position_fn_(worker_id, vnode, ++salt);
    }
    return pos;
}

void HashRing::add_worker(WorkerIndex worker, std::string_view worker_id) {
    if (contains(worker)) {
        throw std::invalid_argument("HashRing: worker already present");
    }
    std::vector<std::uint64_t>& positions = positions_by_worker_[worker];
    positions.reserve(vnodes_);
    for (std::uint32_t v = 0; v < vnodes_; ++v) {
        const std::uint64_t pos = place_point(worker_id, v);
        points_.emplace(pos, worker);
        positions.push_back(pos);
    }
}

void HashRing::remove_worker(WorkerIndex worker) {
    auto it = positions_by_worker_.find(worker);
    if (it == positions_by_worker_.end()) {
        throw std::invalid_argument("HashRing: unknown worker");
    }
    for (std::uint64_t pos : it->second) {
        points_.erase(pos);
    }
    positions_by_worker_.erase(it);
}

bool HashRing::contains(WorkerIndex worker) const {
    return positions_by_worker_.count(worker) != 0;
}

WorkerIndex HashRing::lookup_at(std::uint64_t position) const {
    if (points_.empty()) {
        throw std::runtime_error("HashRing: lookup on empty ring");
    }
    auto it = points_.lower_bound(position);
    if (it == points_.end()) {
        it = points_.begin(); // clockwise wrap
    }
    return it->second;
}

WorkerIndex HashRing::lookup(std::string_view key) const {
    return lookup_at(key_hash_fn_(key));
}

std::vector<WorkerIndex> HashRing::clockwise_workers(std::string_view key) const {
    if (points_.empty()) {
        throw std::runtime_error("HashRing: lookup on empty ring");
    }
    std::vector<WorkerIndex> order;
    std::vector<bool> seen;
    auto visit = [&](WorkerIndex w) {
        if (w >= seen.size()) {
            seen.resize(w + 1, false);
        }
        if (!seen[w]) {
            seen[w] = true;
            order.push_back(w);
        }
    };

    const std::uint64_t start = key_hash_fn_(key);
    for (auto it = points_.lower_bound(start); it != points_.end(); ++it) {
        visit(it->second);
    }
    for (auto it = points_.begin(); it != points_.lower_bound(start); ++it) {
        visit(it->second);
    }
    return order;
}

WorkerIndex HashRing::bounded_lookup(std::string_view key, const LoadView& loads, double threshold_c) const {
    const std::vector<WorkerIndex> order = clockwise_workers(key);

    long total = 0;
    for (std::size_t w = 0; w < loads.worker_count(); ++w) {
        total += loads.load(static_cast<WorkerIndex>(w));
    }
    const long bound = chbl_bound(threshold_c, total, loads.worker_count());

    for (WorkerIndex w : order) {
        if (loads.load(w) < bound) {
            return w;
        }
    }
    return order.front(); // everyone saturated: fall back to the home worker
}

WorkerIndex HashRing::random_jump_lookup(std::string_view key, const LoadView& loads, double threshold_c,
                                         Rng& rng) const {
    if (points_.empty()) {
        throw std::runtime_error("HashRing: lookup on empty ring");
    }
    const WorkerIndex home = lookup(key);

    long total = 0;
    for (std::size_t w = 0; w < loads.worker_count(); ++w) {
        total += loads.load(static_cast<WorkerIndex>(w));
    }
    const long bound = chbl_bound(threshold_c, total, loads.worker_count());

    if (loads.load(home) < bound) {
        return home;
    }

    std::vector<WorkerIndex> candidates;
    for (const auto& [worker, positions] : positions_by_worker_) {
        if (loads.load(worker) < bound) {
            candidates.push_back(worker);
        }
    }
    if (candidates.empty()) {
        return home;
    }
    return candidates[rng.uniform_index(candidates.size())];
}

} // namespace faaslab
