#include "faaslab/scheduler.hpp"

#include <limits>
#include <stdexcept>

namespace faaslab {

const char* to_string(DecisionVia via) {
    switch (via) {
    case DecisionVia::PullHit: return "pull_hit";
    case DecisionVia::Fallback: return "fallback";
    case DecisionVia::HashHome: return "hash_home";
    case DecisionVia::HashForwarded: return "hash_forwarded";
    case DecisionVia::LeastConn: return "least_conn";
    case DecisionVia::Random: return "random";
    }
    return "?";
}

std::optional<DecisionVia> decision_via_from_string(const std::string& name) {
    for (DecisionVia v : {DecisionVia::PullHit, DecisionVia::Fallback, DecisionVia::HashHome,
                          DecisionVia::HashForwarded, DecisionVia::LeastConn, DecisionVia::Random}) {
        if (name == to_string(v)) {
            return v;
        }
    }
    return std::nullopt;
}

void IdleQueue::enqueue(WorkerIndex worker) {
    entries_.push_back(Entry{worker, next_seq_++});
}

std::optional<WorkerIndex> IdleQueue::claim(const LoadView& loads) {
    if (entries_.empty()) {
        return std::nullopt;
    }
    // Loads change on every assignment, so the queue is scanned against live
    // values instead of keeping a heap ordered by stale ones.
    std::size_t best = 0;
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        const int li = loads.load(entries_[i].worker);
        const int lb = loads.load(entries_[best].worker);
        if (li < lb || (li == lb && entries_[i].seq < entries_[best].seq)) {
            best = i;
        }
    }
    const WorkerIndex worker = entries_[best].worker;
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(best));
    return worker;
}

void IdleQueue::remove_first(WorkerIndex worker) {
    std::size_t found = entries_.size();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].worker == worker &&
            (found == entries_.size() || entries_[i].seq < entries_[found].seq)) {
            found = i;
        }
    }
    if (found != entries_.size()) {
        entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(found));
    }
}

std::size_t IdleQueue::count(WorkerIndex worker) const {
    std::size_t n = 0;
    for (const Entry& e : entries_) {
        if (e.worker == worker) {
            ++n;
        }
    }
    return n;
}

WorkerIndex least_connections_pick(const LoadView& loads, Rng& rng) {
    const std::size_t n = loads.worker_count();
    if (n == 0) {
        throw std::runtime_error("schedule: no workers");
    }
    int min_load = std::numeric_limits<int>::max();
    for (std::size_t w = 0; w < n; ++w) {
        min_load = std::min(min_load, loads.load(static_cast<WorkerIndex>(w)));
    }
    std::vector<WorkerIndex> tied;
    for (std::size_t w = 0; w < n; ++w) {
        if (loads.load(static_cast<WorkerIndex>(w)) == min_load) {
            tied.push_back(static_cast<WorkerIndex>(w));
        }
    }
    return tied[rng.uniform_index(tied.size())];
}

PullScheduler::PullScheduler(std::size_t function_count, std::uint64_t master_seed)
    : queues_(function_count), fallback_rng_(derive_stream(master_seed, "fallback")) {}

SchedulerDecision PullScheduler::schedule(FunctionIndex function, const LoadView& loads) {
    if (loads.worker_count() == 0) {
        throw std::runtime_error("schedule: no workers");
    }
    if (auto claimed = queues_[function].claim(loads)) {
        return SchedulerDecision{*claimed, DecisionVia::PullHit, true};
    }
    return SchedulerDecision{least_connections_pick(loads, fallback_rng_), DecisionVia::Fallback, false};
}

void PullScheduler::on_complete(WorkerIndex worker, FunctionIndex function) {
    queues_[function].enqueue(worker);
}

void PullScheduler::on_evict(WorkerIndex worker, FunctionIndex function) {
    queues_[function].remove_first(worker);
}

std::size_t PullScheduler::total_idle_entries() const {
    std::size_t total = 0;
    for (const IdleQueue& q : queues_) {
        total += q.size();
    }
    return total;
}

LeastConnScheduler::LeastConnScheduler(std::uint64_t master_seed)
    : tie_rng_(derive_stream(master_seed, "fallback")) {}

SchedulerDecision LeastConnScheduler::schedule(FunctionIndex /*function*/, const LoadView& loads) {
    return SchedulerDecision{least_connections_pick(loads, tie_rng_), DecisionVia::LeastConn, false};
}

RandomScheduler::RandomScheduler(std::uint64_t master_seed)
    : rng_(derive_stream(master_seed, "fallback")) {}

SchedulerDecision RandomScheduler::schedule(FunctionIndex /*function*/, const LoadView& loads) {
    const std::size_t n = loads.worker_count();
    if (n == 0) {
        throw std::runtime_error("schedule: no workers");
    }
    return SchedulerDecision{static_cast<WorkerIndex>(rng_.uniform_index(n)), DecisionVia::Random, false};
}

HashScheduler::HashScheduler(Mode mode, const ClusterConfig& config)
    : mode_(mode),
      threshold_c_(config.scheduler_params.threshold_c),
      ring_(config.scheduler_params.vnodes, config.scheduler_params.hash_seed),
      jump_rng_(derive_stream(config.seed, "rjch")) {
    function_ids_.reserve(config.catalog.size());
    for (const auto& f : config.catalog) {
        function_ids_.push_back(f.function_id);
    }
    for (std::size_t w = 0; w < config.workers.size(); ++w) {
        ring_.add_worker(static_cast<WorkerIndex>(w), config.workers[w].worker_id);
    }
}

SchedulerDecision HashScheduler::schedule(FunctionIndex function, const LoadView& loads) {
    const std::string& key = function_ids_[function];
    const WorkerIndex home = ring_.lookup(key);

    WorkerIndex chosen = home;
    switch (mode_) {
    case Mode::Plain:
        break;
    case Mode::BoundedLoads:
        chosen = ring_.bounded_lookup(key, loads, threshold_c_);
        break;
    case Mode::RandomJump:
        chosen = ring_.random_jump_lookup(key, loads, threshold_c_, jump_rng_);
        break;
    }
    return SchedulerDecision{chosen, chosen == home ? DecisionVia::HashHome : DecisionVia::HashForwarded, false};
}

std::unique_ptr<Scheduler> make_scheduler(const ClusterConfig& config) {
    switch (config.scheduler_kind) {
    case SchedulerKind::Pull:
        return std::make_unique<PullScheduler>(config.catalog.size(), config.seed);
    case SchedulerKind::CH:
        return std::make_unique<HashScheduler>(HashScheduler::Mode::Plain, config);
    case SchedulerKind::CHBL:
        return std::make_unique<HashScheduler>(HashScheduler::Mode::BoundedLoads, config);
    case SchedulerKind::RJCH:
        return std::make_unique<HashScheduler>(HashScheduler::Mode::RandomJump, config);
    case SchedulerKind::LeastConn:
        return std::make_unique<LeastConnScheduler>(config.seed);
    case SchedulerKind::Random:
        return std::make_unique<RandomScheduler>(config.seed);
    }
    throw std::invalid_argument("unknown scheduler kind");
}

} // namespace faaslab
