#include "faaslab/cluster.hpp"

#include <algorithm>
#include <stdexcept>

namespace faaslab {

WorkerRuntime::WorkerRuntime(WorkerSpec spec, SimTime t_idle_us) : t_idle_us_(t_idle_us) {
    state_.worker_id = std::move(spec.worker_id);
    state_.cap_mb = spec.cap_mb;
}

Sandbox* WorkerRuntime::find_sandbox(std::uint32_t id) {
    for (Sandbox& sb : state_.sandboxes) {
        if (sb.id == id) {
            return &sb;
        }
    }
    return nullptr;
}

Sandbox* WorkerRuntime::find_idle(FunctionIndex function) {
    Sandbox* best = nullptr;
    for (Sandbox& sb : state_.sandboxes) {
        if (sb.state != SandboxState::Idle || sb.function != function) {
            continue;
        }
        if (!best || sb.last_transition_us > best->last_transition_us ||
            (sb.last_transition_us == best->last_transition_us && sb.id < best->id)) {
            best = &sb;
        }
    }
    return best;
}

int WorkerRuntime::idle_count(FunctionIndex function) const {
    int n = 0;
    for (const Sandbox& sb : state_.sandboxes) {
        if (sb.state == SandboxState::Idle && sb.function == function) {
            ++n;
        }
    }
    return n;
}

void WorkerRuntime::evict(std::uint32_t sandbox_id) {
    auto it = std::find_if(state_.sandboxes.begin(), state_.sandboxes.end(),
                           [sandbox_id](const Sandbox& sb) { return sb.id == sandbox_id; });
    if (it == state_.sandboxes.end()) {
        throw std::logic_error("evict: unknown sandbox");
    }
    state_.usage_mb -= it->mem_mb;
    state_.sandboxes.erase(it);
}

std::vector<ForcedEviction> WorkerRuntime::force_evict(int needed_mb, SimTime now) {
    (void)now;
    std::vector<ForcedEviction> evicted;
    while (free_mb() < needed_mb) {
        Sandbox* lru = nullptr;
        for (Sandbox& sb : state_.sandboxes) {
            if (sb.state != SandboxState::Idle) {
                continue;
            }
            if (!lru || sb.last_transition_us < lru->last_transition_us ||
                (sb.last_transition_us == lru->last_transition_us && sb.id < lru->id)) {
                lru = &sb;
            }
        }
        if (!lru) {
            break; // nothing reclaimable
        }
        evicted.push_back(ForcedEviction{lru->id, lru->function, lru->announced});
        evict(lru->id);
    }
    return evicted;
}

AdmitResult WorkerRuntime::admit(RequestId request, FunctionIndex function, int mem_mb, SimTime now) {
    if (auto start = try_start(request, function, mem_mb, now)) {
        return AdmitResult{start->cold ? AdmitOutcome::StartCold : AdmitOutcome::StartWarm,
                           std::move(*start)};
    }
    state_.pending.push_back(request);
    return AdmitResult{};
}

std::optional<StartInfo> WorkerRuntime::try_start(RequestId request, FunctionIndex function, int mem_mb,
                                                  SimTime now) {
    if (mem_mb > state_.cap_mb) {
        throw std::invalid_argument("try_start: request memory exceeds worker capacity");
    }

    if (Sandbox* idle = find_idle(function)) {
        StartInfo info;
        info.cold = false;
        info.sandbox_id = idle->id;
        info.reused_announced = idle->announced;
        idle->state = SandboxState::Busy;
        idle->last_transition_us = now;
        idle->request_id = request;
        idle->announced = false;
        ++idle->epoch;
        return info;
    }

    if (free_mb() < mem_mb) {
        // Evict only when idle instances can actually make room; otherwise
        // the request queues and the warm instances survive.
        int reclaimable = 0;
        for (const Sandbox& sb : state_.sandboxes) {
            if (sb.state == SandboxState::Idle) {
                reclaimable += sb.mem_mb;
            }
        }
        if (free_mb() + reclaimable < mem_mb) {
            return std::nullopt;
        }
    }

    StartInfo info;
    info.cold = true;
    info.forced_evictions = force_evict(mem_mb, now);

    Sandbox sb;
    sb.id = next_sandbox_id_++;
    sb.function = function;
    sb.mem_mb = mem_mb;
    sb.state = SandboxState::Initializing;
    sb.last_transition_us = now;
    sb.request_id = request;
    state_.sandboxes.push_back(sb);
    state_.usage_mb += mem_mb;
    info.sandbox_id = sb.id;
    return info;
}

void WorkerRuntime::init_done(std::uint32_t sandbox_id, SimTime now) {
    Sandbox* sb = find_sandbox(sandbox_id);
    if (!sb || sb->state != SandboxState::Initializing) {
        throw std::logic_error("init_done: sandbox not initializing");
    }
    sb->state = SandboxState::Busy;
    sb->last_transition_us = now;
    ++sb->epoch;
}

IdleInfo WorkerRuntime::to_idle(Sandbox& sb, SimTime now) {
    sb.state = SandboxState::Idle;
    sb.last_transition_us = now;
    sb.idle_deadline_us = now + t_idle_us_;
    sb.request_id = 0;
    sb.announced = false;
    ++sb.epoch;
    return IdleInfo{sb.id, sb.epoch, sb.idle_deadline_us, sb.function};
}

IdleInfo WorkerRuntime::complete(RequestId request, SimTime now) {
    for (Sandbox& sb : state_.sandboxes) {
        if (sb.state == SandboxState::Busy && sb.request_id == request) {
            return to_idle(sb, now);
        }
    }
    throw std::logic_error("complete: request not executing on this worker");
}

std::optional<FunctionIndex> WorkerRuntime::idle_timeout(std::uint32_t sandbox_id, std::uint32_t epoch,
                                                         SimTime now) {
    (void)now;
    Sandbox* sb = find_sandbox(sandbox_id);
    if (!sb || sb->state != SandboxState::Idle || sb->epoch != epoch) {
        return std::nullopt; // reused or already evicted; the timer is stale
    }
    const FunctionIndex function = sb->function;
    evict(sandbox_id);
    return function;
}

void WorkerRuntime::announce(std::uint32_t sandbox_id) {
    Sandbox* sb = find_sandbox(sandbox_id);
    if (!sb || sb->state != SandboxState::Idle) {
        throw std::logic_error("announce: sandbox not idle");
    }
    sb->announced = true;
}

bool WorkerRuntime::is_idle_epoch(std::uint32_t sandbox_id, std::uint32_t epoch) const {
    for (const Sandbox& sb : state_.sandboxes) {
        if (sb.id == sandbox_id) {
            return sb.state == SandboxState::Idle && sb.epoch == epoch;
        }
    }
    return false;
}

IdleInfo WorkerRuntime::add_prewarmed(FunctionIndex function, int mem_mb, SimTime now) {
    if (free_mb() < mem_mb) {
        throw std::invalid_argument("add_prewarmed: worker capacity exceeded");
    }
    Sandbox sb;
    sb.id = next_sandbox_id_++;
    sb.function = function;
    sb.mem_mb = mem_mb;
    sb.state = SandboxState::Busy; // to_idle finalizes the transition
    state_.sandboxes.push_back(sb);
    state_.usage_mb += mem_mb;
    return to_idle(state_.sandboxes.back(), now);
}

} // namespace faaslab
