#include "faaslab/engine.hpp"

#include "faaslab/cluster.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <queue>
#include <stdexcept>

namespace faaslab {

const char* to_string(SandboxEventKind kind) {
    switch (kind) {
    case SandboxEventKind::Init: return "init";
    case SandboxEventKind::WarmHit: return "warm_hit";
    case SandboxEventKind::EvictTimeout: return "evict_timeout";
    case SandboxEventKind::EvictForced: return "evict_forced";
    case SandboxEventKind::Queued: return "queued";
    }
    return "?";
}

std::optional<SandboxEventKind> sandbox_event_kind_from_string(const std::string& name) {
    for (SandboxEventKind k : {SandboxEventKind::Init, SandboxEventKind::WarmHit,
                               SandboxEventKind::EvictTimeout, SandboxEventKind::EvictForced,
                               SandboxEventKind::Queued}) {
        if (name == to_string(k)) {
            return k;
        }
    }
    return std::nullopt;
}

namespace {

constexpr std::uint32_t kNoVu = UINT32_MAX;

struct Event {
    SimTime time = 0;
    std::uint64_t seq = 0;
    enum class Kind { Arrival, InitDone, ExecDone, IdleTimeout, VuStageStart, VuWake } kind;
    RequestId request = 0;
    WorkerIndex worker = 0;
    std::uint32_t sandbox = 0;
    std::uint32_t epoch = 0;
    std::uint32_t vu = kNoVu;
    FunctionIndex function = 0;
    std::uint32_t stage = 0;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) {
            return a.time > b.time;
        }
        return a.seq > b.seq;
    }
};

struct LiveRequest {
    FunctionIndex function = 0;
    std::uint32_t vu = kNoVu;
    SimTime arrival_us = 0;
    WorkerIndex worker = 0;
    DecisionVia via = DecisionVia::Random;
    SimTime exec_us = 0;
    SimTime warm_us = 0;
    bool cold = false;
};

class Engine final : public LoadView {
public:
    Engine(const ClusterConfig& config, const WorkloadSpec& workload, RunStats* stats,
           const DecisionProbe* probe)
        : config_(config), workload_(workload), stats_(stats), probe_(probe) {}

    EventLog run();

    // LoadView
    std::size_t worker_count() const override { return workers_.size(); }
    int load(WorkerIndex worker) const override { return workers_[worker].state().active_connections; }

private:
    enum class VuPhase { Parked, Sleeping, InFlight };

    void push(Event ev) {
        ev.seq = next_seq_++;
        heap_.push(ev);
    }

    SimTime cold_us(FunctionIndex f) const { return us_from_ms(config_.catalog[f].cold_start_ms); }
    int mem_mb(FunctionIndex f) const { return config_.catalog[f].mem_mb; }

    void emit(SimTime now, WorkerIndex w, FunctionIndex f, SandboxEventKind kind) {
        log_.sandbox_events.push_back(SandboxEventRecord{now, w, f, kind});
    }

    void setup();
    void handle_arrival(FunctionIndex function, SimTime now, std::uint32_t vu);
    void start_or_queue(WorkerIndex worker, RequestId id, SimTime now);
    void apply_start(WorkerIndex worker, RequestId id, const StartInfo& start, SimTime now, bool from_queue);
    void drain_pending(WorkerIndex worker, SimTime now);
    void handle_exec_done(WorkerIndex worker, RequestId id, SimTime now);
    void handle_idle_timeout(WorkerIndex worker, std::uint32_t sandbox, std::uint32_t epoch, SimTime now);
    void handle_stage_start(std::uint32_t stage, SimTime now);
    void handle_vu_wake(std::uint32_t vu, SimTime now);
    void schedule_vu_cycle(std::uint32_t vu, SimTime now);

    const ClusterConfig& config_;
    const WorkloadSpec& workload_;
    RunStats* stats_;
    const DecisionProbe* probe_;

    std::vector<WorkerRuntime> workers_;
    std::unique_ptr<Scheduler> scheduler_;
    std::optional<FunctionSampler> sampler_;
    std::optional<VirtualUsers> vus_;
    std::vector<VuPhase> vu_phase_;

    std::priority_queue<Event, std::vector<Event>, EventAfter> heap_;
    std::uint64_t next_seq_ = 0;
    std::vector<LiveRequest> live_;
    EventLog log_;

    std::uint64_t in_flight_ = 0;
    std::uint64_t sleeping_vus_ = 0;
    std::uint64_t pending_stage_events_ = 0;
    std::uint64_t pending_arrival_events_ = 0;
    double decision_wallclock_ms_ = 0.0;
    std::uint64_t decisions_ = 0;
};

void Engine::setup() {
    for (const WorkerSpec& w : config_.workers) {
        workers_.emplace_back(w, config_.t_idle_us);
        log_.worker_ids.push_back(w.worker_id);
    }
    for (const FunctionProfile& f : config_.catalog) {
        log_.function_ids.push_back(f.function_id);
    }
    log_.duration_us = workload_.duration_us;
    const std::size_t seconds =
        static_cast<std::size_t>((workload_.duration_us + kUsPerSec - 1) / kUsPerSec);
    log_.assignments.assign(seconds, std::vector<std::uint32_t>(workers_.size(), 0));
    log_.arrival_checksum = 0xcbf29ce484222325ULL;

    scheduler_ = make_scheduler(config_);
    sampler_.emplace(workload_.popularity, config_.catalog.size());

    // Prewarmed instances behave as if an execution completed at t = 0: the
    // instance sits idle with a full keep-alive window and the scheduler has
    // been notified.
    for (const PrewarmEntry& entry : config_.prewarm) {
        const WorkerIndex w = *config_.worker_index(entry.worker_id);
        for (const std::string& fn : entry.functions) {
            const FunctionIndex f = *config_.function_index(fn);
            const IdleInfo info = workers_[w].add_prewarmed(f, mem_mb(f), 0);
            workers_[w].announce(info.sandbox_id);
            scheduler_->on_complete(w, f);
            push(Event{.time = info.idle_deadline_us,
                       .kind = Event::Kind::IdleTimeout,
                       .worker = w,
                       .sandbox = info.sandbox_id,
                       .epoch = info.epoch});
        }
    }

    switch (workload_.mode) {
    case WorkloadSpec::Mode::ClosedLoop: {
        vus_.emplace(workload_, config_.seed);
        vu_phase_.assign(vus_->max_vus(), VuPhase::Parked);
        for (std::uint32_t i = 0; i < workload_.stages.size(); ++i) {
            if (workload_.stages[i].start_us < workload_.duration_us) {
                push(Event{.time = workload_.stages[i].start_us,
                           .kind = Event::Kind::VuStageStart,
                           .stage = i});
                ++pending_stage_events_;
            }
        }
        break;
    }
    case WorkloadSpec::Mode::OpenLoop: {
        Rng rng = derive_stream(config_.seed, "workload");
        for (const Arrival& a : open_loop_arrivals(workload_, *sampler_, rng)) {
            push(Event{.time = a.t_us, .kind = Event::Kind::Arrival, .function = a.function});
            ++pending_arrival_events_;
        }
        break;
    }
    case WorkloadSpec::Mode::Trace: {
        for (const Arrival& a : workload_.trace) {
            if (a.t_us >= workload_.duration_us) {
                break; // arrivals stop at the configured duration
            }
            push(Event{.time = a.t_us, .kind = Event::Kind::Arrival, .function = a.function});
            ++pending_arrival_events_;
        }
        break;
    }
    }
}

void Engine::handle_arrival(FunctionIndex function, SimTime now, std::uint32_t vu) {
    const RequestId id = live_.size();
    live_.push_back(LiveRequest{function, vu, now});
    ++log_.arrivals;
    ++in_flight_;
    log_.arrival_checksum = mix64(log_.arrival_checksum ^ static_cast<std::uint64_t>(now));
    log_.arrival_checksum = mix64(log_.arrival_checksum ^ (0xA000000000000000ULL | function));

    SchedulerDecision decision;
    if (stats_) {
        const auto t0 = std::chrono::steady_clock::now();
        decision = scheduler_->schedule(function, *this);
        const auto t1 = std::chrono::steady_clock::now();
        decision_wallclock_ms_ += std::chrono::duration<double, std::milli>(t1 - t0).count();
        ++decisions_;
    } else {
        decision = scheduler_->schedule(function, *this);
    }

    if (probe_ && probe_->on_decision) {
        std::vector<int> loads(workers_.size());
        int idle_of_f = 0;
        for (std::size_t w = 0; w < workers_.size(); ++w) {
            loads[w] = workers_[w].state().active_connections;
            idle_of_f += workers_[w].idle_count(function);
        }
        Request req;
        req.request_id = id;
        req.function = function;
        req.mem_mb = mem_mb(function);
        req.t_arrival_us = now;
        probe_->on_decision(req, decision, loads, idle_of_f);
    }

    LiveRequest& live = live_[id];
    live.worker = decision.worker;
    live.via = decision.via;
    log_.assignments[static_cast<std::size_t>(now / kUsPerSec)][decision.worker] += 1;
    workers_[decision.worker].add_connection();
    start_or_queue(decision.worker, id, now);
}

void Engine::start_or_queue(WorkerIndex worker, RequestId id, SimTime now) {
    LiveRequest& live = live_[id];
    const AdmitResult admitted = workers_[worker].admit(id, live.function, mem_mb(live.function), now);
    if (admitted.outcome == AdmitOutcome::Queued) {
        emit(now, worker, live.function, SandboxEventKind::Queued);
        return;
    }
    apply_start(worker, id, admitted.start, now, false);
}

void Engine::apply_start(WorkerIndex worker, RequestId id, const StartInfo& start, SimTime now,
                         bool from_queue) {
    LiveRequest& live = live_[id];

    for (const ForcedEviction& fe : start.forced_evictions) {
        emit(now, worker, fe.function, SandboxEventKind::EvictForced);
        if (fe.announced) {
            scheduler_->on_evict(worker, fe.function);
        }
    }

    live.exec_us = now;
    live.cold = start.cold;
    Rng exec_rng = derive_stream(config_.seed, "exec", id);
    live.warm_us = sample_exec_us(config_.catalog[live.function].warm_exec, exec_rng);

    if (start.cold) {
        if (live.via == DecisionVia::PullHit) {
            ++log_.pull_divergences;
        }
        emit(now, worker, live.function, SandboxEventKind::Init);
        push(Event{.time = now + cold_us(live.function),
                   .kind = Event::Kind::InitDone,
                   .request = id,
                   .worker = worker,
                   .sandbox = start.sandbox_id});
    } else {
        emit(now, worker, live.function, SandboxEventKind::WarmHit);
        // A warm start that was not a pull claim silently consumed an
        // instance the scheduler had been told about; tell it so its view
        // of idle instances stays exact.
        const bool claimed = !from_queue && live.via == DecisionVia::PullHit;
        if (start.reused_announced && !claimed) {
            scheduler_->on_evict(worker, live.function);
        }
        push(Event{.time = now + live.warm_us,
                   .kind = Event::Kind::ExecDone,
                   .request = id,
                   .worker = worker});
    }
}

void Engine::drain_pending(WorkerIndex worker, SimTime now) {
    while (workers_[worker].has_pending()) {
        const RequestId head = workers_[worker].pending_head();
        const LiveRequest& live = live_[head];
        auto start = workers_[worker].try_start(head, live.function, mem_mb(live.function), now);
        if (!start) {
            break; // strict FIFO: later entries wait for the head
        }
        workers_[worker].pop_pending();
        apply_start(worker, head, *start, now, true);
    }
}

void Engine::handle_exec_done(WorkerIndex worker, RequestId id, SimTime now) {
    const IdleInfo idle = workers_[worker].complete(id, now);
    workers_[worker].remove_connection();
    --in_flight_;

    LiveRequest& live = live_[id];
    log_.requests.push_back(RequestRecord{id, live.function, live.worker, live.via, live.arrival_us,
                                          live.exec_us, now, live.cold, live.exec_us - live.arrival_us});

    drain_pending(worker, now);

    // The pending queue may have reused (or force-evicted) the instance
    // already; only a surviving one is announced and given a keep-alive
    // timer.
    if (workers_[worker].is_idle_epoch(idle.sandbox_id, idle.epoch)) {
        workers_[worker].announce(idle.sandbox_id);
        scheduler_->on_complete(worker, idle.function);
        push(Event{.time = idle.idle_deadline_us,
                   .kind = Event::Kind::IdleTimeout,
                   .worker = worker,
                   .sandbox = idle.sandbox_id,
                   .epoch = idle.epoch});
    }

    if (live.vu != kNoVu) {
        vu_phase_[live.vu] = VuPhase::Parked;
        if (now < workload_.duration_us && live.vu < vus_->count_at(now)) {
            schedule_vu_cycle(live.vu, now);
        }
    }
}

void Engine::handle_idle_timeout(WorkerIndex worker, std::uint32_t sandbox, std::uint32_t epoch,
                                 SimTime now) {
    const auto evicted = workers_[worker].idle_timeout(sandbox, epoch, now);
    if (!evicted) {
        return; // stale timer: the instance was reused or already evicted
    }
    emit(now, worker, *evicted, SandboxEventKind::EvictTimeout);
    scheduler_->on_evict(worker, *evicted);
    drain_pending(worker, now); // freed memory may start the queue head
}

void Engine::schedule_vu_cycle(std::uint32_t vu, SimTime now) {
    const SimTime think = vus_->draw_think_us(vu);
    if (probe_ && probe_->on_vu_draw) {
        probe_->on_vu_draw(vu, 't', static_cast<std::uint64_t>(think));
    }
    const SimTime wake = now + think;
    if (wake < workload_.duration_us) {
        vu_phase_[vu] = VuPhase::Sleeping;
        ++sleeping_vus_;
        push(Event{.time = wake, .kind = Event::Kind::VuWake, .vu = vu});
    } else {
        vu_phase_[vu] = VuPhase::Parked;
    }
}

void Engine::handle_stage_start(std::uint32_t stage, SimTime now) {
    --pending_stage_events_;
    const std::uint32_t count = workload_.stages[stage].vu_count;
    for (std::uint32_t v = 0; v < count; ++v) {
        if (vu_phase_[v] == VuPhase::Parked) {
            schedule_vu_cycle(v, now);
        }
    }
}

void Engine::handle_vu_wake(std::uint32_t vu, SimTime now) {
    --sleeping_vus_;
    if (now >= workload_.duration_us || vu >= vus_->count_at(now)) {
        vu_phase_[vu] = VuPhase::Parked;
        return;
    }
    const FunctionIndex f = vus_->draw_function(vu, *sampler_);
    if (probe_ && probe_->on_vu_draw) {
        probe_->on_vu_draw(vu, 'f', f);
    }
    vu_phase_[vu] = VuPhase::InFlight;
    handle_arrival(f, now, vu);
}

EventLog Engine::run() {
    setup();

    while (!heap_.empty()) {
        if (in_flight_ == 0 && sleeping_vus_ == 0 && pending_stage_events_ == 0 &&
            pending_arrival_events_ == 0) {
            break; // drained: anything left is keep-alive timers
        }
        const Event ev = heap_.top();
        heap_.pop();

        switch (ev.kind) {
        case Event::Kind::Arrival:
            --pending_arrival_events_;
            handle_arrival(ev.function, ev.time, kNoVu);
            break;
        case Event::Kind::InitDone:
            workers_[ev.worker].init_done(ev.sandbox, ev.time);
            push(Event{.time = ev.time + live_[ev.request].warm_us,
                       .kind = Event::Kind::ExecDone,
                       .request = ev.request,
                       .worker = ev.worker});
            break;
        case Event::Kind::ExecDone:
            handle_exec_done(ev.worker, ev.request, ev.time);
            break;
        case Event::Kind::IdleTimeout:
            handle_idle_timeout(ev.worker, ev.sandbox, ev.epoch, ev.time);
            break;
        case Event::Kind::VuStageStart:
            handle_stage_start(ev.stage, ev.time);
            break;
        case Event::Kind::VuWake:
            handle_vu_wake(ev.vu, ev.time);
            break;
        }
    }

    if (log_.requests.size() != log_.arrivals || in_flight_ != 0) {
        throw std::logic_error("engine: requests lost or duplicated during drain");
    }
    std::sort(log_.requests.begin(), log_.requests.end(),
              [](const RequestRecord& a, const RequestRecord& b) { return a.request_id < b.request_id; });

    if (vus_) {
        log_.vu_draw_checksum = vus_->draw_checksum();
    }
    if (stats_) {
        stats_->decisions = decisions_;
        stats_->mean_decision_wallclock_ms = decisions_ ? decision_wallclock_ms_ / decisions_ : 0.0;
    }
    return log_;
}

} // namespace

EventLog run(const ClusterConfig& config, const WorkloadSpec& workload, RunStats* stats,
             const DecisionProbe* probe) {
    std::vector<std::string> violations = validate_config(config);
    const std::vector<std::string> wl = validate_workload(workload, config.catalog.size());
    violations.insert(violations.end(), wl.begin(), wl.end());
    if (!violations.empty()) {
        std::string message = "invalid run configuration:";
        for (const std::string& v : violations) {
            message += "\n  - " + v;
        }
        throw std::invalid_argument(message);
    }

    Engine engine(config, workload, stats, probe);
    return engine.run();
}

bool replay_check(const EventLog& log, const ClusterConfig& config, const WorkloadSpec& workload) {
    return run(config, workload) == log;
}

} // namespace faaslab
