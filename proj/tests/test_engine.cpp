#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "faaslab/engine.hpp"
#include "test_util.hpp"

#include <set>

using namespace faaslab;
using namespace faaslab::test;

namespace {

/// Single worker, one constant-time function: cold 100 ms, warm 50 ms,
/// keep-alive 1000 ms.
ClusterConfig micro_cluster() {
    ClusterConfig config = make_cluster(1, 1);
    config.t_idle_us = 1000 * kUsPerMs;
    config.scheduler_kind = SchedulerKind::Pull;
    return config;
}

} // namespace

TEST_CASE("micro-trace: cold then warm within the keep-alive window") {
    // Hand-derived: arrival at 0 cold-starts (100 init + 50 exec = 150 ms);
    // arrival at 200 reuses the idle instance (50 ms).
    const ClusterConfig config = micro_cluster();
    const WorkloadSpec workload = make_trace_workload({{0, 0}, {200, 0}}, 2000);
    const EventLog log = run(config, workload);

    REQUIRE(log.requests.size() == 2);
    CHECK(log.requests[0].arrival_us == 0);
    CHECK(log.requests[0].exec_us == 0);
    CHECK(log.requests[0].complete_us == 150 * kUsPerMs);
    CHECK(log.requests[0].cold_start);
    CHECK(log.requests[1].arrival_us == 200 * kUsPerMs);
    CHECK(log.requests[1].complete_us == 250 * kUsPerMs);
    CHECK_FALSE(log.requests[1].cold_start);
    CHECK(log.requests[1].queued_us == 0);
}

TEST_CASE("micro-trace: keep-alive expiry forces a second cold start") {
    // Completion at 150, keep-alive 1000: eviction at exactly 1150, so the
    // arrival at 2000 cold-starts again.
    const ClusterConfig config = micro_cluster();
    const WorkloadSpec workload = make_trace_workload({{0, 0}, {2000, 0}}, 4000);
    const EventLog log = run(config, workload);

    REQUIRE(log.requests.size() == 2);
    CHECK(log.requests[0].complete_us == 150 * kUsPerMs);
    CHECK(log.requests[0].cold_start);
    CHECK(log.requests[1].cold_start);
    CHECK(log.requests[1].complete_us == 2150 * kUsPerMs);

    bool saw_eviction = false;
    for (const SandboxEventRecord& e : log.sandbox_events) {
        if (e.kind == SandboxEventKind::EvictTimeout) {
            CHECK(e.time_us == 1150 * kUsPerMs);
            saw_eviction = true;
        }
    }
    CHECK(saw_eviction);
}

TEST_CASE("zero requests produce an empty log") {
    ClusterConfig config = micro_cluster();
    WorkloadSpec workload;
    workload.mode = WorkloadSpec::Mode::OpenLoop;
    workload.duration_us = 2 * kUsPerSec;
    workload.segments = {RateSegment{2 * kUsPerSec, 0.0}};
    const EventLog log = run(config, workload);
    CHECK(log.requests.empty());
    CHECK(log.arrivals == 0);
}

TEST_CASE("replay_check: identical seeds reproduce the log bit for bit") {
    ClusterConfig config = make_cluster(3, 5, 42);
    config.scheduler_kind = SchedulerKind::Pull;
    WorkloadSpec workload;
    workload.mode = WorkloadSpec::Mode::ClosedLoop;
    workload.duration_us = 5 * kUsPerSec;
    workload.stages = {VuStage{0, 4}};
    workload.think = ThinkTime{10 * kUsPerMs, 100 * kUsPerMs};
    workload.popularity = Popularity::zipf(1.2);

    const EventLog log = run(config, workload);
    CHECK(log.arrivals > 0);
    CHECK(replay_check(log, config, workload));

    EventLog mutated = log;
    mutated.requests[0].complete_us += 1;
    CHECK_FALSE(replay_check(mutated, config, workload));
}

TEST_CASE("determinism across scheduler kinds and seeds") {
    for (SchedulerKind kind : {SchedulerKind::Pull, SchedulerKind::CHBL, SchedulerKind::LeastConn,
                               SchedulerKind::Random, SchedulerKind::RJCH}) {
        for (std::uint64_t seed : {1ull, 7ull}) {
            ClusterConfig config = make_cluster(2, 4, seed);
            config.scheduler_kind = kind;
            WorkloadSpec workload;
            workload.mode = WorkloadSpec::Mode::OpenLoop;
            workload.duration_us = 3 * kUsPerSec;
            workload.segments = {RateSegment{3 * kUsPerSec, 20.0}};
            const EventLog log = run(config, workload);
            CHECK(replay_check(log, config, workload));
        }
    }
}

TEST_CASE("closed loop: one user with fixed timings completes floor(1000/150) requests") {
    // Cycle = 100 ms think + 50 ms execution; cold start zero. Six full
    // cycles fit in one second.
    ClusterConfig config = make_cluster(1, 1);
    config.catalog[0].cold_start_ms = 0;
    WorkloadSpec workload;
    workload.mode = WorkloadSpec::Mode::ClosedLoop;
    workload.duration_us = 1 * kUsPerSec;
    workload.stages = {VuStage{0, 1}};
    workload.think = ThinkTime{100 * kUsPerMs, 100 * kUsPerMs};

    const EventLog log = run(config, workload);
    CHECK(log.requests.size() == 6);
    for (std::size_t k = 0; k < log.requests.size(); ++k) {
        CHECK(log.requests[k].arrival_us == static_cast<SimTime>(100 + 150 * k) * kUsPerMs);
    }
}

TEST_CASE("closed loop: zero users produce no requests") {
    ClusterConfig config = make_cluster(1, 1);
    WorkloadSpec workload;
    workload.mode = WorkloadSpec::Mode::ClosedLoop;
    workload.duration_us = 1 * kUsPerSec;
    workload.stages = {VuStage{0, 0}};
    const EventLog log = run(config, workload);
    CHECK(log.requests.empty());
}

TEST_CASE("closed loop: staged users raise the request rate stage over stage") {
    ClusterConfig config = make_cluster(4, 8, 3);
    config.scheduler_kind = SchedulerKind::Pull;
    WorkloadSpec workload;
    workload.mode = WorkloadSpec::Mode::ClosedLoop;
    workload.duration_us = 30 * kUsPerSec;
    workload.stages = {VuStage{0, 5}, VuStage{10 * kUsPerSec, 15}, VuStage{20 * kUsPerSec, 30}};
    workload.think = ThinkTime{100 * kUsPerMs, 400 * kUsPerMs};

    const EventLog log = run(config, workload);
    std::uint64_t per_stage[3] = {0, 0, 0};
    for (const RequestRecord& r : log.requests) {
        per_stage[std::min<SimTime>(r.arrival_us / (10 * kUsPerSec), 2)] += 1;
    }
    CHECK(per_stage[0] < per_stage[1]);
    CHECK(per_stage[1] < per_stage[2]);
}

TEST_CASE("closed loop: a user's next arrival follows its previous completion") {
    ClusterConfig config = make_cluster(2, 3, 11);
    WorkloadSpec workload;
    workload.mode = WorkloadSpec::Mode::ClosedLoop;
    workload.duration_us = 10 * kUsPerSec;
    workload.stages = {VuStage{0, 3}};
    workload.think = ThinkTime{50 * kUsPerMs, 200 * kUsPerMs};

    const EventLog log = run(config, workload);
    REQUIRE(log.requests.size() > 10);
    // With one request in flight per user, at most `users` requests overlap
    // any point in time, and arrivals are strictly ordered per user.
    std::uint64_t in_flight_max = 0;
    std::vector<std::pair<SimTime, int>> marks;
    for (const RequestRecord& r : log.requests) {
        marks.emplace_back(r.arrival_us, +1);
        marks.emplace_back(r.complete_us, -1);
    }
    std::sort(marks.begin(), marks.end());
    std::int64_t depth = 0;
    for (const auto& [t, d] : marks) {
        depth += d;
        in_flight_max = std::max<std::uint64_t>(in_flight_max, static_cast<std::uint64_t>(depth));
    }
    CHECK(in_flight_max <= 3);
}

TEST_CASE("prewarmed instances serve the first request warm") {
    ClusterConfig config = make_cluster(2, 2);
    config.prewarm = {PrewarmEntry{"w1", {"f1"}}};
    config.scheduler_kind = SchedulerKind::Pull;
    const WorkloadSpec workload = make_trace_workload({{0, 0}}, 1000);
    const EventLog log = run(config, workload);
    REQUIRE(log.requests.size() == 1);
    CHECK_FALSE(log.requests[0].cold_start);
    CHECK(log.requests[0].via == DecisionVia::PullHit);
    CHECK(log.requests[0].worker == 0);
}

TEST_CASE("a queued request starts when capacity frees up") {
    // One worker sized for a single 512 MB sandbox: the second request
    // queues and starts only after the first completes.
    ClusterConfig config = make_cluster(1, 2);
    config.workers[0].cap_mb = 512;
    const WorkloadSpec workload = make_trace_workload({{0, 0}, {10, 1}}, 5000);
    const EventLog log = run(config, workload);

    REQUIRE(log.requests.size() == 2);
    CHECK(log.requests[0].complete_us == 150 * kUsPerMs);
    CHECK(log.requests[1].queued_us > 0);
    // Starts the moment the first instance can be evicted: at completion.
    CHECK(log.requests[1].exec_us == 150 * kUsPerMs);
    CHECK(log.requests[1].complete_us == 300 * kUsPerMs);

    bool queued_event = false, forced_evict = false;
    for (const SandboxEventRecord& e : log.sandbox_events) {
        queued_event = queued_event || e.kind == SandboxEventKind::Queued;
        forced_evict = forced_evict || e.kind == SandboxEventKind::EvictForced;
    }
    CHECK(queued_event);
    CHECK(forced_evict);
}

TEST_CASE("a queued same-function request reuses the just-idled instance") {
    ClusterConfig config = make_cluster(1, 1);
    config.workers[0].cap_mb = 512; // room for exactly one instance
    const WorkloadSpec workload = make_trace_workload({{0, 0}, {10, 0}}, 5000);
    const EventLog log = run(config, workload);

    REQUIRE(log.requests.size() == 2);
    CHECK(log.requests[0].cold_start);
    CHECK(log.requests[0].complete_us == 150 * kUsPerMs);
    // The second request waited in the queue and started warm the moment
    // the first one finished.
    CHECK_FALSE(log.requests[1].cold_start);
    CHECK(log.requests[1].exec_us == 150 * kUsPerMs);
    CHECK(log.requests[1].complete_us == 200 * kUsPerMs);

    bool forced_evict = false;
    for (const SandboxEventRecord& e : log.sandbox_events) {
        forced_evict = forced_evict || e.kind == SandboxEventKind::EvictForced;
    }
    CHECK_FALSE(forced_evict);
}

TEST_CASE("conservation: every arrival completes exactly once") {
    ClusterConfig config = make_cluster(3, 6, 5);
    config.scheduler_kind = SchedulerKind::CHBL;
    WorkloadSpec workload;
    workload.mode = WorkloadSpec::Mode::OpenLoop;
    workload.duration_us = 5 * kUsPerSec;
    workload.segments = {RateSegment{5 * kUsPerSec, 40.0}};
    workload.popularity = Popularity::zipf(1.5);

    const EventLog log = run(config, workload);
    CHECK(log.arrivals == log.requests.size());
    std::set<RequestId> ids;
    for (const RequestRecord& r : log.requests) {
        ids.insert(r.request_id);
        CHECK(r.arrival_us <= r.exec_us);
        CHECK(r.exec_us <= r.complete_us);
    }
    CHECK(ids.size() == log.requests.size());
}

TEST_CASE("assignment counts sum to the number of scheduled requests") {
    ClusterConfig config = make_cluster(2, 4, 9);
    WorkloadSpec workload;
    workload.mode = WorkloadSpec::Mode::OpenLoop;
    workload.duration_us = 4 * kUsPerSec;
    workload.segments = {RateSegment{4 * kUsPerSec, 25.0}};
    const EventLog log = run(config, workload);

    std::uint64_t assigned = 0;
    for (const auto& second : log.assignments) {
        for (std::uint32_t c : second) {
            assigned += c;
        }
    }
    CHECK(assigned == log.arrivals);
}

TEST_CASE("the decision probe sees pre-assignment loads") {
    ClusterConfig config = make_cluster(2, 2);
    const WorkloadSpec workload = make_trace_workload({{0, 0}, {1, 0}, {2, 0}}, 1000);

    std::vector<long> totals;
    DecisionProbe probe;
    probe.on_decision = [&](const Request& req, const SchedulerDecision&, std::span<const int> loads,
                            int idle_of_f) {
        long total = 0;
        for (int l : loads) {
            total += l;
        }
        totals.push_back(total);
        CHECK(idle_of_f >= 0);
        CHECK(req.t_arrival_us >= 0);
    };
    run(config, workload, nullptr, &probe);
    REQUIRE(totals.size() == 3);
    CHECK(totals[0] == 0);
    CHECK(totals[1] == 1);
    CHECK(totals[2] == 2);
}

TEST_CASE("latency decomposes into queueing, initialization and execution") {
    ClusterConfig config = make_cluster(2, 3, 31);
    config.workers[0].cap_mb = 1024;
    config.workers[1].cap_mb = 1024;
    WorkloadSpec workload;
    workload.mode = WorkloadSpec::Mode::OpenLoop;
    workload.duration_us = 4 * kUsPerSec;
    workload.segments = {RateSegment{4 * kUsPerSec, 30.0}};

    const EventLog log = run(config, workload);
    REQUIRE(log.requests.size() > 20);
    const SimTime cold_us = 100 * kUsPerMs; // every test function costs 100 ms to initialize
    for (const RequestRecord& r : log.requests) {
        const SimTime latency = r.complete_us - r.arrival_us;
        const SimTime execution = r.complete_us - r.exec_us - (r.cold_start ? cold_us : 0);
        CHECK(execution > 0);
        CHECK(latency == r.queued_us + (r.cold_start ? cold_us : 0) + execution);
        if (!r.cold_start && r.queued_us == 0) {
            CHECK(latency == execution);
        }
    }
}

TEST_CASE("the live idle view matches a replay of the event log") {
    // Reconstructs per-function idle-instance counts by replaying the log
    // (completions add an instance, warm hits and evictions remove one) and
    // checks the engine's live count at every decision. Arrival times are
    // chosen so no two log events share a timestamp.
    ClusterConfig config = make_cluster(2, 3, 13);
    config.t_idle_us = 777 * kUsPerMs;
    config.scheduler_kind = SchedulerKind::Pull;
    std::vector<std::pair<double, FunctionIndex>> rows;
    Rng rng(99);
    SimTime t = 0;
    for (int i = 0; i < 60; ++i) {
        t += 31 + static_cast<SimTime>(rng.uniform_u64(160));
        rows.emplace_back(static_cast<double>(t), static_cast<FunctionIndex>(rng.uniform_u64(3)));
    }
    const WorkloadSpec workload = make_trace_workload(rows, static_cast<double>(t + 4000));

    struct Observation {
        SimTime at;
        FunctionIndex function;
        int live_idle;
    };
    std::vector<Observation> observations;
    DecisionProbe probe;
    probe.on_decision = [&](const Request& req, const SchedulerDecision&, std::span<const int>,
                            int idle_of_f) {
        observations.push_back(Observation{req.t_arrival_us, req.function, idle_of_f});
    };
    const EventLog log = run(config, workload, nullptr, &probe);

    struct Delta {
        SimTime at;
        FunctionIndex function;
        int delta;
    };
    std::vector<Delta> deltas;
    for (const RequestRecord& r : log.requests) {
        deltas.push_back(Delta{r.complete_us, r.function, +1});
    }
    for (const SandboxEventRecord& e : log.sandbox_events) {
        if (e.kind == SandboxEventKind::WarmHit || e.kind == SandboxEventKind::EvictTimeout ||
            e.kind == SandboxEventKind::EvictForced) {
            deltas.push_back(Delta{e.time_us, e.function, -1});
        }
    }
    std::sort(deltas.begin(), deltas.end(), [](const Delta& a, const Delta& b) { return a.at < b.at; });

    REQUIRE(observations.size() == log.requests.size());
    std::size_t cursor = 0;
    std::vector<int> idle(3, 0);
    for (const Observation& obs : observations) {
        while (cursor < deltas.size() && deltas[cursor].at < obs.at) {
            idle[deltas[cursor].function] += deltas[cursor].delta;
            ++cursor;
        }
        CHECK(idle[obs.function] == obs.live_idle);
    }
}

TEST_CASE("pull never diverges in the single-threaded engine") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        ClusterConfig config = make_cluster(3, 5, seed);
        config.scheduler_kind = SchedulerKind::Pull;
        WorkloadSpec workload;
        workload.mode = WorkloadSpec::Mode::OpenLoop;
        workload.duration_us = 3 * kUsPerSec;
        workload.segments = {RateSegment{3 * kUsPerSec, 60.0}};
        workload.popularity = Popularity::zipf(1.8);
        const EventLog log = run(config, workload);
        CHECK(log.pull_divergences == 0);
    }
}

TEST_CASE("invalid configurations are rejected before running") {
    ClusterConfig config; // no workers, no catalog
    WorkloadSpec workload;
    workload.stages = {VuStage{0, 1}};
    CHECK_THROWS_AS(run(config, workload), std::invalid_argument);
}
