#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "faaslab/config.hpp"

#include <filesystem>
#include <fstream>

using namespace faaslab;

namespace {

const char* kFullConfig = R"({
  "workers": [
    {"worker_id": "w1", "cap_mb": 16384},
    {"worker_id": "w2", "cap_mb": 8192}
  ],
  "functions": [
    {"function_id": "alpha", "cold_start_ms": 144, "warm_exec": {"kind": "lognormal", "median_ms": 392, "sigma": 0.3}, "mem_mb": 512},
    {"function_id": "beta", "cold_start_ms": 100, "warm_exec": {"kind": "constant", "ms": 50}, "mem_mb": 256},
    {"function_id": "gamma", "cold_start_ms": 10, "warm_exec": {"kind": "uniform", "lo_ms": 5, "hi_ms": 20}, "mem_mb": 128}
  ],
  "t_idle_ms": 60000,
  "scheduler": {"kind": "chbl", "params": {"vnodes": 100, "threshold_c": 1.25, "hash_seed": 3}},
  "seed": 17,
  "prewarm": [{"worker": "w1", "functions": ["alpha", "beta"]}],
  "workload": {
    "mode": "closed_loop",
    "duration_ms": 60000,
    "popularity": {"kind": "zipf", "s": 2.2},
    "vus": [{"start_ms": 0, "vu_count": 20}, {"start_ms": 20000, "vu_count": 50}],
    "think_ms": {"lo": 100, "hi": 1000}
  }
})";

} // namespace

TEST_CASE("a full configuration document parses into every field") {
    const RunConfig config = parse_config(kFullConfig, ".");

    REQUIRE(config.cluster.workers.size() == 2);
    CHECK(config.cluster.workers[1].worker_id == "w2");
    CHECK(config.cluster.workers[1].cap_mb == 8192);

    REQUIRE(config.cluster.catalog.size() == 3);
    CHECK(config.cluster.catalog[0].warm_exec.kind == ExecDist::Kind::Lognormal);
    CHECK(config.cluster.catalog[0].warm_exec.a == doctest::Approx(392));
    CHECK(config.cluster.catalog[1].warm_exec.kind == ExecDist::Kind::Constant);
    CHECK(config.cluster.catalog[2].warm_exec.kind == ExecDist::Kind::Uniform);

    CHECK(config.cluster.t_idle_us == 60'000 * kUsPerMs);
    CHECK(config.cluster.scheduler_kind == SchedulerKind::CHBL);
    CHECK(config.cluster.scheduler_params.vnodes == 100);
    CHECK(config.cluster.scheduler_params.threshold_c == doctest::Approx(1.25));
    CHECK(config.cluster.scheduler_params.hash_seed == 3);
    CHECK(config.cluster.seed == 17);

    REQUIRE(config.cluster.prewarm.size() == 1);
    CHECK(config.cluster.prewarm[0].worker_id == "w1");
    CHECK(config.cluster.prewarm[0].functions.size() == 2);

    CHECK(config.workload.mode == WorkloadSpec::Mode::ClosedLoop);
    CHECK(config.workload.duration_us == 60 * kUsPerSec);
    CHECK(config.workload.popularity.kind == Popularity::Kind::Zipf);
    REQUIRE(config.workload.stages.size() == 2);
    CHECK(config.workload.stages[1].start_us == 20 * kUsPerSec);
    CHECK(config.workload.stages[1].vu_count == 50);
    CHECK(config.workload.think.lo_us == 100 * kUsPerMs);

    CHECK(validate_run_config(config).empty());
}

TEST_CASE("bare numbers are constant warm-execution shorthands") {
    const std::string doc = R"({
      "workers": [{"worker_id": "w1", "cap_mb": 1024}],
      "functions": [{"function_id": "f", "cold_start_ms": 1, "warm_exec": 42, "mem_mb": 64}],
      "t_idle_ms": 1000,
      "scheduler": {"kind": "pull"},
      "seed": 1,
      "workload": {"mode": "open_loop", "duration_ms": 1000, "segments": [{"segment_ms": 1000, "req_per_s": 1}]}
    })";
    const RunConfig config = parse_config(doc, ".");
    CHECK(config.cluster.catalog[0].warm_exec.kind == ExecDist::Kind::Constant);
    CHECK(config.cluster.catalog[0].warm_exec.a == doctest::Approx(42));
    CHECK(config.workload.mode == WorkloadSpec::Mode::OpenLoop);
    REQUIRE(config.workload.segments.size() == 1);
}

TEST_CASE("explicit popularity weights map function names to catalog order") {
    const std::string doc = R"({
      "workers": [{"worker_id": "w1", "cap_mb": 1024}],
      "functions": [
        {"function_id": "a", "cold_start_ms": 1, "warm_exec": 10, "mem_mb": 64},
        {"function_id": "b", "cold_start_ms": 1, "warm_exec": 10, "mem_mb": 64}
      ],
      "t_idle_ms": 1000,
      "scheduler": {"kind": "pull"},
      "seed": 1,
      "workload": {
        "mode": "closed_loop", "duration_ms": 1000,
        "popularity": {"kind": "explicit", "weights": {"b": 3.0, "a": 1.0}},
        "vus": [{"start_ms": 0, "vu_count": 1}]
      }
    })";
    const RunConfig config = parse_config(doc, ".");
    REQUIRE(config.workload.popularity.weights.size() == 2);
    CHECK(config.workload.popularity.weights[0] == doctest::Approx(1.0));
    CHECK(config.workload.popularity.weights[1] == doctest::Approx(3.0));
}

TEST_CASE("schema errors carry context") {
    CHECK_THROWS_WITH_AS(parse_config("{", "."), doctest::Contains("invalid JSON"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config("[]", "."), doctest::Contains("top level"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"workers": []})", "."), doctest::Contains("functions"),
                         std::runtime_error);

    const std::string bad_kind = R"({
      "workers": [{"worker_id": "w", "cap_mb": 1}],
      "functions": [{"function_id": "f", "cold_start_ms": 1, "warm_exec": 1, "mem_mb": 1}],
      "t_idle_ms": 1, "scheduler": {"kind": "mystery"}, "seed": 1,
      "workload": {"mode": "open_loop", "duration_ms": 1, "segments": []}
    })";
    CHECK_THROWS_WITH_AS(parse_config(bad_kind, "."), doctest::Contains("mystery"), std::runtime_error);

    const std::string bad_param = R"({
      "workers": [{"worker_id": "w", "cap_mb": 1}],
      "functions": [{"function_id": "f", "cold_start_ms": 1, "warm_exec": 1, "mem_mb": 1}],
      "t_idle_ms": 1, "scheduler": {"kind": "pull", "params": {"vnode_count": 3}}, "seed": 1,
      "workload": {"mode": "open_loop", "duration_ms": 1, "segments": []}
    })";
    CHECK_THROWS_WITH_AS(parse_config(bad_param, "."), doctest::Contains("vnode_count"),
                         std::runtime_error);

    const std::string bad_weight = R"({
      "workers": [{"worker_id": "w", "cap_mb": 1}],
      "functions": [{"function_id": "f", "cold_start_ms": 1, "warm_exec": 1, "mem_mb": 1}],
      "t_idle_ms": 1, "scheduler": {"kind": "pull"}, "seed": 1,
      "workload": {"mode": "closed_loop", "duration_ms": 1,
                   "popularity": {"kind": "explicit", "weights": {"ghost": 1.0}},
                   "vus": [{"start_ms": 0, "vu_count": 1}]}
    })";
    CHECK_THROWS_WITH_AS(parse_config(bad_weight, "."), doctest::Contains("ghost"), std::runtime_error);
}

TEST_CASE("load_config resolves a trace relative to the config file") {
    const auto dir = std::filesystem::temp_directory_path() / "faaslab_cfg_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream trace(dir / "trace.csv");
        trace << "arrival_ms,function\n0,f\n5,f\n";
    }
    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << R"({
          "workers": [{"worker_id": "w", "cap_mb": 1024}],
          "functions": [{"function_id": "f", "cold_start_ms": 1, "warm_exec": 10, "mem_mb": 64}],
          "t_idle_ms": 1000, "scheduler": {"kind": "pull"}, "seed": 1,
          "workload": {"mode": "trace", "duration_ms": 1000, "trace_path": "trace.csv"}
        })";
    }
    const RunConfig config = load_config(dir / "run.cfg");
    REQUIRE(config.workload.trace.size() == 2);
    CHECK(config.workload.trace[1].t_us == 5 * kUsPerMs);
}

TEST_CASE("loading a missing config names the path") {
    CHECK_THROWS_WITH_AS(load_config("/no/such/config.cfg"), doctest::Contains("/no/such/config.cfg"),
                         std::runtime_error);
}
