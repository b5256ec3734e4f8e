#include "faaslab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace faaslab {

SimTime sample_exec_us(const ExecDist& dist, Rng& rng) {
    double ms = 0.0;
    switch (dist.kind) {
    case ExecDist::Kind::Constant:
        ms = dist.a;
        break;
    case ExecDist::Kind::Uniform:
        return std::max<SimTime>(1, rng.uniform_i64(us_from_ms(dist.a), us_from_ms(dist.b)));
    case ExecDist::Kind::Lognormal:
        ms = rng.lognormal(dist.a, dist.b);
        break;
    }
    return std::max<SimTime>(1, us_from_ms(ms));
}

const char* to_string(SchedulerKind kind) {
    switch (kind) {
    case SchedulerKind::Pull: return "pull";
    case SchedulerKind::CH: return "ch";
    case SchedulerKind::CHBL: return "chbl";
    case SchedulerKind::RJCH: return "rjch";
    case SchedulerKind::LeastConn: return "leastconn";
    case SchedulerKind::Random: return "random";
    }
    return "?";
}

std::optional<SchedulerKind> scheduler_kind_from_string(const std::string& name) {
    for (SchedulerKind k : {SchedulerKind::Pull, SchedulerKind::CH, SchedulerKind::CHBL,
                            SchedulerKind::RJCH, SchedulerKind::LeastConn, SchedulerKind::Random}) {
        if (name == to_string(k)) {
            return k;
        }
    }
    return std::nullopt;
}

std::optional<FunctionIndex> ClusterConfig::function_index(const std::string& id) const {
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (catalog[i].function_id == id) {
            return static_cast<FunctionIndex>(i);
        }
    }
    return std::nullopt;
}

std::optional<WorkerIndex> ClusterConfig::worker_index(const std::string& id) const {
    for (std::size_t i = 0; i < workers.size(); ++i) {
        if (workers[i].worker_id == id) {
            return static_cast<WorkerIndex>(i);
        }
    }
    return std::nullopt;
}

namespace {

bool dist_samples_positive(const ExecDist& d) {
    switch (d.kind) {
    case ExecDist::Kind::Constant:
        return d.a > 0.0;
    case ExecDist::Kind::Uniform:
        return d.a > 0.0 && d.a <= d.b;
    case ExecDist::Kind::Lognormal:
        return d.a > 0.0 && d.b >= 0.0;
    }
    return false;
}

} // namespace

std::vector<std::string> validate_config(const ClusterConfig& config) {
    std::vector<std::string> violations;

    if (config.workers.empty()) {
        violations.push_back("workers empty");
    }
    if (config.catalog.empty()) {
        violations.push_back("catalog empty");
    }
    if (config.t_idle_us <= 0) {
        violations.push_back("t_idle_ms must be > 0");
    }

    std::set<std::string> worker_ids;
    int min_cap = 0;
    for (const auto& w : config.workers) {
        if (w.worker_id.empty()) {
            violations.push_back("worker with empty id");
        }
        if (!worker_ids.insert(w.worker_id).second) {
            violations.push_back("duplicate worker id: " + w.worker_id);
        }
        if (w.cap_mb <= 0) {
            violations.push_back("worker " + w.worker_id + ": cap_mb must be > 0");
        }
        min_cap = (min_cap == 0) ? w.cap_mb : std::min(min_cap, w.cap_mb);
    }

    std::set<std::string> function_ids;
    for (const auto& f : config.catalog) {
        if (f.function_id.empty()) {
            violations.push_back("function with empty id");
        }
        if (!function_ids.insert(f.function_id).second) {
            violations.push_back("duplicate function id: " + f.function_id);
        }
        if (f.cold_start_ms < 0.0) {
            violations.push_back("function " + f.function_id + ": cold_start_ms must be >= 0");
        }
        if (!dist_samples_positive(f.warm_exec)) {
            violations.push_back("function " + f.function_id + ": warm_exec must sample positive durations");
        }
        if (f.mem_mb <= 0) {
            violations.push_back("function " + f.function_id + ": mem_mb must be > 0");
        } else if (min_cap > 0 && f.mem_mb > min_cap) {
            violations.push_back("function " + f.function_id + ": mem_mb " + std::to_string(f.mem_mb) +
                                 " exceeds smallest worker capacity " + std::to_string(min_cap));
        }
    }

    if (config.scheduler_params.vnodes == 0) {
        violations.push_back("scheduler params: vnodes must be >= 1");
    }
    if (config.scheduler_params.threshold_c <= 1.0) {
        violations.push_back("scheduler params: threshold_c must be > 1");
    }

    for (const auto& p : config.prewarm) {
        if (!worker_ids.count(p.worker_id)) {
            violations.push_back("prewarm references unknown worker: " + p.worker_id);
        }
        for (const auto& f : p.functions) {
            if (!function_ids.count(f)) {
                violations.push_back("prewarm references unknown function: " + f);
            }
        }
    }

    return violations;
}

std::vector<FunctionProfile> default_catalog(int copies, double sigma, int mem_mb) {
    struct Bench {
        const char* name;
        double cold_ms;
        double warm_ms;
    };
    // FunctionBench applications with measured cold/warm response latencies.
    static const Bench kBench[] = {
        {"chameleon", 536, 392}, {"dd", 706, 549},
        {"float_operation", 263, 94}, {"gzip_compression", 510, 303},
        {"json_dumps_loads", 269, 105}, {"linpack", 282, 58},
        {"matmul", 284, 125}, {"pyaes", 329, 149},
    };

    std::vector<FunctionProfile> catalog;
    for (int copy = 1; copy <= copies; ++copy) {
        for (const auto& b : kBench) {
            FunctionProfile p;
            p.function_id = std::string(b.name) + "-" + std::to_string(copy);
            p.cold_start_ms = b.cold_ms - b.warm_ms; // measured cold latency includes one execution
            p.warm_exec = sigma > 0.0 ? ExecDist::lognormal(b.warm_ms, sigma) : ExecDist::constant(b.warm_ms);
            p.mem_mb = mem_mb;
            catalog.push_back(std::move(p));
        }
    }
    return catalog;
}

} // namespace faaslab
