#include "faaslab/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace faaslab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::runtime_error("config: " + where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        fail(where, std::string("missing key '") + key + "'");
    }
    return obj.at(key);
}

double require_number(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number()) {
        fail(where, std::string("'") + key + "' must be a number");
    }
    return v.get<double>();
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string()) {
        fail(where, std::string("'") + key + "' must be a string");
    }
    return v.get<std::string>();
}

ExecDist parse_exec_dist(const json& v, const std::string& where) {
    if (v.is_number()) {
        return ExecDist::constant(v.get<double>()); // shorthand: bare number = constant ms
    }
    if (!v.is_object()) {
        fail(where, "warm_exec must be a number or an object");
    }
    const std::string kind = require_string(v, "kind", where);
    if (kind == "constant") {
        return ExecDist::constant(require_number(v, "ms", where));
    }
    if (kind == "uniform") {
        return ExecDist::uniform(require_number(v, "lo_ms", where), require_number(v, "hi_ms", where));
    }
    if (kind == "lognormal") {
        return ExecDist::lognormal(require_number(v, "median_ms", where),
                                   require_number(v, "sigma", where));
    }
    fail(where, "unknown warm_exec kind '" + kind + "'");
}

Popularity parse_popularity(const json& v, const std::vector<FunctionProfile>& catalog) {
    const std::string where = "workload.popularity";
    if (!v.is_object()) {
        fail(where, "must be an object");
    }
    const std::string kind = require_string(v, "kind", where);
    if (kind == "uniform") {
        return Popularity::uniform();
    }
    if (kind == "zipf") {
        return Popularity::zipf(require_number(v, "s", where));
    }
    if (kind == "explicit") {
        const json& weights = require(v, "weights", where);
        if (!weights.is_object()) {
            fail(where, "'weights' must map function ids to weights");
        }
        std::vector<double> w(catalog.size(), 0.0);
        for (const auto& [name, value] : weights.items()) {
            if (!value.is_number()) {
                fail(where, "weight of '" + name + "' must be a number");
            }
            bool known = false;
            for (std::size_t i = 0; i < catalog.size(); ++i) {
                if (catalog[i].function_id == name) {
                    w[i] = value.get<double>();
                    known = true;
                    break;
                }
            }
            if (!known) {
                fail(where, "weight references unknown function '" + name + "'");
            }
        }
        return Popularity::explicit_weights(std::move(w));
    }
    fail(where, "unknown popularity kind '" + kind + "'");
}

WorkloadSpec parse_workload(const json& v, const std::vector<FunctionProfile>& catalog,
                            const std::filesystem::path& base_dir) {
    const std::string where = "workload";
    WorkloadSpec spec;

    const std::string mode = require_string(v, "mode", where);
    if (mode == "closed_loop") {
        spec.mode = WorkloadSpec::Mode::ClosedLoop;
    } else if (mode == "open_loop") {
        spec.mode = WorkloadSpec::Mode::OpenLoop;
    } else if (mode == "trace") {
        spec.mode = WorkloadSpec::Mode::Trace;
    } else {
        fail(where, "unknown mode '" + mode + "'");
    }

    spec.duration_us = us_from_ms(require_number(v, "duration_ms", where));
    if (v.contains("popularity")) {
        spec.popularity = parse_popularity(v.at("popularity"), catalog);
    }

    if (spec.mode == WorkloadSpec::Mode::ClosedLoop) {
        const json& stages = require(v, "vus", where);
        if (!stages.is_array()) {
            fail(where, "'vus' must be an array of stages");
        }
        for (const json& s : stages) {
            VuStage stage;
            stage.start_us = us_from_ms(require_number(s, "start_ms", where + ".vus"));
            const double count = require_number(s, "vu_count", where + ".vus");
            if (count < 0) {
                fail(where, "vu_count must be >= 0");
            }
            stage.vu_count = static_cast<std::uint32_t>(count);
            spec.stages.push_back(stage);
        }
        if (v.contains("think_ms")) {
            const json& think = v.at("think_ms");
            spec.think.lo_us = us_from_ms(require_number(think, "lo", where + ".think_ms"));
            spec.think.hi_us = us_from_ms(require_number(think, "hi", where + ".think_ms"));
        }
    } else if (spec.mode == WorkloadSpec::Mode::OpenLoop) {
        const json& segments = require(v, "segments", where);
        if (!segments.is_array()) {
            fail(where, "'segments' must be an array");
        }
        for (const json& s : segments) {
            RateSegment seg;
            seg.duration_us = us_from_ms(require_number(s, "segment_ms", where + ".segments"));
            seg.req_per_s = require_number(s, "req_per_s", where + ".segments");
            spec.segments.push_back(seg);
        }
    } else {
        spec.trace_path = require_string(v, "trace_path", where);
        std::filesystem::path p(spec.trace_path);
        if (p.is_relative()) {
            p = base_dir / p;
        }
        spec.trace_path = p.string();
    }

    return spec;
}

} // namespace

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw std::runtime_error("config: top level must be an object");
    }

    RunConfig config;

    const json& workers = require(doc, "workers", "top level");
    if (!workers.is_array()) {
        fail("top level", "'workers' must be an array");
    }
    for (const json& w : workers) {
        WorkerSpec spec;
        spec.worker_id = require_string(w, "worker_id", "workers");
        spec.cap_mb = static_cast<int>(require_number(w, "cap_mb", "workers"));
        config.cluster.workers.push_back(std::move(spec));
    }

    const json& functions = require(doc, "functions", "top level");
    if (!functions.is_array()) {
        fail("top level", "'functions' must be an array");
    }
    for (const json& f : functions) {
        FunctionProfile profile;
        profile.function_id = require_string(f, "function_id", "functions");
        profile.cold_start_ms = require_number(f, "cold_start_ms", "functions");
        profile.warm_exec = parse_exec_dist(require(f, "warm_exec", "functions"),
                                            "functions." + profile.function_id);
        profile.mem_mb = static_cast<int>(require_number(f, "mem_mb", "functions"));
        config.cluster.catalog.push_back(std::move(profile));
    }

    config.cluster.t_idle_us = us_from_ms(require_number(doc, "t_idle_ms", "top level"));

    const json& scheduler = require(doc, "scheduler", "top level");
    const std::string kind = require_string(scheduler, "kind", "scheduler");
    const auto parsed_kind = scheduler_kind_from_string(kind);
    if (!parsed_kind) {
        fail("scheduler", "unknown kind '" + kind + "'");
    }
    config.cluster.scheduler_kind = *parsed_kind;
    if (scheduler.contains("params")) {
        const json& params = scheduler.at("params");
        if (!params.is_object()) {
            fail("scheduler", "'params' must be an object");
        }
        for (const auto& [key, value] : params.items()) {
            if (key == "vnodes") {
                config.cluster.scheduler_params.vnodes = value.get<std::uint32_t>();
            } else if (key == "threshold_c") {
                config.cluster.scheduler_params.threshold_c = value.get<double>();
            } else if (key == "hash_seed") {
                config.cluster.scheduler_params.hash_seed = value.get<std::uint64_t>();
            } else {
                fail("scheduler.params", "unknown parameter '" + key + "'");
            }
        }
    }

    const json& seed = require(doc, "seed", "top level");
    if (!seed.is_number_unsigned()) {
        fail("top level", "'seed' must be a nonnegative integer");
    }
    config.cluster.seed = seed.get<std::uint64_t>();

    if (doc.contains("prewarm")) {
        const json& prewarm = doc.at("prewarm");
        if (!prewarm.is_array()) {
            fail("top level", "'prewarm' must be an array");
        }
        for (const json& p : prewarm) {
            PrewarmEntry entry;
            entry.worker_id = require_string(p, "worker", "prewarm");
            const json& fns = require(p, "functions", "prewarm");
            if (!fns.is_array()) {
                fail("prewarm", "'functions' must be an array");
            }
            for (const json& fn : fns) {
                if (!fn.is_string()) {
                    fail("prewarm", "function ids must be strings");
                }
                entry.functions.push_back(fn.get<std::string>());
            }
            config.cluster.prewarm.push_back(std::move(entry));
        }
    }

    config.workload = parse_workload(require(doc, "workload", "top level"), config.cluster.catalog,
                                     base_dir);
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    RunConfig config = parse_config(buffer.str(), path.parent_path());
    if (config.workload.mode == WorkloadSpec::Mode::Trace) {
        config.workload.trace = load_trace(config.workload.trace_path, config.cluster.catalog);
    }
    return config;
}

std::vector<std::string> validate_run_config(const RunConfig& config) {
    std::vector<std::string> violations = validate_config(config.cluster);
    const std::vector<std::string> wl = validate_workload(config.workload, config.cluster.catalog.size());
    violations.insert(violations.end(), wl.begin(), wl.end());
    return violations;
}

} // namespace faaslab
