#include "faaslab/experiment.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace faaslab {

namespace {

using nlohmann::json;

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(text);
    while (std::getline(ss, field, sep)) {
        out.push_back(field);
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            rows.push_back(split(line, ','));
        }
    }
    return rows;
}

} // namespace

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    if (text.find(',') == std::string::npos) {
        const std::uint64_t count = std::stoull(text);
        if (count == 0) {
            throw std::invalid_argument("seed count must be >= 1");
        }
        for (std::uint64_t s = 1; s <= count; ++s) {
            seeds.push_back(s);
        }
        return seeds;
    }
    for (const std::string& tok : split(text, ',')) {
        seeds.push_back(std::stoull(tok));
    }
    return seeds;
}

std::vector<SchedulerKind> parse_scheduler_list(const std::string& text) {
    std::vector<SchedulerKind> kinds;
    for (const std::string& tok : split(text, ',')) {
        const auto kind = scheduler_kind_from_string(tok);
        if (!kind) {
            throw std::invalid_argument("unknown scheduler '" + tok + "'");
        }
        kinds.push_back(*kind);
    }
    if (kinds.empty()) {
        throw std::invalid_argument("scheduler list is empty");
    }
    return kinds;
}

std::string run_dir_name(SchedulerKind scheduler, std::uint64_t seed) {
    return std::string(to_string(scheduler)) + "_seed" + std::to_string(seed);
}

void write_run_artifacts(const std::filesystem::path& dir, const EventLog& log,
                         std::span<const StageBounds> stages, SchedulerKind scheduler,
                         std::uint64_t seed) {
    std::filesystem::create_directories(dir);

    {
        std::string csv = "request_id,function,worker,via,arrival_ms,exec_ms,complete_ms,cold_start,queued_ms\n";
        for (const RequestRecord& r : log.requests) {
            csv += std::to_string(r.request_id);
            csv += ',';
            csv += log.function_ids[r.function];
            csv += ',';
            csv += log.worker_ids[r.worker];
            csv += ',';
            csv += to_string(r.via);
            csv += ',';
            csv += format_ms(r.arrival_us);
            csv += ',';
            csv += format_ms(r.exec_us);
            csv += ',';
            csv += format_ms(r.complete_us);
            csv += ',';
            csv += r.cold_start ? '1' : '0';
            csv += ',';
            csv += format_ms(r.queued_us);
            csv += '\n';
        }
        write_file(dir / "requests.csv", csv);
    }

    {
        std::string csv = "second,worker,count\n";
        for (std::size_t second = 0; second < log.assignments.size(); ++second) {
            for (std::size_t w = 0; w < log.assignments[second].size(); ++w) {
                csv += std::to_string(second);
                csv += ',';
                csv += log.worker_ids[w];
                csv += ',';
                csv += std::to_string(log.assignments[second][w]);
                csv += '\n';
            }
        }
        write_file(dir / "assignments.csv", csv);
    }

    {
        std::string csv = "time_ms,worker,function,event\n";
        for (const SandboxEventRecord& e : log.sandbox_events) {
            csv += format_ms(e.time_us);
            csv += ',';
            csv += log.worker_ids[e.worker];
            csv += ',';
            csv += log.function_ids[e.function];
            csv += ',';
            csv += to_string(e.kind);
            csv += '\n';
        }
        write_file(dir / "sandbox_events.csv", csv);
    }

    if (!log.requests.empty()) {
        const LatencyStats lat = latency_stats(log);
        std::string csv = "latency_ms,cum_fraction\n";
        for (const auto& [latency, fraction] : lat.cdf) {
            csv += fmt4(latency);
            csv += ',';
            csv += fmt4(fraction);
            csv += '\n';
        }
        write_file(dir / "cdf.csv", csv);
    }

    json meta;
    meta["scheduler"] = to_string(scheduler);
    meta["seed"] = seed;
    meta["duration_ms"] = format_ms(log.duration_us);
    meta["workers"] = log.worker_ids;
    meta["functions"] = log.function_ids;
    json stage_list = json::array();
    for (const StageBounds& s : stages) {
        stage_list.push_back({{"start_ms", format_ms(s.start_us)}, {"end_ms", format_ms(s.end_us)}});
    }
    meta["stages"] = stage_list;
    meta["arrivals"] = log.arrivals;
    meta["arrival_checksum"] = log.arrival_checksum;
    meta["vu_draw_checksum"] = log.vu_draw_checksum;
    write_file(dir / "meta.json", meta.dump(2) + "\n");
}

EventLog read_run_log(const std::filesystem::path& dir) {
    EventLog log;

    const json meta = json::parse(read_file(dir / "meta.json"));
    log.worker_ids = meta.at("workers").get<std::vector<std::string>>();
    log.function_ids = meta.at("functions").get<std::vector<std::string>>();
    log.duration_us = parse_ms(meta.at("duration_ms").get<std::string>());
    log.arrivals = meta.at("arrivals").get<std::uint64_t>();
    log.arrival_checksum = meta.at("arrival_checksum").get<std::uint64_t>();
    log.vu_draw_checksum = meta.at("vu_draw_checksum").get<std::uint64_t>();

    auto worker_index = [&](const std::string& id) -> WorkerIndex {
        for (std::size_t i = 0; i < log.worker_ids.size(); ++i) {
            if (log.worker_ids[i] == id) {
                return static_cast<WorkerIndex>(i);
            }
        }
        throw std::runtime_error("unknown worker in stored log: " + id);
    };
    auto function_index = [&](const std::string& id) -> FunctionIndex {
        for (std::size_t i = 0; i < log.function_ids.size(); ++i) {
            if (log.function_ids[i] == id) {
                return static_cast<FunctionIndex>(i);
            }
        }
        throw std::runtime_error("unknown function in stored log: " + id);
    };

    {
        const auto rows = read_csv(dir / "requests.csv");
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& row = rows[i];
            if (row.size() != 9) {
                throw std::runtime_error("requests.csv: malformed row " + std::to_string(i + 1));
            }
            RequestRecord r;
            r.request_id = std::stoull(row[0]);
            r.function = function_index(row[1]);
            r.worker = worker_index(row[2]);
            const auto via = decision_via_from_string(row[3]);
            if (!via) {
                throw std::runtime_error("requests.csv: unknown via " + row[3]);
            }
            r.via = *via;
            r.arrival_us = parse_ms(row[4]);
            r.exec_us = parse_ms(row[5]);
            r.complete_us = parse_ms(row[6]);
            r.cold_start = row[7] == "1";
            r.queued_us = parse_ms(row[8]);
            log.requests.push_back(r);
        }
    }

    {
        const std::size_t seconds =
            static_cast<std::size_t>((log.duration_us + kUsPerSec - 1) / kUsPerSec);
        log.assignments.assign(seconds, std::vector<std::uint32_t>(log.worker_ids.size(), 0));
        const auto rows = read_csv(dir / "assignments.csv");
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& row = rows[i];
            if (row.size() != 3) {
                throw std::runtime_error("assignments.csv: malformed row " + std::to_string(i + 1));
            }
            const std::size_t second = std::stoull(row[0]);
            if (second >= log.assignments.size()) {
                throw std::runtime_error("assignments.csv: second out of range");
            }
            log.assignments[second][worker_index(row[1])] =
                static_cast<std::uint32_t>(std::stoul(row[2]));
        }
    }

    {
        const auto rows = read_csv(dir / "sandbox_events.csv");
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& row = rows[i];
            if (row.size() != 4) {
                throw std::runtime_error("sandbox_events.csv: malformed row " + std::to_string(i + 1));
            }
            SandboxEventRecord e;
            e.time_us = parse_ms(row[0]);
            e.worker = worker_index(row[1]);
            e.function = function_index(row[2]);
            const auto kind = sandbox_event_kind_from_string(row[3]);
            if (!kind) {
                throw std::runtime_error("sandbox_events.csv: unknown event " + row[3]);
            }
            e.kind = *kind;
            log.sandbox_events.push_back(e);
        }
    }

    return log;
}

std::vector<StageBounds> read_run_stages(const std::filesystem::path& dir) {
    const json meta = json::parse(read_file(dir / "meta.json"));
    std::vector<StageBounds> stages;
    for (const json& s : meta.at("stages")) {
        stages.push_back(StageBounds{parse_ms(s.at("start_ms").get<std::string>()),
                                     parse_ms(s.at("end_ms").get<std::string>())});
    }
    return stages;
}

std::string summary_csv(const std::vector<std::pair<std::string, MetricsSummary>>& rows,
                        const std::vector<std::uint64_t>& seeds_by_row) {
    std::string csv =
        "scheduler,seed,mean_ms,p50,p90,p95,p99,cold_rate,total,rps_stage1,rps_stage2,rps_stage3,load_cv\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const MetricsSummary& m = rows[i].second;
        csv += rows[i].first;
        csv += ',';
        csv += std::to_string(seeds_by_row[i]);
        csv += ',';
        csv += fmt4(m.mean_latency_ms);
        csv += ',';
        csv += fmt4(m.p50_ms);
        csv += ',';
        csv += fmt4(m.p90_ms);
        csv += ',';
        csv += fmt4(m.p95_ms);
        csv += ',';
        csv += fmt4(m.p99_ms);
        csv += ',';
        csv += fmt4(m.cold_start_rate);
        csv += ',';
        csv += std::to_string(m.throughput_total);
        for (std::size_t s = 0; s < 3; ++s) {
            csv += ',';
            csv += fmt4(s < m.throughput_rps_by_stage.size() ? m.throughput_rps_by_stage[s] : 0.0);
        }
        csv += ',';
        csv += fmt4(m.load_cv);
        csv += '\n';
    }
    return csv;
}

namespace {

struct MatrixCell {
    SchedulerKind scheduler;
    std::uint64_t seed;
};

std::vector<MatrixCell> build_matrix(const RunConfig& base, const ExperimentPlan& plan) {
    std::vector<SchedulerKind> schedulers = plan.schedulers;
    if (schedulers.empty()) {
        schedulers.push_back(base.cluster.scheduler_kind);
    }
    std::vector<std::uint64_t> seeds = plan.seeds;
    if (seeds.empty()) {
        seeds.push_back(base.cluster.seed);
    }
    std::vector<MatrixCell> cells;
    for (SchedulerKind s : schedulers) {
        for (std::uint64_t seed : seeds) {
            cells.push_back(MatrixCell{s, seed});
        }
    }
    return cells;
}

RunConfig cell_config(const RunConfig& base, const MatrixCell& cell) {
    RunConfig config = base;
    config.cluster.scheduler_kind = cell.scheduler;
    config.cluster.seed = cell.seed;
    return config;
}

/// Runs `fn(i)` for i in [0, n) on up to `parallelism` threads.
void parallel_for(std::size_t n, unsigned parallelism, const std::function<void(std::size_t)>& fn) {
    if (parallelism <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    const unsigned count = std::min<unsigned>(parallelism, static_cast<unsigned>(n));
    std::mutex error_mutex;
    std::exception_ptr first_error;
    for (unsigned t = 0; t < count; ++t) {
        threads.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) {
                        first_error = std::current_exception();
                    }
                }
            }
        });
    }
    for (std::thread& th : threads) {
        th.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

} // namespace

int cmd_run(const ExperimentPlan& plan, std::ostream& diag) {
    RunConfig base;
    try {
        base = load_config(plan.config_path);
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return 1;
    }
    const std::vector<std::string> violations = validate_run_config(base);
    if (!violations.empty()) {
        diag << "invalid config " << plan.config_path.string() << ":\n";
        for (const std::string& v : violations) {
            diag << "  - " << v << "\n";
        }
        return 1;
    }

    std::error_code ec;
    std::filesystem::create_directories(plan.out_dir, ec);
    if (ec) {
        diag << "error: cannot create output directory " << plan.out_dir.string() << ": "
             << ec.message() << "\n";
        return 1;
    }

    const std::vector<MatrixCell> cells = build_matrix(base, plan);
    const std::vector<StageBounds> stages = stage_bounds_for(base.workload);

    struct CellResult {
        MetricsSummary summary;
        RunStats stats;
    };
    std::vector<CellResult> results(cells.size());

    try {
        parallel_for(cells.size(), plan.parallelism, [&](std::size_t i) {
            const RunConfig config = cell_config(base, cells[i]);
            RunStats stats;
            const EventLog log = run(config.cluster, config.workload, &stats);
            write_run_artifacts(plan.out_dir / run_dir_name(cells[i].scheduler, cells[i].seed), log,
                                stages, cells[i].scheduler, cells[i].seed);
            results[i] =
                CellResult{summarize(log, stages, stats.mean_decision_wallclock_ms), stats};
        });
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return 1;
    }

    std::vector<std::pair<std::string, MetricsSummary>> rows;
    std::vector<std::uint64_t> seeds_by_row;
    json manifest_runs = json::array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        rows.emplace_back(to_string(cells[i].scheduler), results[i].summary);
        seeds_by_row.push_back(cells[i].seed);
        manifest_runs.push_back({{"dir", run_dir_name(cells[i].scheduler, cells[i].seed)},
                                 {"scheduler", to_string(cells[i].scheduler)},
                                 {"seed", cells[i].seed}});
        diag << run_dir_name(cells[i].scheduler, cells[i].seed) << ": total "
             << results[i].summary.throughput_total << ", mean "
             << fmt4(results[i].summary.mean_latency_ms) << " ms, cold "
             << fmt4(results[i].summary.cold_start_rate) << ", cv "
             << fmt4(results[i].summary.load_cv) << ", overhead "
             << fmt4(results[i].stats.mean_decision_wallclock_ms) << " ms\n";
    }

    try {
        write_file(plan.out_dir / "summary.csv", summary_csv(rows, seeds_by_row));
        json manifest;
        manifest["config"] = plan.config_path.string();
        manifest["runs"] = manifest_runs;
        write_file(plan.out_dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return 1;
    }
    diag << "wrote " << cells.size() << " runs to " << plan.out_dir.string() << "\n";
    return 0;
}

int cmd_validate(const std::filesystem::path& config_path, std::ostream& diag) {
    RunConfig config;
    try {
        config = load_config(config_path);
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return 1;
    }
    const std::vector<std::string> violations = validate_run_config(config);
    if (!violations.empty()) {
        diag << "invalid config " << config_path.string() << ":\n";
        for (const std::string& v : violations) {
            diag << "  - " << v << "\n";
        }
        return 1;
    }
    diag << "ok: " << config_path.string() << "\n";
    return 0;
}

int cmd_replay(const ExperimentPlan& plan, std::ostream& diag) {
    RunConfig base;
    try {
        base = load_config(plan.config_path);
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return 1;
    }
    const std::vector<std::string> violations = validate_run_config(base);
    if (!violations.empty()) {
        diag << "error: invalid config\n";
        return 1;
    }

    const std::vector<MatrixCell> cells = build_matrix(base, plan);
    std::vector<char> ok(cells.size(), 0);
    try {
        parallel_for(cells.size(), plan.parallelism, [&](std::size_t i) {
            const RunConfig config = cell_config(base, cells[i]);
            const EventLog log = run(config.cluster, config.workload);
            ok[i] = replay_check(log, config.cluster, config.workload) ? 1 : 0;
        });
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return 1;
    }

    bool all_ok = true;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        diag << run_dir_name(cells[i].scheduler, cells[i].seed) << ": "
             << (ok[i] ? "deterministic" : "MISMATCH") << "\n";
        all_ok = all_ok && ok[i];
    }
    return all_ok ? 0 : 2;
}

int cmd_report(const std::filesystem::path& out_dir, std::ostream& diag) {
    json manifest;
    try {
        manifest = json::parse(read_file(out_dir / "manifest.json"));
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return 1;
    }

    std::vector<std::pair<std::string, MetricsSummary>> rows;
    std::vector<std::uint64_t> seeds_by_row;
    try {
        for (const json& entry : manifest.at("runs")) {
            const std::filesystem::path dir = out_dir / entry.at("dir").get<std::string>();
            const EventLog log = read_run_log(dir);
            const std::vector<StageBounds> stages = read_run_stages(dir);
            rows.emplace_back(entry.at("scheduler").get<std::string>(), summarize(log, stages));
            seeds_by_row.push_back(entry.at("seed").get<std::uint64_t>());
        }
        write_file(out_dir / "summary.csv", summary_csv(rows, seeds_by_row));
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return 1;
    }
    diag << "rebuilt summary.csv from " << rows.size() << " stored runs\n";
    return 0;
}

} // namespace faaslab
