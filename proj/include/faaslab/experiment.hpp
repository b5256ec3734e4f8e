#pragma once

#include "faaslab/config.hpp"
#include "faaslab/engine.hpp"
#include "faaslab/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace faaslab {

/// A scheduler x seed matrix over one base configuration. Every scheduler
/// sees the same seeds, so within a seed the virtual-user draw sequences
/// (function choices and think times) are identical across schedulers.
struct ExperimentPlan {
    std::filesystem::path config_path;
    std::vector<SchedulerKind> schedulers; ///< Empty: use the config's scheduler.
    std::vector<std::uint64_t> seeds;      ///< Empty: use the config's seed.
    std::filesystem::path out_dir;
    unsigned parallelism = 1;
};

/// "N" -> seeds 1..N; "a,b,c" -> exactly those seeds.
std::vector<std::uint64_t> parse_seeds(const std::string& text);
std::vector<SchedulerKind> parse_scheduler_list(const std::string& text);

std::string run_dir_name(SchedulerKind scheduler, std::uint64_t seed);

/// Writes requests.csv, assignments.csv, sandbox_events.csv, cdf.csv and
/// meta.json for one run.
void write_run_artifacts(const std::filesystem::path& dir, const EventLog& log,
                         std::span<const StageBounds> stages, SchedulerKind scheduler,
                         std::uint64_t seed);

/// Reconstructs an EventLog from a run directory written by
/// write_run_artifacts. Metrics computed on the result match the original
/// run exactly (timestamps round-trip through the CSV text).
EventLog read_run_log(const std::filesystem::path& dir);

std::vector<StageBounds> read_run_stages(const std::filesystem::path& dir);

/// One summary.csv row per run, in matrix order.
std::string summary_csv(const std::vector<std::pair<std::string, MetricsSummary>>& rows,
                        const std::vector<std::uint64_t>& seeds_by_row);

/// Executes the matrix and writes all artifacts. Returns a process exit
/// code; diagnostics go to `diag`.
int cmd_run(const ExperimentPlan& plan, std::ostream& diag);

/// Config check only.
int cmd_validate(const std::filesystem::path& config_path, std::ostream& diag);

/// Runs every matrix cell twice and compares the event logs field by field.
int cmd_replay(const ExperimentPlan& plan, std::ostream& diag);

/// Recomputes summary.csv from the stored per-run logs.
int cmd_report(const std::filesystem::path& out_dir, std::ostream& diag);

} // namespace faaslab
