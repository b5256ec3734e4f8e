#pragma once

#include "faaslab/domain.hpp"
#include "faaslab/workload.hpp"

#include <filesystem>
#include <string>

namespace faaslab {

/// A complete run description: the cluster plus its workload.
struct RunConfig {
    ClusterConfig cluster;
    WorkloadSpec workload;
};

/// Parses the JSON configuration document. `base_dir` resolves relative
/// trace paths. Throws std::runtime_error with a descriptive message on
/// schema errors; structural invariants are checked separately via
/// validate_config / validate_workload.
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);

/// Reads, parses and resolves a configuration file, including loading a
/// referenced trace.
RunConfig load_config(const std::filesystem::path& path);

/// validate_config + validate_workload in one call.
std::vector<std::string> validate_run_config(const RunConfig& config);

} // namespace faaslab
