#include "faaslab/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

std::string default_out_dir() {
    if (const char* env = std::getenv("FAAS_SCHED_LAB_OUT")) {
        return env;
    }
    return "results";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FaaS cluster scheduling lab: deterministic simulator and experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string schedulers_arg;
    std::string seeds_arg;
    std::string out_dir = default_out_dir();
    unsigned parallel = 1;

    auto add_matrix_flags = [&](CLI::App* cmd, bool with_out) {
        cmd->add_option("--config", config_path, "configuration file")->required();
        cmd->add_option("--schedulers", schedulers_arg,
                        "comma-separated scheduler list (pull,ch,chbl,rjch,leastconn,random); "
                        "default: the config's scheduler");
        cmd->add_option("--seeds", seeds_arg,
                        "seed count N (runs seeds 1..N) or explicit comma-separated seeds; "
                        "default: the config's seed");
        if (with_out) {
            cmd->add_option("--out", out_dir, "output directory (env FAAS_SCHED_LAB_OUT)");
        }
        cmd->add_option("--parallel", parallel, "max concurrent runs")->check(CLI::PositiveNumber);
    };

    CLI::App* run_cmd = app.add_subcommand("run", "execute a scheduler x seed matrix and write CSV artifacts");
    add_matrix_flags(run_cmd, true);

    CLI::App* validate_cmd = app.add_subcommand("validate", "check a configuration file");
    validate_cmd->add_option("--config", config_path, "configuration file")->required();

    CLI::App* replay_cmd = app.add_subcommand("replay", "determinism gate: run each cell twice and compare");
    add_matrix_flags(replay_cmd, false);

    CLI::App* report_cmd = app.add_subcommand("report", "recompute summary.csv from stored run logs");
    report_cmd->add_option("--out", out_dir, "output directory to read")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) {
            return faaslab::cmd_validate(config_path, std::cout);
        }
        if (report_cmd->parsed()) {
            return faaslab::cmd_report(out_dir, std::cout);
        }

        faaslab::ExperimentPlan plan;
        plan.config_path = config_path;
        if (!schedulers_arg.empty()) {
            plan.schedulers = faaslab::parse_scheduler_list(schedulers_arg);
        }
        if (!seeds_arg.empty()) {
            plan.seeds = faaslab::parse_seeds(seeds_arg);
        }
        plan.out_dir = out_dir;
        plan.parallelism = parallel;

        if (run_cmd->parsed()) {
            return faaslab::cmd_run(plan, std::cout);
        }
        return faaslab::cmd_replay(plan, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
