// Command-line front end: replay one run, a seeded batch, or a window sweep
// from a scenario config file and emit the metrics as CSV.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddosim/harness.hpp"

namespace {

ddosim::DetectorSet parse_detectors(const std::vector<std::string>& names) {
    if (names.empty()) return {};
    ddosim::DetectorSet set{false, false, false};
    for (const std::string& n : names) {
        if (n == "buffer") {
            set.buffer_full = true;
        } else if (n == "jump") {
            set.jump = true;
        } else if (n == "stat") {
            set.statistical = true;
        } else {
            throw ddosim::ConfigError("unknown detector `" + n + "` (use buffer,jump,stat)");
        }
    }
    return set;
}

void write_out(const std::string& contents, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << contents;
    } else {
        ddosim::emit_report(contents, out_path);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete-time DDoS defense simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::vector<std::string> detector_names;
    std::optional<std::uint64_t> seed;
    std::uint32_t runs = 100;
    std::vector<std::uint32_t> ws_values;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "scenario config file")->required();
        cmd->add_option("--seed", seed, "override the config seed (batch: base seed)");
        cmd->add_option("--detectors", detector_names,
                        "detectors allowed to trigger the pipeline (buffer,jump,stat)")
            ->delimiter(',');
        cmd->add_option("--out", out_path, "write the CSV report here (default: stdout)");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "single seeded run");
    add_common(cmd_run);
    CLI::App* cmd_batch = app.add_subcommand("batch", "aggregate statistics over many seeds");
    add_common(cmd_batch);
    cmd_batch->add_option("--runs", runs, "number of seeded runs")->check(CLI::Range(2u, 1000000u));
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "one run per short-window length");
    add_common(cmd_sweep);
    cmd_sweep->add_option("--ws", ws_values, "short-window lengths to sweep")
        ->delimiter(',')
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        ddosim::ScenarioConfig cfg = ddosim::load_scenario_config(config_path);
        if (seed) cfg.seed = *seed;
        cfg.validate();

        ddosim::RunOptions opts;
        if (!detector_names.empty()) opts.pipeline.trigger = parse_detectors(detector_names);

        if (cmd_run->parsed()) {
            ddosim::RunResult result = ddosim::run_simulation(cfg, opts);
            std::cerr << result.event_log;
            write_out(ddosim::format_run_report({result.metrics}), out_path);
        } else if (cmd_batch->parsed()) {
            ddosim::BatchSummary summary = ddosim::run_batch(cfg, runs, cfg.seed, opts);
            write_out(ddosim::format_batch_report(summary), out_path);
        } else if (cmd_sweep->parsed()) {
            auto rows = ddosim::sweep_window(cfg, ws_values, opts);
            for (const auto& row : rows) {
                if (row.window_exceeds_attack) {
                    std::cerr << "warning: w_s=" << row.w_s << " window exceeds attack duration\n";
                }
            }
            write_out(ddosim::format_sweep_report(rows), out_path);
        }
    } catch (const ddosim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
