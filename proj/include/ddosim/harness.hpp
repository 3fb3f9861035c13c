#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddosim/defense.hpp"
#include "ddosim/traffic.hpp"

namespace ddosim {

/// The observables reported for one seeded run.
struct RunMetrics {
    std::uint32_t correctly_identified_attackers = 0;
    std::uint32_t filtered_legal_clients = 0;
    std::uint64_t dropped_packets = 0;
    std::uint64_t max_buffer_level = 0;
    std::int64_t max_buffer_slot = 0;
    std::optional<std::int64_t> restore_time_after_tstar;
    std::optional<std::int64_t> detection_time_after_tstar;
};

struct RunOptions {
    PipelineOptions pipeline;
};

/// Metrics plus everything the batch/acceptance layers inspect.
struct RunResult {
    RunMetrics metrics;
    std::string event_log;
    std::optional<std::int64_t> fire_buffer_full;
    std::optional<std::int64_t> fire_jump;
    std::optional<std::int64_t> fire_statistical;
    std::optional<IdentificationResult> identification;
    std::vector<std::uint32_t> late_suspects;
    std::vector<std::uint32_t> escalated;
    bool restoration_failed = false;
    bool false_alarm = false;  // a trigger-enabled detector fired outside any attack
    std::vector<std::uint64_t> occupancy_by_slot;
};

/// Runs the full slot loop (generate, admit, service, windows, defense
/// pipeline) and scores the outcome against the scenario's ground truth.
RunResult run_simulation(const ScenarioConfig& cfg, const RunOptions& opts = {});

struct MetricSummary {
    std::uint32_t n = 0;  // runs where the metric was present
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double ci95_halfwidth = 0.0;
};

struct BatchSummary {
    std::uint32_t n_runs = 0;
    // Canonical metric order, named exactly like the RunMetrics fields.
    std::vector<std::pair<std::string, MetricSummary>> metrics;
};

/// Repeats the scenario with seeds base_seed .. base_seed + n_runs - 1 and
/// aggregates min / mean / normal-approximation 95% confidence halfwidths.
BatchSummary run_batch(const ScenarioConfig& cfg, std::uint32_t n_runs, std::uint64_t base_seed,
                       const RunOptions& opts = {},
                       std::vector<RunResult>* per_run = nullptr);

struct SweepRow {
    std::uint32_t w_s = 0;
    bool window_exceeds_attack = false;
    RunMetrics metrics;
};

/// One run per short-window length, with the measurement horizon tied to it.
std::vector<SweepRow> sweep_window(const ScenarioConfig& cfg,
                                   const std::vector<std::uint32_t>& ws_values,
                                   const RunOptions& opts = {});

// CSV reports. The metric columns carry the RunMetrics field names; absent
// optional values serialize as empty cells. I/O failures throw with the path.
std::string format_run_report(const std::vector<RunMetrics>& runs);
std::string format_sweep_report(const std::vector<SweepRow>& rows);
std::string format_batch_report(const BatchSummary& summary);
void emit_report(const std::string& contents, const std::string& path);

/// Parses the output of format_run_report (round-trip safe).
std::vector<RunMetrics> parse_run_report(const std::string& contents);

}  // namespace ddosim
