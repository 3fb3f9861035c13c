#include "ddosim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "ddosim/stats.hpp"

namespace ddosim {

namespace {

std::uint32_t history_horizon(const ScenarioConfig& cfg) {
    return cfg.w_l + cfg.c + std::max(cfg.w_s, cfg.delta_hat) + 2;
}

// First slot >= t_star from which occupancy stays at or below l1 for w_s
// consecutive recorded slots.
std::optional<std::int64_t> restore_slot(const std::vector<std::uint64_t>& occupancy,
                                         std::int64_t t_star, std::uint64_t l1,
                                         std::uint32_t w_s) {
    const std::int64_t n = static_cast<std::int64_t>(occupancy.size());
    std::int64_t run = 0;
    for (std::int64_t slot = t_star; slot < n; ++slot) {
        run = occupancy[static_cast<std::size_t>(slot)] <= l1 ? run + 1 : 0;
        if (run >= static_cast<std::int64_t>(w_s)) return slot - w_s + 1;
    }
    return std::nullopt;
}

}  // namespace

RunResult run_simulation(const ScenarioConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    const Scenario scenario = build_scenario(cfg);
    const std::uint32_t n_sources = cfg.n_legal + cfg.n_attackers;

    InterfaceState iface(n_sources, cfg.l1, cfg.l2, cfg.mu, cfg.w_s, cfg.w_l,
                         history_horizon(cfg));
    Pipeline pipeline(cfg, opts.pipeline);
    Rng rng(cfg.seed);
    EventLog log;

    RunResult result;
    result.occupancy_by_slot.reserve(static_cast<std::size_t>(scenario.total_slots));
    std::uint64_t max_level = 0;
    std::int64_t max_slot = 0;

    for (std::int64_t slot = 0; slot < scenario.total_slots; ++slot) {
        const SlotArrivals arrivals = generate_slot(scenario.sources, slot, rng);
        const AdmitResult admitted = iface.admit_slot(arrivals);
        iface.service_slot();

        // Peak level is read before the pipeline may purge this slot.
        if (iface.occupancy() > max_level) {
            max_level = iface.occupancy();
            max_slot = slot;
        }

        iface.update_windows(admitted.enqueued + admitted.dropped);
        pipeline.on_slot_end(iface, slot, log);
        result.occupancy_by_slot.push_back(iface.occupancy());
    }

    result.fire_buffer_full = pipeline.first_fire(DetectorKind::buffer_full);
    result.fire_jump = pipeline.first_fire(DetectorKind::jump);
    result.fire_statistical = pipeline.first_fire(DetectorKind::statistical);
    result.identification = pipeline.identification();
    result.late_suspects = pipeline.late_suspects();
    result.escalated = pipeline.escalated();
    result.restoration_failed = pipeline.restoration_failed();

    RunMetrics& m = result.metrics;
    m.dropped_packets = iface.dropped_total();
    m.max_buffer_level = max_level;
    m.max_buffer_slot = max_slot;

    if (result.identification) {
        for (std::uint32_t id : result.identification->suspects) {
            if (scenario.is_attacker(id)) {
                ++m.correctly_identified_attackers;
            } else {
                ++m.filtered_legal_clients;
            }
        }
        for (std::uint32_t id : result.late_suspects) {
            if (scenario.is_attacker(id)) {
                ++m.correctly_identified_attackers;
            } else {
                ++m.filtered_legal_clients;
            }
        }
    }
    for (std::uint32_t id : result.escalated) {
        if (!scenario.is_attacker(id)) ++m.filtered_legal_clients;
    }

    if (scenario.has_attack) {
        if (pipeline.t_hat()) {
            m.detection_time_after_tstar = *pipeline.t_hat() - scenario.attack_start;
            if (*m.detection_time_after_tstar < 0) result.false_alarm = true;
        }
        m.restore_time_after_tstar =
            restore_slot(result.occupancy_by_slot, scenario.attack_start, cfg.l1, cfg.w_s);
        if (m.restore_time_after_tstar) *m.restore_time_after_tstar -= scenario.attack_start;
    } else if (pipeline.t_hat()) {
        result.false_alarm = true;
    }

    log.add(scenario.total_slots - 1, "run_end",
            {{"dropped", EventLog::num(m.dropped_packets)},
             {"max_buffer", EventLog::num(m.max_buffer_level)},
             {"max_buffer_slot", EventLog::num(m.max_buffer_slot)}});
    result.event_log = log.text();
    return result;
}

namespace {

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    s.n = static_cast<std::uint32_t>(values.size());
    if (values.empty()) return s;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    s.mean = sample_mean(values);
    if (values.size() >= 2) {
        s.ci95_halfwidth = 1.959963984540054 * sample_std(values) /
                           std::sqrt(static_cast<double>(values.size()));
    }
    return s;
}

}  // namespace

BatchSummary run_batch(const ScenarioConfig& cfg, std::uint32_t n_runs, std::uint64_t base_seed,
                       const RunOptions& opts, std::vector<RunResult>* per_run) {
    if (n_runs < 2) throw std::invalid_argument("run_batch: need n_runs >= 2");
    if (base_seed + n_runs < base_seed) {
        throw std::invalid_argument("run_batch: seed range wraps; seeds must differ");
    }

    std::vector<double> identified, legal, dropped, max_level, restore, detect;
    for (std::uint32_t i = 0; i < n_runs; ++i) {
        ScenarioConfig run_cfg = cfg;
        run_cfg.seed = base_seed + i;
        RunResult r = run_simulation(run_cfg, opts);
        identified.push_back(r.metrics.correctly_identified_attackers);
        legal.push_back(r.metrics.filtered_legal_clients);
        dropped.push_back(static_cast<double>(r.metrics.dropped_packets));
        max_level.push_back(static_cast<double>(r.metrics.max_buffer_level));
        if (r.metrics.restore_time_after_tstar) {
            restore.push_back(static_cast<double>(*r.metrics.restore_time_after_tstar));
        }
        if (r.metrics.detection_time_after_tstar) {
            detect.push_back(static_cast<double>(*r.metrics.detection_time_after_tstar));
        }
        if (per_run) per_run->push_back(std::move(r));
    }

    BatchSummary summary;
    summary.n_runs = n_runs;
    summary.metrics = {
        {"correctly_identified_attackers", summarize(identified)},
        {"filtered_legal_clients", summarize(legal)},
        {"dropped_packets", summarize(dropped)},
        {"max_buffer_level", summarize(max_level)},
        {"restore_time_after_tstar", summarize(restore)},
        {"detection_time_after_tstar", summarize(detect)},
    };
    return summary;
}

std::vector<SweepRow> sweep_window(const ScenarioConfig& cfg,
                                   const std::vector<std::uint32_t>& ws_values,
                                   const RunOptions& opts) {
    std::vector<SweepRow> rows;
    for (std::uint32_t ws : ws_values) {
        if (ws < 1) throw std::invalid_argument("sweep_window: w_s must be >= 1");
        ScenarioConfig swept = cfg;
        swept.w_s = ws;
        swept.delta_hat = ws;
        SweepRow row;
        row.w_s = ws;
        row.window_exceeds_attack = ws > cfg.attack_len;
        row.metrics = run_simulation(swept, opts).metrics;
        rows.push_back(row);
    }
    return rows;
}

namespace {

constexpr const char* kMetricHeader =
    "correctly_identified_attackers,filtered_legal_clients,dropped_packets,"
    "max_buffer_level,max_buffer_slot,restore_time_after_tstar,detection_time_after_tstar";

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string metrics_row(const RunMetrics& m) {
    std::string row;
    row += std::to_string(m.correctly_identified_attackers);
    row += ',';
    row += std::to_string(m.filtered_legal_clients);
    row += ',';
    row += std::to_string(m.dropped_packets);
    row += ',';
    row += std::to_string(m.max_buffer_level);
    row += ',';
    row += std::to_string(m.max_buffer_slot);
    row += ',';
    if (m.restore_time_after_tstar) row += std::to_string(*m.restore_time_after_tstar);
    row += ',';
    if (m.detection_time_after_tstar) row += std::to_string(*m.detection_time_after_tstar);
    return row;
}

}  // namespace

std::string format_run_report(const std::vector<RunMetrics>& runs) {
    std::string out = std::string("run,") + kMetricHeader + "\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += metrics_row(runs[i]);
        out += '\n';
    }
    return out;
}

std::string format_sweep_report(const std::vector<SweepRow>& rows) {
    std::string out = std::string("w_s,") + kMetricHeader + ",window_exceeds_attack\n";
    for (const SweepRow& row : rows) {
        out += std::to_string(row.w_s);
        out += ',';
        out += metrics_row(row.metrics);
        out += ',';
        out += row.window_exceeds_attack ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string format_batch_report(const BatchSummary& summary) {
    std::string out = "metric,n,min,mean,ci95_halfwidth\n";
    for (const auto& [name, s] : summary.metrics) {
        out += name;
        out += ',';
        out += std::to_string(s.n);
        out += ',';
        out += csv_num(s.min);
        out += ',';
        out += csv_num(s.mean);
        out += ',';
        out += csv_num(s.ci95_halfwidth);
        out += '\n';
    }
    return out;
}

void emit_report(const std::string& contents, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("emit_report: cannot open " + path);
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("emit_report: write failed for " + path);
}

std::vector<RunMetrics> parse_run_report(const std::string& contents) {
    std::istringstream in(contents);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("parse_run_report: empty report");
    if (line != std::string("run,") + kMetricHeader) {
        throw std::runtime_error("parse_run_report: unexpected header");
    }
    std::vector<RunMetrics> runs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cells.size() != 8) throw std::runtime_error("parse_run_report: malformed row");
        RunMetrics m;
        m.correctly_identified_attackers = static_cast<std::uint32_t>(std::stoul(cells[1]));
        m.filtered_legal_clients = static_cast<std::uint32_t>(std::stoul(cells[2]));
        m.dropped_packets = std::stoull(cells[3]);
        m.max_buffer_level = std::stoull(cells[4]);
        m.max_buffer_slot = std::stoll(cells[5]);
        if (!cells[6].empty()) m.restore_time_after_tstar = std::stoll(cells[6]);
        if (!cells[7].empty()) m.detection_time_after_tstar = std::stoll(cells[7]);
        runs.push_back(m);
    }
    return runs;
}

}  // namespace ddosim
