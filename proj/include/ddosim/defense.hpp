#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddosim/interface.hpp"
#include "ddosim/stats.hpp"
#include "ddosim/traffic.hpp"

namespace ddosim {

enum class DetectorKind { buffer_full, jump, statistical };

std::string_view detector_name(DetectorKind kind);

/// Everything the statistical detector computed for one decision.
struct DetectionStats {
    double baseline_mean = 0.0;
    double baseline_std = 0.0;
    double mpar_threshold = 0.0;  // upper confidence bound on the normal rate
    double current_mean = 0.0;
    double t_value = 0.0;
    double levene_w = 0.0;
    bool mean_exceeded = false;
    bool t_reject = false;
    bool levene_reject = false;
};

struct DetectionReport {
    bool detected = false;
    std::optional<std::int64_t> t_hat;
    DetectorKind method = DetectorKind::buffer_full;
    std::optional<DetectionStats> statistics;
};

enum class IdMethod { ranked_subset, exclude_prior };

struct IdentificationResult {
    std::vector<std::uint32_t> suspects;  // sorted by id
    double lambda_a_bar = 0.0;            // the bound the subset was filled to
    IdMethod method = IdMethod::ranked_subset;
    bool all_candidates = false;  // bound never bound: every candidate included
};

struct RestorationOutcome {
    bool restored = false;
    std::int64_t t_out_used = 0;
    std::vector<std::uint32_t> extra_filtered;  // escalation order
};

/// Fires once buffer occupancy has reached the normal-operation tier.
std::optional<DetectionReport> detect_buffer_full(const InterfaceState& state, std::int64_t slot);

/// True iff the short-window average exceeds the long one by more than the
/// tolerated jump fraction: lambda_short > (1 + r) * lambda_long.
bool detect_jump(double lambda_short, double lambda_long, double r);

/// The accurate detector: requires the baseline to pass the K-S normality
/// gate at 0.05, then flags an attack when the current mean exceeds the MPAR
/// threshold (upper confidence bound at 0.025) and either the pooled t test
/// or Levene's test rejects at `alpha`.
DetectionReport detect_statistical(std::span<const double> baseline,
                                   std::span<const double> current, double alpha);

/// Aggregate attack-rate estimate: measured total minus the lagged long-window
/// average, floored at zero.
double estimate_attack_rate(double lambda_r_total, double lambda_long_lagged);

/// Largest highest-rate prefix whose combined measured rate stays within the
/// attack-rate bound. rates need not be sorted. Measured-rate ties break
/// toward sources outside prior_active (no pre-attack history implicates a
/// source at equal rate), then toward lower ids. Zero-rate sources are never
/// suspects.
IdentificationResult identify_ranked_subset(
    std::span<const std::pair<std::uint32_t, double>> rates, double lambda_a_bar,
    const std::vector<std::uint32_t>& prior_active = {});

/// Same, after removing every source that was already active before the
/// attack (the prior_active set).
IdentificationResult identify_exclude_prior(
    std::span<const std::pair<std::uint32_t, double>> rates,
    const std::vector<std::uint32_t>& prior_active, double lambda_a_bar);

/// Installs filter rules for the suspects and deletes their queued packets.
std::uint64_t disrupt(const IdentificationResult& result, InterfaceState& state);

/// Conservative restoration timeout ceil(d * l2 / (mu - lambda_long_lagged)),
/// in whole slots. Throws when the post-filter load still saturates service.
std::int64_t compute_timeout(std::uint64_t l2, double mu, double lambda_long_lagged, double d);

/// Highest measured-rate source that is not yet filtered (ties toward the
/// lower id); nullopt when no unfiltered source with traffic remains.
std::optional<std::uint32_t> next_escalation_target(
    std::span<const std::pair<std::uint32_t, double>> rates, const InterfaceState& state);

/// Blocks until the buffer is back at the normal tier: waits up to t_out
/// slots (advance_slot moves the simulation forward by one slot), then
/// filters the highest-rate remaining source and re-waits, repeating until
/// restored. Throws "restoration failed" when sources run out.
RestorationOutcome verify_restoration(InterfaceState& state, std::int64_t t_out,
                                      std::span<const std::pair<std::uint32_t, double>> rates,
                                      const std::function<void()>& advance_slot);

/// Line-oriented run log: `slot<TAB>kind<TAB>key=value<TAB>...` per event.
class EventLog {
public:
    void add(std::int64_t slot, std::string_view kind,
             std::initializer_list<std::pair<std::string_view, std::string>> fields = {});
    const std::string& text() const { return text_; }

    static std::string num(double v);
    static std::string num(std::int64_t v);
    static std::string num(std::uint64_t v);
    static std::string id_list(std::span<const std::uint32_t> ids);

private:
    std::string text_;
};

struct DetectorSet {
    bool buffer_full = true;
    bool jump = true;
    bool statistical = true;
};

enum class IdMethodChoice { automatic, ranked_subset, exclude_prior };

struct PipelineOptions {
    DetectorSet trigger;  // detectors allowed to start the pipeline
    IdMethodChoice id_method = IdMethodChoice::automatic;
};

/// Per-slot driver for the four defense stages. All three detectors run in
/// observation mode every slot (their first firing slots feed the report);
/// the earliest firing among the enabled set starts the measure -> identify
/// -> disrupt -> verify-restoration sequence.
class Pipeline {
public:
    Pipeline(const ScenarioConfig& cfg, const PipelineOptions& opts);

    /// Call once per slot after admit/service/update_windows.
    void on_slot_end(InterfaceState& state, std::int64_t slot, EventLog& log);

    std::optional<std::int64_t> first_fire(DetectorKind kind) const;
    std::optional<std::int64_t> t_hat() const { return t_hat_; }
    const std::optional<IdentificationResult>& identification() const { return identification_; }
    /// Sources filtered by the standing new-source rule after the initial
    /// identification (exclude-prior method only).
    const std::vector<std::uint32_t>& late_suspects() const { return late_suspects_; }
    const std::vector<std::uint32_t>& escalated() const { return escalated_; }
    std::optional<std::int64_t> restored_slot() const { return restored_slot_; }
    bool restoration_failed() const { return restoration_failed_; }

private:
    enum class Phase { monitoring, measuring, restoring, done };

    void observe_detectors(InterfaceState& state, std::int64_t slot, EventLog& log);
    bool statistical_fires(const InterfaceState& state, std::int64_t slot, EventLog& log,
                           DetectionReport* report);
    void run_identification(InterfaceState& state, std::int64_t slot, EventLog& log);
    void apply_new_source_rule(InterfaceState& state, std::int64_t slot, EventLog& log);

    ScenarioConfig cfg_;
    PipelineOptions opts_;
    double confirm_alpha_;  // family-wise level spread over the run's slots

    Phase phase_ = Phase::monitoring;
    std::optional<std::int64_t> fires_[3];
    std::optional<std::int64_t> t_hat_;
    bool gate_failure_logged_ = false;

    std::int64_t measure_until_ = 0;  // last measurement slot (inclusive)
    std::optional<IdentificationResult> identification_;
    std::vector<std::pair<std::uint32_t, double>> measured_rates_;
    std::int64_t t_out_ = 0;
    std::int64_t escalate_deadline_ = 0;
    std::vector<std::uint32_t> escalated_;
    std::optional<std::int64_t> restored_slot_;
    bool restoration_failed_ = false;

    // Standing new-source rule (exclude-prior identification only): sources
    // whose first packet postdates the prior-activity cutoff are filtered on
    // sight for the rest of the run, except those the rate bound spared.
    bool new_source_rule_armed_ = false;
    std::int64_t prior_cutoff_ = 0;
    std::vector<bool> bound_spared_;
    std::vector<std::uint32_t> late_suspects_;
};

}  // namespace ddosim
