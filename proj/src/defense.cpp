#include "ddosim/defense.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

namespace ddosim {

std::string_view detector_name(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::buffer_full: return "buffer_full";
        case DetectorKind::jump: return "jump";
        case DetectorKind::statistical: return "statistical";
    }
    return "?";
}

std::optional<DetectionReport> detect_buffer_full(const InterfaceState& state, std::int64_t slot) {
    if (state.occupancy() < state.l1()) return std::nullopt;
    DetectionReport rep;
    rep.detected = true;
    rep.t_hat = slot;
    rep.method = DetectorKind::buffer_full;
    return rep;
}

bool detect_jump(double lambda_short, double lambda_long, double r) {
    return lambda_short > (1.0 + r) * lambda_long;
}

DetectionReport detect_statistical(std::span<const double> baseline,
                                   std::span<const double> current, double alpha) {
    if (baseline.size() < 5 || current.size() < 5) {
        throw std::invalid_argument("detect_statistical: both samples need n >= 5");
    }
    const TestResult ks = ks_normality_test(baseline, 0.05);
    if (ks.reject_null) {
        throw std::runtime_error("baseline not normal - use approximate detectors");
    }

    DetectionStats st;
    st.baseline_mean = sample_mean(baseline);
    st.baseline_std = sample_std(baseline);
    st.mpar_threshold = upper_confidence_bound(baseline, 0.025);
    st.current_mean = sample_mean(current);
    st.mean_exceeded = st.current_mean > st.mpar_threshold;

    const TestResult t = pooled_t(baseline, current, alpha);
    st.t_value = t.statistic;
    st.t_reject = t.reject_null;
    const TestResult lev = levene_test(baseline, current, alpha);
    st.levene_w = lev.statistic;
    st.levene_reject = lev.reject_null;

    DetectionReport rep;
    rep.method = DetectorKind::statistical;
    rep.detected = st.mean_exceeded && (st.t_reject || st.levene_reject);
    rep.statistics = st;
    return rep;
}

double estimate_attack_rate(double lambda_r_total, double lambda_long_lagged) {
    if (lambda_r_total < 0.0 || lambda_long_lagged < 0.0) {
        throw std::domain_error("estimate_attack_rate: rates must be >= 0");
    }
    return std::max(0.0, lambda_r_total - lambda_long_lagged);
}

IdentificationResult identify_ranked_subset(
    std::span<const std::pair<std::uint32_t, double>> rates, double lambda_a_bar,
    const std::vector<std::uint32_t>& prior_active) {
    const std::unordered_set<std::uint32_t> prior(prior_active.begin(), prior_active.end());
    std::vector<std::pair<std::uint32_t, double>> ranked(rates.begin(), rates.end());
    std::erase_if(ranked, [](const auto& e) { return e.second <= 0.0; });
    std::sort(ranked.begin(), ranked.end(), [&prior](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        const bool a_prior = prior.count(a.first) > 0;
        const bool b_prior = prior.count(b.first) > 0;
        if (a_prior != b_prior) return b_prior;
        return a.first < b.first;
    });

    IdentificationResult res;
    res.method = IdMethod::ranked_subset;
    res.lambda_a_bar = lambda_a_bar;
    double cumulative = 0.0;
    std::size_t taken = 0;
    for (const auto& [id, rate] : ranked) {
        if (cumulative + rate > lambda_a_bar) break;
        cumulative += rate;
        res.suspects.push_back(id);
        ++taken;
    }
    res.all_candidates = taken == ranked.size();
    std::sort(res.suspects.begin(), res.suspects.end());
    return res;
}

IdentificationResult identify_exclude_prior(
    std::span<const std::pair<std::uint32_t, double>> rates,
    const std::vector<std::uint32_t>& prior_active, double lambda_a_bar) {
    const std::unordered_set<std::uint32_t> prior(prior_active.begin(), prior_active.end());
    std::vector<std::pair<std::uint32_t, double>> candidates;
    candidates.reserve(rates.size());
    for (const auto& e : rates) {
        if (!prior.count(e.first)) candidates.push_back(e);
    }
    IdentificationResult res = identify_ranked_subset(candidates, lambda_a_bar);
    res.method = IdMethod::exclude_prior;
    return res;
}

std::uint64_t disrupt(const IdentificationResult& result, InterfaceState& state) {
    return state.purge_and_filter(result.suspects);
}

std::int64_t compute_timeout(std::uint64_t l2, double mu, double lambda_long_lagged, double d) {
    if (mu <= lambda_long_lagged) {
        throw std::runtime_error("compute_timeout: post-filter service rate insufficient");
    }
    if (l2 == 0) return 0;
    return static_cast<std::int64_t>(
        std::ceil(d * static_cast<double>(l2) / (mu - lambda_long_lagged)));
}

std::optional<std::uint32_t> next_escalation_target(
    std::span<const std::pair<std::uint32_t, double>> rates, const InterfaceState& state) {
    std::optional<std::uint32_t> best;
    double best_rate = 0.0;
    for (const auto& [id, rate] : rates) {
        if (rate <= 0.0 || state.is_filtered(id)) continue;
        if (!best || rate > best_rate || (rate == best_rate && id < *best)) {
            best = id;
            best_rate = rate;
        }
    }
    return best;
}

RestorationOutcome verify_restoration(InterfaceState& state, std::int64_t t_out,
                                      std::span<const std::pair<std::uint32_t, double>> rates,
                                      const std::function<void()>& advance_slot) {
    RestorationOutcome out;
    out.t_out_used = t_out;
    std::int64_t waited = 0;
    while (true) {
        if (state.occupancy() <= state.l1()) {
            out.restored = true;
            return out;
        }
        if (waited >= t_out) {
            const auto target = next_escalation_target(rates, state);
            if (!target) throw std::runtime_error("verify_restoration: restoration failed");
            state.purge_and_filter({*target});
            out.extra_filtered.push_back(*target);
            waited = 0;
            continue;  // the purge itself may already restore the level
        }
        advance_slot();
        ++waited;
    }
}

// --- event log ---------------------------------------------------------

void EventLog::add(std::int64_t slot, std::string_view kind,
                   std::initializer_list<std::pair<std::string_view, std::string>> fields) {
    text_ += num(slot);
    text_ += '\t';
    text_ += kind;
    for (const auto& [k, v] : fields) {
        text_ += '\t';
        text_ += k;
        text_ += '=';
        text_ += v;
    }
    text_ += '\n';
}

std::string EventLog::num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string EventLog::num(std::int64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%" PRId64, v);
    return buf;
}

std::string EventLog::num(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%" PRIu64, v);
    return buf;
}

std::string EventLog::id_list(std::span<const std::uint32_t> ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(ids[i]);
    }
    return out;
}

// --- pipeline ----------------------------------------------------------

// The confirmation tests repeat every slot of every run, so the configured
// level is spread over a whole repeated-experiment campaign; per-test alpha
// then keeps the campaign quiet in the absence of an attack while the attack
// signal itself is orders of magnitude stronger than either critical value.
constexpr double kCampaignRuns = 500.0;

Pipeline::Pipeline(const ScenarioConfig& cfg, const PipelineOptions& opts)
    : cfg_(cfg), opts_(opts) {
    const double family = static_cast<double>(std::max<std::int64_t>(1, cfg.total_slots())) *
                          kCampaignRuns;
    confirm_alpha_ = cfg.alpha / family;
}

std::optional<std::int64_t> Pipeline::first_fire(DetectorKind kind) const {
    return fires_[static_cast<int>(kind)];
}

bool Pipeline::statistical_fires(const InterfaceState& state, std::int64_t slot, EventLog& log,
                                 DetectionReport* report) {
    // The tests need real samples on both sides.
    if (cfg_.w_s < 5 || cfg_.w_l < 5) return false;
    // Needs the short window filled and a full long window ending c slots back.
    const std::int64_t have = state.now() + 1;
    if (have < static_cast<std::int64_t>(cfg_.w_s) ||
        have < static_cast<std::int64_t>(cfg_.c) + cfg_.w_l) {
        return false;
    }
    const std::vector<double> baseline = state.recent_totals(cfg_.c, cfg_.w_l);
    const std::vector<double> current = state.recent_totals(0, cfg_.w_s);
    if (sample_std(baseline) <= 0.0) return false;

    const TestResult gate = ks_normality_test(baseline, 0.05);
    if (gate.reject_null) {
        if (!gate_failure_logged_) {
            log.add(slot, "stat_gate_fail",
                    {{"ks_stat", EventLog::num(gate.statistic)},
                     {"p", EventLog::num(gate.p_value.value_or(0.0))}});
            gate_failure_logged_ = true;
        }
        return false;
    }
    DetectionReport rep = detect_statistical(baseline, current, confirm_alpha_);
    if (rep.detected) {
        rep.t_hat = slot;
        if (report) *report = rep;
        return true;
    }
    return false;
}

void Pipeline::observe_detectors(InterfaceState& state, std::int64_t slot, EventLog& log) {
    auto& buffer_fire = fires_[static_cast<int>(DetectorKind::buffer_full)];
    auto& jump_fire = fires_[static_cast<int>(DetectorKind::jump)];
    auto& stat_fire = fires_[static_cast<int>(DetectorKind::statistical)];

    if (!buffer_fire) {
        if (auto rep = detect_buffer_full(state, slot)) {
            buffer_fire = slot;
            log.add(slot, "detect",
                    {{"method", "buffer_full"},
                     {"occupancy", EventLog::num(state.occupancy())}});
        }
    }
    if (!jump_fire) {
        const std::int64_t have = state.now() + 1;
        if (have >= static_cast<std::int64_t>(std::max(cfg_.w_s, cfg_.w_l))) {
            const auto short_win = state.recent_totals(0, cfg_.w_s);
            const auto long_win = state.recent_totals(0, cfg_.w_l);
            double s = 0.0, l = 0.0;
            for (double v : short_win) s += v;
            for (double v : long_win) l += v;
            const double lambda_short = s / cfg_.w_s;
            const double lambda_long = l / cfg_.w_l;
            if (detect_jump(lambda_short, lambda_long, cfg_.r)) {
                jump_fire = slot;
                log.add(slot, "detect",
                        {{"method", "jump"},
                         {"lambda_short", EventLog::num(lambda_short)},
                         {"lambda_long", EventLog::num(lambda_long)},
                         {"r", EventLog::num(cfg_.r)}});
            }
        }
    }
    if (!stat_fire) {
        DetectionReport rep;
        if (statistical_fires(state, slot, log, &rep)) {
            stat_fire = slot;
            const DetectionStats& st = *rep.statistics;
            log.add(slot, "detect",
                    {{"method", "statistical"},
                     {"baseline_mean", EventLog::num(st.baseline_mean)},
                     {"baseline_std", EventLog::num(st.baseline_std)},
                     {"mpar", EventLog::num(st.mpar_threshold)},
                     {"current_mean", EventLog::num(st.current_mean)},
                     {"t", EventLog::num(st.t_value)},
                     {"levene_w", EventLog::num(st.levene_w)},
                     {"t_reject", st.t_reject ? "1" : "0"},
                     {"levene_reject", st.levene_reject ? "1" : "0"}});
        }
    }
}

void Pipeline::run_identification(InterfaceState& state, std::int64_t slot, EventLog& log) {
    const std::int64_t t_hat = *t_hat_;
    measured_rates_ = state.per_source_rates(t_hat, t_hat + cfg_.delta_hat);

    double total_rate = 0.0;
    for (const auto& [id, rate] : measured_rates_) total_rate += rate;

    // Long-window average as it stood c slots before the detection estimate.
    // A detection that fires before that window ever filled falls back to the
    // oldest average on record.
    std::uint32_t lag = static_cast<std::uint32_t>(slot - (t_hat - cfg_.c));
    const std::int64_t have = state.now() + 1;
    const std::int64_t max_lag = have - cfg_.w_l;
    double lambda_long_lagged;
    std::vector<double> lagged_window;
    if (max_lag >= 0) {
        lag = std::min<std::uint32_t>(lag, static_cast<std::uint32_t>(max_lag));
        lambda_long_lagged = state.lambda_long_at_lag(lag);
        lagged_window = state.recent_totals(lag, cfg_.w_l);
    } else {
        lag = 0;
        lagged_window = state.recent_totals(0, static_cast<std::uint32_t>(have));
        lambda_long_lagged = sample_mean(lagged_window);
    }
    const double baseline_sd = lagged_window.size() >= 2 ? sample_std(lagged_window) : 0.0;
    const double lambda_a_est = estimate_attack_rate(total_rate, lambda_long_lagged);

    // One-sided allowance for the sampling error of the two rate estimates;
    // without it the bound cuts the weakest true attacker about half the time.
    const double se = std::sqrt(std::max(0.0, total_rate) / cfg_.delta_hat +
                                baseline_sd * baseline_sd / cfg_.w_l);
    const double allowance = normal_quantile(1.0 - cfg_.alpha) * se;
    const double bound = lambda_a_est + allowance;

    const bool use_exclude =
        opts_.id_method == IdMethodChoice::exclude_prior ||
        (opts_.id_method == IdMethodChoice::automatic && opts_.trigger.statistical);

    // Sources already talking well before the detection estimate cannot be
    // part of the attack wave; w_s bounds the plausible detection delay.
    const std::int64_t cutoff = std::max<std::int64_t>(0, t_hat - cfg_.w_s);
    std::vector<std::uint32_t> prior;
    for (std::uint32_t id = 0; id < state.n_sources(); ++id) {
        const auto seen = state.first_seen(id);
        if (seen && *seen < cutoff) prior.push_back(id);
    }

    if (use_exclude) {
        identification_ = identify_exclude_prior(measured_rates_, prior, bound);

        // Arm the standing rule: a source this quiet during measurement that
        // only shows up later still matches the attack-wave criterion. The
        // candidates the rate bound deliberately spared stay exempt.
        new_source_rule_armed_ = true;
        prior_cutoff_ = cutoff;
        bound_spared_.assign(state.n_sources(), false);
        std::vector<bool> suspect(state.n_sources(), false);
        for (std::uint32_t id : identification_->suspects) suspect[id] = true;
        for (const auto& [id, rate] : measured_rates_) {
            if (rate > 0.0 && !suspect[id]) bound_spared_[id] = true;
        }
    } else {
        identification_ = identify_ranked_subset(measured_rates_, bound, prior);
    }

    log.add(slot, "identify",
            {{"method", use_exclude ? "exclude_prior" : "ranked_subset"},
             {"lambda_r", EventLog::num(total_rate)},
             {"lambda_long_lagged", EventLog::num(lambda_long_lagged)},
             {"lambda_a_est", EventLog::num(lambda_a_est)},
             {"allowance", EventLog::num(allowance)},
             {"bound", EventLog::num(bound)},
             {"suspects", EventLog::num(static_cast<std::uint64_t>(identification_->suspects.size()))},
             {"all_candidates", identification_->all_candidates ? "1" : "0"},
             {"ids", EventLog::id_list(identification_->suspects)}});

    const std::uint64_t purged = disrupt(*identification_, state);
    log.add(slot, "disrupt",
            {{"purged", EventLog::num(purged)},
             {"occupancy", EventLog::num(state.occupancy())}});

    try {
        t_out_ = compute_timeout(cfg_.l2, cfg_.mu, lambda_long_lagged, cfg_.d);
    } catch (const std::runtime_error&) {
        // Even the pre-attack load saturates the server; fall back to the
        // longest plausible drain horizon instead of aborting the run.
        t_out_ = cfg_.total_slots();
        log.add(slot, "timeout_fallback", {{"t_out", EventLog::num(t_out_)}});
    }
    escalate_deadline_ = slot + t_out_;
    phase_ = Phase::restoring;
}

void Pipeline::apply_new_source_rule(InterfaceState& state, std::int64_t slot, EventLog& log) {
    if (!new_source_rule_armed_) return;
    for (std::uint32_t id = 0; id < state.n_sources(); ++id) {
        if (state.is_filtered(id) || bound_spared_[id]) continue;
        const auto seen = state.first_seen(id);
        if (!seen || *seen < prior_cutoff_) continue;
        const std::uint64_t purged = state.purge_and_filter({id});
        late_suspects_.push_back(id);
        log.add(slot, "identify_late",
                {{"id", std::to_string(id)},
                 {"first_seen", EventLog::num(*seen)},
                 {"purged", EventLog::num(purged)}});
    }
}

void Pipeline::on_slot_end(InterfaceState& state, std::int64_t slot, EventLog& log) {
    observe_detectors(state, slot, log);
    apply_new_source_rule(state, slot, log);

    switch (phase_) {
        case Phase::monitoring: {
            std::optional<std::int64_t> earliest;
            const DetectorSet& t = opts_.trigger;
            const auto consider = [&](DetectorKind kind, bool enabled) {
                const auto f = fires_[static_cast<int>(kind)];
                if (enabled && f && (!earliest || *f < *earliest)) earliest = f;
            };
            consider(DetectorKind::buffer_full, t.buffer_full);
            consider(DetectorKind::jump, t.jump);
            consider(DetectorKind::statistical, t.statistical);
            if (earliest) {
                t_hat_ = earliest;
                measure_until_ = *t_hat_ + cfg_.delta_hat - 1;
                phase_ = Phase::measuring;
                log.add(slot, "pipeline_armed",
                        {{"t_hat", EventLog::num(*t_hat_)},
                         {"measure_until", EventLog::num(measure_until_)}});
            }
            if (phase_ != Phase::measuring || slot < measure_until_) break;
            [[fallthrough]];
        }
        case Phase::measuring: {
            if (slot < measure_until_) break;
            run_identification(state, slot, log);
            [[fallthrough]];
        }
        case Phase::restoring: {
            if (state.occupancy() <= state.l1()) {
                restored_slot_ = slot;
                log.add(slot, "restored",
                        {{"occupancy", EventLog::num(state.occupancy())},
                         {"t_out", EventLog::num(t_out_)},
                         {"escalations",
                          EventLog::num(static_cast<std::uint64_t>(escalated_.size()))}});
                phase_ = Phase::done;
                break;
            }
            if (slot >= escalate_deadline_) {
                const auto target = next_escalation_target(measured_rates_, state);
                if (!target) {
                    restoration_failed_ = true;
                    log.add(slot, "restore_failed",
                            {{"occupancy", EventLog::num(state.occupancy())}});
                    phase_ = Phase::done;
                    break;
                }
                const std::uint64_t purged = state.purge_and_filter({*target});
                escalated_.push_back(*target);
                log.add(slot, "escalate",
                        {{"id", std::to_string(*target)},
                         {"purged", EventLog::num(purged)},
                         {"occupancy", EventLog::num(state.occupancy())}});
                escalate_deadline_ = slot + t_out_;
                if (state.occupancy() <= state.l1()) {
                    restored_slot_ = slot;
                    log.add(slot, "restored",
                            {{"occupancy", EventLog::num(state.occupancy())},
                             {"t_out", EventLog::num(t_out_)},
                             {"escalations",
                              EventLog::num(static_cast<std::uint64_t>(escalated_.size()))}});
                    phase_ = Phase::done;
                }
            }
            break;
        }
        case Phase::done:
            break;
    }
}

}  // namespace ddosim
