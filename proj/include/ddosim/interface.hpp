#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "ddosim/traffic.hpp"

namespace ddosim {

/// One queued request, tagged with its origin and admission slot so that
/// per-source purging and FIFO checks stay observable.
struct Packet {
    std::uint32_t source = 0;
    std::int64_t slot = 0;
};

struct AdmitResult {
    std::uint64_t enqueued = 0;
    std::uint64_t dropped = 0;   // overflow tail drops
    std::uint64_t filtered = 0;  // discarded by the installed filter rules
};

/// Sliding-window averages; absent until the respective window has filled.
struct WindowSnapshot {
    std::optional<double> lambda_short;
    std::optional<double> lambda_long;
};

/// Server-side interface state for one run: the two-tier FIFO buffer with
/// service, the short/long traffic windows, per-source accounting, and the
/// filter set. Single-owner, mutated one slot at a time in the fixed order
/// admit -> service -> update_windows.
class InterfaceState {
public:
    InterfaceState(std::uint32_t n_sources, std::uint64_t l1, std::uint64_t l2, double mu,
                   std::uint32_t w_s, std::uint32_t w_l, std::uint32_t history_slots);

    /// Filters, enqueues up to capacity, tail-drops the rest. Records the
    /// full per-source arrival counts (admitted or not) in the ledger.
    AdmitResult admit_slot(const SlotArrivals& arrivals);

    /// Serves min(occupancy, mu) packets in FIFO order. Fractional service
    /// capacity carries over to the next slot; idle capacity does not.
    std::uint64_t service_slot(std::vector<Packet>* drained = nullptr);

    /// Advances the slot clock and both window rings with this slot's total.
    WindowSnapshot update_windows(std::uint64_t total);

    /// The long-window average as it stood `lag` slots before the last
    /// completed slot. Throws on insufficient history.
    double lambda_long_at_lag(std::uint32_t lag) const;

    /// The `count` per-slot totals for slots (now-lag-count, now-lag].
    std::vector<double> recent_totals(std::uint32_t lag, std::uint32_t count) const;

    /// Mean offered packets per slot for every source over [from, to),
    /// sorted by id; silent sources omitted (rate 0).
    std::vector<std::pair<std::uint32_t, double>> per_source_rates(std::int64_t from,
                                                                   std::int64_t to) const;

    /// Installs filter rules for ids and deletes their queued packets.
    /// Returns the number of packets purged. Idempotent per id.
    std::uint64_t purge_and_filter(const std::vector<std::uint32_t>& ids);

    bool is_filtered(std::uint32_t id) const { return filtered_[id]; }
    std::uint64_t occupancy() const { return queue_.size(); }
    std::uint64_t dropped_total() const { return dropped_total_; }
    std::uint64_t capacity() const { return l1_ + l2_; }
    std::uint64_t l1() const { return l1_; }
    std::uint64_t l2() const { return l2_; }
    std::uint32_t n_sources() const { return static_cast<std::uint32_t>(filtered_.size()); }
    /// Index of the last completed slot, -1 before the first update_windows.
    std::int64_t now() const { return next_slot_ - 1; }

    /// Slot of the first packet ever seen from the source, if any.
    std::optional<std::int64_t> first_seen(std::uint32_t id) const;
    std::uint64_t cumulative_count(std::uint32_t id) const { return cumulative_[id]; }
    const std::deque<Packet>& queue() const { return queue_; }
    std::uint32_t window_short() const { return w_s_; }
    std::uint32_t window_long() const { return w_l_; }

private:
    struct SlotRecord {
        std::int64_t slot = 0;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> arrivals;
    };

    std::uint64_t l1_;
    std::uint64_t l2_;
    double mu_;
    double service_carry_ = 0.0;
    std::uint32_t w_s_;
    std::uint32_t w_l_;
    std::uint32_t history_slots_;

    std::deque<Packet> queue_;
    std::uint64_t dropped_total_ = 0;
    std::int64_t next_slot_ = 0;

    std::deque<double> totals_;  // per-slot totals fed to the windows
    double short_sum_ = 0.0;
    double long_sum_ = 0.0;

    std::deque<SlotRecord> ledger_;  // offered per-source counts, recent slots
    std::vector<std::int64_t> first_seen_;
    std::vector<std::uint64_t> cumulative_;
    std::vector<bool> filtered_;
};

}  // namespace ddosim
