#include "ddosim/interface.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ddosim {

InterfaceState::InterfaceState(std::uint32_t n_sources, std::uint64_t l1, std::uint64_t l2,
                               double mu, std::uint32_t w_s, std::uint32_t w_l,
                               std::uint32_t history_slots)
    : l1_(l1),
      l2_(l2),
      mu_(mu),
      w_s_(w_s),
      w_l_(w_l),
      history_slots_(std::max(history_slots, std::max(w_s, w_l))),
      first_seen_(n_sources, -1),
      cumulative_(n_sources, 0),
      filtered_(n_sources, false) {
    if (mu <= 0.0) throw std::invalid_argument("InterfaceState: mu must be > 0");
    if (w_s < 1 || w_l < 1) throw std::invalid_argument("InterfaceState: window sizes must be >= 1");
}

AdmitResult InterfaceState::admit_slot(const SlotArrivals& arrivals) {
    AdmitResult res;
    SlotRecord rec;
    rec.slot = arrivals.slot;
    rec.arrivals = arrivals.per_source;

    const std::uint64_t cap = capacity();
    for (const auto& [id, count] : arrivals.per_source) {
        if (id >= filtered_.size()) throw std::out_of_range("admit_slot: unknown source id");
        if (first_seen_[id] < 0) first_seen_[id] = arrivals.slot;
        cumulative_[id] += count;
        if (filtered_[id]) {
            res.filtered += count;
            continue;
        }
        for (std::uint32_t k = 0; k < count; ++k) {
            if (queue_.size() < cap) {
                queue_.push_back({id, arrivals.slot});
                ++res.enqueued;
            } else {
                ++res.dropped;
            }
        }
    }
    dropped_total_ += res.dropped;

    ledger_.push_back(std::move(rec));
    while (ledger_.size() > history_slots_) ledger_.pop_front();
    return res;
}

std::uint64_t InterfaceState::service_slot(std::vector<Packet>* drained) {
    const double budget = mu_ + service_carry_;
    const double whole = std::floor(budget);
    service_carry_ = budget - whole;
    std::uint64_t to_serve = static_cast<std::uint64_t>(whole);
    to_serve = std::min<std::uint64_t>(to_serve, queue_.size());
    for (std::uint64_t i = 0; i < to_serve; ++i) {
        if (drained) drained->push_back(queue_.front());
        queue_.pop_front();
    }
    return to_serve;
}

WindowSnapshot InterfaceState::update_windows(std::uint64_t total) {
    const double t = static_cast<double>(total);
    totals_.push_back(t);
    short_sum_ += t;
    long_sum_ += t;
    ++next_slot_;

    // Running sums over the last w_s / w_l entries of totals_.
    if (totals_.size() > w_s_) short_sum_ -= totals_[totals_.size() - w_s_ - 1];
    if (totals_.size() > w_l_) long_sum_ -= totals_[totals_.size() - w_l_ - 1];

    const std::uint32_t keep = history_slots_ + std::max(w_s_, w_l_) + 1;
    while (totals_.size() > keep) totals_.pop_front();

    WindowSnapshot snap;
    if (next_slot_ >= w_s_) snap.lambda_short = short_sum_ / w_s_;
    if (next_slot_ >= w_l_) snap.lambda_long = long_sum_ / w_l_;
    return snap;
}

std::vector<double> InterfaceState::recent_totals(std::uint32_t lag, std::uint32_t count) const {
    // Totals for slots (now-lag-count, now-lag]. totals_.back() is slot now().
    if (count == 0) return {};
    const std::uint64_t needed = static_cast<std::uint64_t>(lag) + count;
    if (needed > totals_.size() || static_cast<std::int64_t>(needed) > next_slot_) {
        throw std::out_of_range("recent_totals: insufficient history");
    }
    const std::size_t end = totals_.size() - lag;
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = end - count; i < end; ++i) out.push_back(totals_[i]);
    return out;
}

double InterfaceState::lambda_long_at_lag(std::uint32_t lag) const {
    std::vector<double> window;
    try {
        window = recent_totals(lag, w_l_);
    } catch (const std::out_of_range&) {
        throw std::out_of_range("lambda_long_at_lag: insufficient history");
    }
    double sum = 0.0;
    for (double v : window) sum += v;
    return sum / w_l_;
}

std::vector<std::pair<std::uint32_t, double>> InterfaceState::per_source_rates(
    std::int64_t from, std::int64_t to) const {
    if (from >= to) throw std::invalid_argument("per_source_rates: empty slot range");
    if (!ledger_.empty() && (from < ledger_.front().slot || to > ledger_.back().slot + 1)) {
        throw std::out_of_range("per_source_rates: range outside retained history");
    }
    if (ledger_.empty()) throw std::out_of_range("per_source_rates: no history");

    std::vector<std::uint64_t> counts(filtered_.size(), 0);
    for (const SlotRecord& rec : ledger_) {
        if (rec.slot < from || rec.slot >= to) continue;
        for (const auto& [id, n] : rec.arrivals) counts[id] += n;
    }
    const double span = static_cast<double>(to - from);
    std::vector<std::pair<std::uint32_t, double>> rates;
    for (std::uint32_t id = 0; id < counts.size(); ++id) {
        if (counts[id] > 0) rates.emplace_back(id, static_cast<double>(counts[id]) / span);
    }
    return rates;
}

std::uint64_t InterfaceState::purge_and_filter(const std::vector<std::uint32_t>& ids) {
    for (std::uint32_t id : ids) {
        if (id >= filtered_.size()) throw std::out_of_range("purge_and_filter: unknown source id");
        filtered_[id] = true;
    }
    const auto before = queue_.size();
    std::erase_if(queue_, [this](const Packet& p) { return filtered_[p.source]; });
    return before - queue_.size();
}

std::optional<std::int64_t> InterfaceState::first_seen(std::uint32_t id) const {
    if (first_seen_[id] < 0) return std::nullopt;
    return first_seen_[id];
}

}  // namespace ddosim
