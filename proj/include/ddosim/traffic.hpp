#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ddosim {

/// Configuration problems (bad file, invalid parameter values). The CLI maps
/// these to exit code 1, runtime failures to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SourceKind { legal, attacker };

/// One traffic origin. The id stands in for a network address. Attackers are
/// active only inside [active_from, active_until); legal clients span the run.
struct Source {
    std::uint32_t id = 0;
    SourceKind kind = SourceKind::legal;
    double rate = 0.0;  // mean packets per slot
    std::int64_t active_from = 0;
    std::int64_t active_until = 0;

    bool active_at(std::int64_t slot) const { return slot >= active_from && slot < active_until; }
};

/// Packet counts generated in one time slot, keyed by source id (sorted,
/// zero counts omitted).
struct SlotArrivals {
    std::int64_t slot = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> per_source;
    std::uint64_t total = 0;
};

/// Full parameterization of one simulated run.
struct ScenarioConfig {
    std::uint32_t n_legal = 0;
    std::uint32_t n_attackers = 0;
    double lambda_n = 0.0;  // mean packets/slot per legal client
    double lambda_a = 0.0;  // mean packets/slot per attacker
    double mu = 1.0;        // service rate, packets/slot
    std::uint64_t l1 = 0;   // normal-operation buffer tier
    std::uint64_t l2 = 0;   // excess tier that buys measurement time
    std::uint32_t w_s = 1;  // short sliding window, slots
    std::uint32_t w_l = 1;  // long sliding window, slots
    double r = 0.6;         // tolerated short-over-long traffic jump fraction
    std::uint32_t c = 45;   // lookback to the last trusted long average, slots
    std::uint32_t delta_hat = 10;  // per-source measurement horizon, slots
    double d = 1.0;                // timeout safety factor
    double alpha = 0.05;           // significance level
    std::uint32_t normal_lead = 100;
    std::uint32_t attack_len = 100;
    std::uint32_t normal_tail = 100;
    std::uint64_t seed = 1;

    std::int64_t total_slots() const {
        return static_cast<std::int64_t>(normal_lead) + attack_len + normal_tail;
    }
    /// Attack-to-normal rate ratio; needs lambda_n > 0.
    double q() const;
    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Loads a ScenarioConfig from a flat `key = value` text file ('#' comments).
/// Keys match the field names; unknown keys are rejected.
ScenarioConfig load_scenario_config(const std::string& path);

/// Deterministic random stream. Draws are fully pinned by the seed and the
/// call sequence, independent of the standard library's distribution
/// implementations, so runs are reproducible bit for bit.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double next_uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

/// One Poisson(rate) draw. rate == 0 consumes no randomness and returns 0.
std::uint32_t poisson_draw(double rate, Rng& rng);

/// Independent Poisson counts for every source active at the slot, in id order.
SlotArrivals generate_slot(std::span<const Source> sources, std::int64_t slot, Rng& rng);

/// A built run: sources plus the ground-truth timeline used for scoring.
struct Scenario {
    std::vector<Source> sources;
    std::int64_t total_slots = 0;
    std::uint32_t n_legal = 0;
    std::uint32_t n_attackers = 0;
    bool has_attack = false;
    std::int64_t attack_start = 0;  // t*, meaningful only when has_attack
    std::int64_t attack_end = 0;

    bool is_attacker(std::uint32_t id) const { return id >= n_legal && id < n_legal + n_attackers; }
};

Scenario build_scenario(const ScenarioConfig& cfg);

}  // namespace ddosim
