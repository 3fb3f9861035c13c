#include "ddosim/traffic.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace ddosim {

double ScenarioConfig::q() const {
    if (lambda_n <= 0.0) throw ConfigError("q: lambda_n must be positive");
    return lambda_a / lambda_n;
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
    if (lambda_n < 0.0) fail("lambda_n must be >= 0");
    if (lambda_a < 0.0) fail("lambda_a must be >= 0");
    if (mu <= 0.0) fail("mu must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
    if (r <= 0.0) fail("r must be > 0");
    if (d <= 0.0) fail("d must be > 0");
    if (w_s < 1) fail("w_s must be >= 1");
    if (w_l < 1) fail("w_l must be >= 1");
    if (delta_hat < 1) fail("delta_hat must be >= 1");
    if (total_slots() < 1) fail("run length must be >= 1 slot");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    ScenarioConfig cfg;
    std::unordered_map<std::string, std::function<void(const std::string&)>> setters;
    auto set_u32 = [](std::uint32_t& f) {
        return [&f](const std::string& v) { f = static_cast<std::uint32_t>(std::stoul(v)); };
    };
    auto set_u64 = [](std::uint64_t& f) {
        return [&f](const std::string& v) { f = std::stoull(v); };
    };
    auto set_real = [](double& f) {
        return [&f](const std::string& v) { f = std::stod(v); };
    };
    setters["n_legal"] = set_u32(cfg.n_legal);
    setters["n_attackers"] = set_u32(cfg.n_attackers);
    setters["lambda_n"] = set_real(cfg.lambda_n);
    setters["lambda_a"] = set_real(cfg.lambda_a);
    setters["mu"] = set_real(cfg.mu);
    setters["l1"] = set_u64(cfg.l1);
    setters["l2"] = set_u64(cfg.l2);
    setters["w_s"] = set_u32(cfg.w_s);
    setters["w_l"] = set_u32(cfg.w_l);
    setters["r"] = set_real(cfg.r);
    setters["c"] = set_u32(cfg.c);
    setters["delta_hat"] = set_u32(cfg.delta_hat);
    setters["d"] = set_real(cfg.d);
    setters["alpha"] = set_real(cfg.alpha);
    setters["normal_lead"] = set_u32(cfg.normal_lead);
    setters["attack_len"] = set_u32(cfg.attack_len);
    setters["normal_tail"] = set_u32(cfg.normal_tail);
    setters["seed"] = set_u64(cfg.seed);

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected `key = value`");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end()) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key `" + key + "`");
        }
        try {
            it->second(value);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value for `" + key + "`");
        }
    }
    return cfg;
}

namespace {

// Inversion by sequential search; cheap at the per-source rates in play.
std::uint32_t poisson_knuth(double rate, Rng& rng) {
    const double limit = std::exp(-rate);
    std::uint32_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.next_uniform();
    } while (p > limit);
    return k - 1;
}

}  // namespace

std::uint32_t poisson_draw(double rate, Rng& rng) {
    if (rate < 0.0 || !std::isfinite(rate)) {
        throw std::domain_error("poisson_draw: rate must be finite and >= 0");
    }
    if (rate == 0.0) return 0;
    std::uint32_t total = 0;
    // Split large rates so exp(-rate) stays well away from underflow.
    while (rate > 30.0) {
        total += poisson_knuth(30.0, rng);
        rate -= 30.0;
    }
    return total + poisson_knuth(rate, rng);
}

SlotArrivals generate_slot(std::span<const Source> sources, std::int64_t slot, Rng& rng) {
    if (slot < 0) throw std::domain_error("generate_slot: slot must be >= 0");
    SlotArrivals out;
    out.slot = slot;
    for (const Source& s : sources) {
        if (!s.active_at(slot) || s.rate == 0.0) continue;
        const std::uint32_t n = poisson_draw(s.rate, rng);
        if (n > 0) {
            out.per_source.emplace_back(s.id, n);
            out.total += n;
        }
    }
    return out;
}

Scenario build_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    Scenario sc;
    sc.total_slots = cfg.total_slots();
    sc.n_legal = cfg.n_legal;
    sc.n_attackers = cfg.n_attackers;
    sc.has_attack = cfg.attack_len > 0 && cfg.n_attackers > 0;
    sc.attack_start = cfg.normal_lead;
    sc.attack_end = static_cast<std::int64_t>(cfg.normal_lead) + cfg.attack_len;

    sc.sources.reserve(static_cast<std::size_t>(cfg.n_legal) + cfg.n_attackers);
    for (std::uint32_t i = 0; i < cfg.n_legal; ++i) {
        sc.sources.push_back({i, SourceKind::legal, cfg.lambda_n, 0, sc.total_slots});
    }
    for (std::uint32_t i = 0; i < cfg.n_attackers; ++i) {
        sc.sources.push_back({cfg.n_legal + i, SourceKind::attacker, cfg.lambda_a,
                              sc.attack_start, sc.has_attack ? sc.attack_end : sc.attack_start});
    }
    return sc;
}

}  // namespace ddosim
