#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ddosim/traffic.hpp"

using namespace ddosim;

namespace {

ScenarioConfig small_config() {
    ScenarioConfig cfg;
    cfg.n_legal = 50;
    cfg.n_attackers = 50;
    cfg.lambda_n = 0.1;
    cfg.lambda_a = 0.2;
    cfg.mu = 8;
    cfg.l1 = 40;
    cfg.l2 = 160;
    cfg.seed = 42;
    return cfg;
}

}  // namespace

TEST_CASE("poisson_draw basics") {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) CHECK(poisson_draw(0.0, rng) == 0);
    CHECK_THROWS_AS(poisson_draw(-1.0, rng), std::domain_error);
}

TEST_CASE("poisson_draw mean converges") {
    Rng rng(123);
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) sum += poisson_draw(0.1, rng);
    const double mean = sum / n;
    CHECK(mean > 0.099);
    CHECK(mean < 0.101);
}

TEST_CASE("poisson_draw large-rate splitting keeps the mean") {
    Rng rng(7);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) sum += poisson_draw(95.0, rng);
    CHECK(std::fabs(sum / n - 95.0) < 3.0 * std::sqrt(95.0 / n));
}

TEST_CASE("fixed seed reproduces the sequence") {
    Rng a(555), b(555);
    for (int i = 0; i < 1000; ++i) CHECK(poisson_draw(2.5, a) == poisson_draw(2.5, b));
}

TEST_CASE("generate_slot honours activity windows") {
    std::vector<Source> sources{
        {0, SourceKind::legal, 5.0, 0, 100},
        {1, SourceKind::attacker, 5.0, 50, 60},
    };
    Rng rng(9);
    const SlotArrivals before = generate_slot(sources, 10, rng);
    for (const auto& [id, n] : before.per_source) CHECK(id == 0);

    Rng rng2(9);
    const SlotArrivals empty = generate_slot({}, 0, rng2);
    CHECK(empty.total == 0);
    CHECK(empty.per_source.empty());
}

TEST_CASE("generate_slot totals partition by kind") {
    ScenarioConfig cfg = small_config();
    const Scenario sc = build_scenario(cfg);
    Rng rng(3);
    for (std::int64_t slot : {0, 120, 250}) {
        const SlotArrivals arr = generate_slot(sc.sources, slot, rng);
        std::uint64_t legal = 0, attack = 0;
        for (const auto& [id, n] : arr.per_source) {
            (sc.is_attacker(id) ? attack : legal) += n;
        }
        CHECK(legal + attack == arr.total);
        if (slot < 100 || slot >= 200) CHECK(attack == 0);
    }
}

TEST_CASE("per-slot mean over the lead converges to n_legal * lambda_n") {
    ScenarioConfig cfg = small_config();
    cfg.normal_lead = 10000;
    cfg.attack_len = 0;
    cfg.normal_tail = 0;
    const Scenario sc = build_scenario(cfg);
    Rng rng(cfg.seed);
    double sum = 0.0;
    for (std::int64_t slot = 0; slot < 10000; ++slot) {
        sum += generate_slot(sc.sources, slot, rng).total;
    }
    const double mean = sum / 10000.0;
    const double expect = cfg.n_legal * cfg.lambda_n;
    CHECK(std::fabs(mean - expect) < 3.0 * std::sqrt(expect / 10000.0));
}

TEST_CASE("build_scenario timelines") {
    ScenarioConfig cfg = small_config();
    const Scenario sc = build_scenario(cfg);
    CHECK(sc.total_slots == 300);
    CHECK(sc.has_attack);
    CHECK(sc.attack_start == 100);
    CHECK(sc.attack_end == 200);
    CHECK(sc.sources.size() == 100);
    CHECK(sc.sources[49].kind == SourceKind::legal);
    CHECK(sc.sources[50].kind == SourceKind::attacker);
    CHECK(sc.sources[50].active_at(100));
    CHECK_FALSE(sc.sources[50].active_at(99));
    CHECK_FALSE(sc.sources[50].active_at(200));

    cfg.attack_len = 0;
    const Scenario quiet = build_scenario(cfg);
    CHECK_FALSE(quiet.has_attack);
    for (const Source& s : quiet.sources) {
        if (s.kind == SourceKind::attacker) CHECK_FALSE(s.active_at(100));
    }
}

TEST_CASE("identical config and seed give bit-identical arrivals") {
    ScenarioConfig cfg = small_config();
    const Scenario sc = build_scenario(cfg);
    Rng a(cfg.seed), b(cfg.seed);
    for (std::int64_t slot = 0; slot < 300; ++slot) {
        const SlotArrivals x = generate_slot(sc.sources, slot, a);
        const SlotArrivals y = generate_slot(sc.sources, slot, b);
        CHECK(x.total == y.total);
        CHECK(x.per_source == y.per_source);
    }
}

TEST_CASE("config validation") {
    ScenarioConfig cfg = small_config();
    CHECK(cfg.q() == doctest::Approx(2.0));
    cfg.mu = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.alpha = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.r = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.lambda_n = 0.0;
    CHECK_THROWS_AS(cfg.q(), ConfigError);
}

TEST_CASE("config file round trip") {
    const char* path = "test_scenario.cfg";
    {
        std::ofstream out(path);
        out << "# comment line\n";
        out << "n_legal = 50\n";
        out << "n_attackers = 50   # trailing comment\n";
        out << "lambda_n = 0.1\n";
        out << "lambda_a = 0.2\n";
        out << "mu = 8\n";
        out << "l1 = 40\n";
        out << "l2 = 160\n";
        out << "w_s = 10\n";
        out << "w_l = 45\n";
        out << "r = 0.6\n";
        out << "c = 45\n";
        out << "delta_hat = 10\n";
        out << "d = 1.0\n";
        out << "alpha = 0.05\n";
        out << "normal_lead = 100\n";
        out << "attack_len = 100\n";
        out << "normal_tail = 100\n";
        out << "seed = 42\n";
    }
    const ScenarioConfig cfg = load_scenario_config(path);
    CHECK(cfg.n_legal == 50);
    CHECK(cfg.lambda_a == doctest::Approx(0.2));
    CHECK(cfg.l2 == 160);
    CHECK(cfg.w_l == 45);
    CHECK(cfg.seed == 42);
    std::remove(path);

    CHECK_THROWS_AS(load_scenario_config("does_not_exist.cfg"), ConfigError);
    {
        std::ofstream out(path);
        out << "bogus_key = 3\n";
    }
    CHECK_THROWS_AS(load_scenario_config(path), ConfigError);
    std::remove(path);
}
