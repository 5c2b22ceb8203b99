#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "commdet/experiments.hpp"
#include "oracles.hpp"

using namespace commdet;
using namespace commdet::experiments;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.n_min = 7;
    cfg.n_max = 8;
    cfg.alpha = 16.0 / 25.0;
    cfg.delta = 0.5;
    cfg.trials = 20;
    cfg.base_seed = 5;
    return cfg;
}

std::map<std::string, std::string> base_keys() {
    return {{"n_range", "4..12"}, {"alpha", "0.6"},  {"delta", "0.25"},
            {"noise_regime", "high"}, {"trials", "50"}, {"size_knowledge", "unknown"},
            {"base_seed", "99"}};
}

}  // namespace

TEST_CASE("regime and knowledge labels round trip") {
    CHECK(parse_noise_regime(to_string(NoiseRegime::Low)) == NoiseRegime::Low);
    CHECK(parse_noise_regime(to_string(NoiseRegime::High)) == NoiseRegime::High);
    CHECK(parse_size_knowledge(to_string(SizeKnowledge::Known)) == SizeKnowledge::Known);
    CHECK(parse_size_knowledge(to_string(SizeKnowledge::Unknown)) == SizeKnowledge::Unknown);
    CHECK_THROWS_AS(parse_noise_regime("medium"), std::invalid_argument);
    CHECK_THROWS_AS(parse_size_knowledge("maybe"), std::invalid_argument);
}

TEST_CASE("config validation rejects out-of-range fields") {
    auto bad = [](auto&& tweak) {
        ExperimentConfig cfg;
        cfg.n_min = 4;
        cfg.n_max = 8;
        tweak(cfg);
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    };
    bad([](ExperimentConfig& c) { c.n_min = 1; });
    bad([](ExperimentConfig& c) { c.n_max = 3; });
    bad([](ExperimentConfig& c) { c.alpha = 0.49; });
    bad([](ExperimentConfig& c) { c.alpha = 2.0 / 3.0; });
    bad([](ExperimentConfig& c) { c.delta = 0.0; });
    bad([](ExperimentConfig& c) { c.delta = 1.0; });
    bad([](ExperimentConfig& c) { c.sqrt_factor = -1.0; });
    bad([](ExperimentConfig& c) { c.trials = 0; });

    ExperimentConfig ok;
    ok.n_min = 2;
    ok.n_max = 2;
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("noise scale follows the calibration formula") {
    ExperimentConfig cfg;
    cfg.n_min = 4;
    cfg.n_max = 8;
    cfg.alpha = 16.0 / 25.0;
    cfg.delta = 0.5;

    CHECK(cfg.effective_sqrt_factor() == 32.0);
    cfg.noise_regime = NoiseRegime::High;
    CHECK(cfg.effective_sqrt_factor() == 2.0);
    cfg.sqrt_factor = 8.0;
    CHECK(cfg.effective_sqrt_factor() == 8.0);

    const double sep = 2.0 * cfg.alpha - 1.0;
    CHECK(cfg.noise_scale(100) ==
          Catch::Approx(1.5 * sep / std::sqrt(8.0 * std::log(100.0))).epsilon(1e-14));
    cfg.noise_regime = NoiseRegime::Low;
    CHECK(cfg.noise_scale(100) ==
          Catch::Approx(0.5 * sep / std::sqrt(8.0 * std::log(100.0))).epsilon(1e-14));
    CHECK_THROWS_AS(cfg.noise_scale(1), std::invalid_argument);

    CHECK(cfg.sizes() == std::vector<int>{4, 5, 6, 7, 8});
}

TEST_CASE("experiment config parses and serializes losslessly") {
    const auto kv = base_keys();
    const ExperimentConfig cfg = parse_experiment_config(kv);
    CHECK(cfg.n_min == 4);
    CHECK(cfg.n_max == 12);
    CHECK(cfg.alpha == 0.6);
    CHECK(cfg.delta == 0.25);
    CHECK(cfg.noise_regime == NoiseRegime::High);
    CHECK(cfg.sqrt_factor == 0.0);
    CHECK(cfg.trials == 50);
    CHECK(cfg.size_knowledge == SizeKnowledge::Unknown);
    CHECK(cfg.base_seed == 99);

    // defaults fill in everything but the range
    const ExperimentConfig bare = parse_experiment_config({{"n_range", "2..3"}});
    CHECK(bare.alpha == 16.0 / 25.0);
    CHECK(bare.trials == 200);
    CHECK(bare.noise_regime == NoiseRegime::Low);
    CHECK(bare.size_knowledge == SizeKnowledge::Known);

    const ExperimentConfig back =
        parse_experiment_config(io::parse_key_values(serialize_experiment_config(cfg)));
    CHECK(back.n_min == cfg.n_min);
    CHECK(back.n_max == cfg.n_max);
    CHECK(back.alpha == cfg.alpha);
    CHECK(back.delta == cfg.delta);
    CHECK(back.noise_regime == cfg.noise_regime);
    CHECK(back.sqrt_factor == cfg.sqrt_factor);
    CHECK(back.trials == cfg.trials);
    CHECK(back.size_knowledge == cfg.size_knowledge);
    CHECK(back.base_seed == cfg.base_seed);
}

TEST_CASE("experiment config rejects malformed input") {
    CHECK_THROWS_AS(parse_experiment_config({}), std::invalid_argument);
    CHECK_THROWS_AS(parse_experiment_config({{"n_range", "4-8"}}), std::invalid_argument);
    auto kv = base_keys();
    kv["n_step"] = "2";
    CHECK_THROWS_AS(parse_experiment_config(kv), std::invalid_argument);
    auto bad = base_keys();
    bad["trials"] = "none";
    CHECK_THROWS_AS(parse_experiment_config(bad), std::invalid_argument);
}

TEST_CASE("simulation config requires n, alpha, s") {
    const SimulationConfig sim = parse_simulation_config(
        {{"n", "10"}, {"alpha", "0.6"}, {"s", "0.5"}, {"seed", "77"}});
    CHECK(sim.spec.n == 10);
    CHECK(sim.spec.alpha == 0.6);
    CHECK(sim.spec.s == 0.5);
    CHECK(sim.seed == 77);

    const SimulationConfig defaulted =
        parse_simulation_config({{"n", "4"}, {"alpha", "0.5"}, {"s", "1"}});
    CHECK(defaulted.seed == 1);

    CHECK_THROWS_AS(parse_simulation_config({{"n", "4"}, {"alpha", "0.5"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_simulation_config(
                        {{"n", "4"}, {"alpha", "0.5"}, {"s", "1"}, {"mode", "x"}}),
                    std::invalid_argument);
}

TEST_CASE("trial CSV round trips bit-exactly") {
    std::vector<TrialRecord> records;
    TrialRecord a;
    a.n = 5;
    a.trial = 0;
    a.seed = 18446744073709551557ull;
    a.recovered = true;
    a.tied = false;
    a.objective_true = -1.0 / 3.0;
    a.objective_min = -0.3333333333333337;
    TrialRecord b;
    b.n = 6;
    b.trial = 3;
    b.seed = 12;
    b.recovered = false;
    b.tied = true;
    b.objective_true = 1e-17;
    b.objective_min = 2.5e-18;
    records.push_back(a);
    records.push_back(b);

    const auto parsed = parse_trials_csv(trials_csv(records));
    REQUIRE(parsed.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(parsed[i].n == records[i].n);
        CHECK(parsed[i].trial == records[i].trial);
        CHECK(parsed[i].seed == records[i].seed);
        CHECK(parsed[i].recovered == records[i].recovered);
        CHECK(parsed[i].tied == records[i].tied);
        CHECK(parsed[i].objective_true == records[i].objective_true);
        CHECK(parsed[i].objective_min == records[i].objective_min);
    }

    CHECK(parse_trials_csv(trials_csv({})).empty());
    CHECK_THROWS_AS(parse_trials_csv("n,trial\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_trials_csv(std::string(kTrialsHeader) + "\n1,2,3\n"),
                    std::invalid_argument);
}

TEST_CASE("summaries count recoveries per size") {
    std::vector<TrialRecord> records;
    for (int t = 0; t < 4; ++t) {
        TrialRecord r;
        r.n = 5;
        r.trial = t;
        r.recovered = t < 3;
        records.push_back(r);
    }
    TrialRecord other;
    other.n = 4;
    other.trial = 0;
    other.recovered = false;
    records.push_back(other);

    const auto rows = summarize(records);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].n == 4);  // ascending in n
    CHECK(rows[0].rate == 0.0);
    CHECK(rows[0].stderr_rate == 0.0);
    CHECK(rows[1].n == 5);
    CHECK(rows[1].rate == 0.75);
    CHECK(rows[1].stderr_rate == Catch::Approx(std::sqrt(0.75 * 0.25 / 4.0)).epsilon(1e-14));

    const std::string csv = summary_csv(rows);
    CHECK(csv.rfind("n,rate,stderr\n", 0) == 0);
    CHECK(csv.find("5,0.75,") != std::string::npos);
}

TEST_CASE("experiment runs are deterministic and optimal per trial") {
    const ExperimentConfig cfg = small_config();
    const auto records = run_experiment(cfg);
    REQUIRE(records.size() == 40);  // 2 sizes x 20 trials

    int idx = 0;
    for (int n : {7, 8})
        for (int t = 0; t < 20; ++t, ++idx) {
            const auto& r = records[static_cast<std::size_t>(idx)];
            CHECK(r.n == n);
            CHECK(r.trial == t);
            CHECK(r.seed == derive_seed(cfg.base_seed, static_cast<std::uint64_t>(n),
                                        static_cast<std::uint64_t>(t)));
            // the solver can never do worse than the planted assignment
            CHECK(r.objective_min <= r.objective_true + 1e-9 * (1.0 + std::abs(r.objective_true)));
            if (r.recovered) CHECK_FALSE(r.tied);
        }

    // same config, fresh run, multithreaded run: byte-identical CSVs
    CHECK(trials_csv(run_experiment(cfg)) == trials_csv(records));
    CHECK(trials_csv(run_experiment(cfg, 3)) == trials_csv(records));

    CHECK_THROWS_AS(run_experiment(cfg, 0), std::invalid_argument);
    ExperimentConfig bad = cfg;
    bad.trials = 0;
    CHECK_THROWS_AS(run_experiment(bad), std::invalid_argument);
}

TEST_CASE("noise regimes separate and size knowledge only helps") {
    ExperimentConfig low = small_config();
    ExperimentConfig high = small_config();
    high.noise_regime = NoiseRegime::High;

    const auto low_rows = summarize(run_experiment(low));
    for (const auto& r : low_rows) CHECK(r.rate >= 0.9);
    const auto high_rows = summarize(run_experiment(high));
    for (const auto& r : high_rows) CHECK(r.rate <= 0.6);

    // an unknown-sizes recovery certifies the known-sizes one on the same draw:
    // the known solve searches a subset that still contains the truth class
    ExperimentConfig unknown = high;
    unknown.size_knowledge = SizeKnowledge::Unknown;
    const auto known_recs = run_experiment(high);
    const auto unknown_recs = run_experiment(unknown);
    REQUIRE(known_recs.size() == unknown_recs.size());
    for (std::size_t i = 0; i < known_recs.size(); ++i) {
        CHECK(known_recs[i].seed == unknown_recs[i].seed);
        if (unknown_recs[i].recovered) CHECK(known_recs[i].recovered);
    }
}
