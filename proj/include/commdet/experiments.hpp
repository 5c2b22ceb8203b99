#pragma once

// Monte Carlo recovery experiments for the vertex-sum model. A config picks a
// range of sizes n, a noise calibration relative to the recovery threshold,
// and a trial count; each trial draws an observation, runs the exact solver,
// and records whether the minimizer landed in the equivalence class of the
// planted assignment. Results serialize to CSV with round-trip fidelity.

#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "commdet/io.hpp"
#include "commdet/mle.hpp"
#include "commdet/vertexsum.hpp"

namespace commdet::experiments {

enum class NoiseRegime { Low, High };
enum class SizeKnowledge { Known, Unknown };

inline std::string to_string(NoiseRegime r) { return r == NoiseRegime::Low ? "low" : "high"; }
inline std::string to_string(SizeKnowledge s) {
    return s == SizeKnowledge::Known ? "known" : "unknown";
}

inline NoiseRegime parse_noise_regime(const std::string& s) {
    if (s == "low") return NoiseRegime::Low;
    if (s == "high") return NoiseRegime::High;
    throw std::invalid_argument("noise_regime must be 'low' or 'high', got '" + s + "'");
}

inline SizeKnowledge parse_size_knowledge(const std::string& s) {
    if (s == "known") return SizeKnowledge::Known;
    if (s == "unknown") return SizeKnowledge::Unknown;
    throw std::invalid_argument("size_knowledge must be 'known' or 'unknown', got '" + s + "'");
}

struct ExperimentConfig {
    int n_min = 0;
    int n_max = 0;
    double alpha = 16.0 / 25.0;
    double delta = 0.5;
    NoiseRegime noise_regime = NoiseRegime::Low;
    // 0 selects the regime preset: 32 below threshold, 2 above.
    double sqrt_factor = 0.0;
    int trials = 200;
    SizeKnowledge size_knowledge = SizeKnowledge::Known;
    std::uint64_t base_seed = 1;

    void validate() const {
        if (n_min < 2 || n_max < n_min)
            throw std::invalid_argument("experiment: need 2 <= n_min <= n_max");
        if (!(alpha >= 0.5 && alpha < 2.0 / 3.0))
            throw std::invalid_argument("experiment: alpha must lie in [1/2, 2/3)");
        if (!(delta > 0.0 && delta < 1.0))
            throw std::invalid_argument("experiment: delta must lie in (0, 1)");
        if (sqrt_factor < 0.0)
            throw std::invalid_argument("experiment: sqrt_factor must be nonnegative");
        if (trials < 1) throw std::invalid_argument("experiment: trials must be positive");
    }

    double effective_sqrt_factor() const {
        if (sqrt_factor > 0.0) return sqrt_factor;
        return noise_regime == NoiseRegime::Low ? 32.0 : 2.0;
    }

    // Noise level for a given n: (1 -/+ delta) times the separation scale
    // (2 alpha - 1) / sqrt(factor log n). Low regime shrinks the noise below
    // the exact-recovery threshold, high regime pushes it above.
    double noise_scale(int n) const {
        if (n < 2) throw std::invalid_argument("noise_scale: n must be at least 2");
        const double mult = noise_regime == NoiseRegime::Low ? 1.0 - delta : 1.0 + delta;
        return mult * (2.0 * alpha - 1.0) / std::sqrt(effective_sqrt_factor() * std::log(n));
    }

    std::vector<int> sizes() const {
        std::vector<int> out;
        for (int n = n_min; n <= n_max; ++n) out.push_back(n);
        return out;
    }
};

inline ExperimentConfig parse_experiment_config(const std::map<std::string, std::string>& kv) {
    ExperimentConfig cfg;
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    const auto range = get("n_range");
    if (!range) throw std::invalid_argument("experiment config: missing n_range (A..B)");
    const auto dots = range->find("..");
    if (dots == std::string::npos)
        throw std::invalid_argument("experiment config: n_range must look like A..B");
    cfg.n_min = static_cast<int>(io::parse_int(range->substr(0, dots)));
    cfg.n_max = static_cast<int>(io::parse_int(range->substr(dots + 2)));
    if (auto v = get("alpha")) cfg.alpha = io::parse_double(*v);
    if (auto v = get("delta")) cfg.delta = io::parse_double(*v);
    if (auto v = get("noise_regime")) cfg.noise_regime = parse_noise_regime(*v);
    if (auto v = get("sqrt_factor")) cfg.sqrt_factor = io::parse_double(*v);
    if (auto v = get("trials")) cfg.trials = static_cast<int>(io::parse_int(*v));
    if (auto v = get("size_knowledge")) cfg.size_knowledge = parse_size_knowledge(*v);
    if (auto v = get("base_seed")) cfg.base_seed = io::parse_u64(*v);
    for (const auto& [key, value] : kv) {
        (void)value;
        static const char* known[] = {"n_range", "alpha",  "delta",          "noise_regime",
                                      "sqrt_factor", "trials", "size_knowledge", "base_seed"};
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw std::invalid_argument("experiment config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

inline std::string serialize_experiment_config(const ExperimentConfig& cfg) {
    std::string out;
    out += "n_range = " + std::to_string(cfg.n_min) + ".." + std::to_string(cfg.n_max) + "\n";
    out += "alpha = " + io::format_double(cfg.alpha) + "\n";
    out += "delta = " + io::format_double(cfg.delta) + "\n";
    out += "noise_regime = " + to_string(cfg.noise_regime) + "\n";
    out += "sqrt_factor = " + io::format_double(cfg.sqrt_factor) + "\n";
    out += "trials = " + std::to_string(cfg.trials) + "\n";
    out += "size_knowledge = " + to_string(cfg.size_knowledge) + "\n";
    out += "base_seed = " + std::to_string(cfg.base_seed) + "\n";
    return out;
}

// Simulation / single-instance config: n, alpha, s, seed.
struct SimulationConfig {
    vertexsum::VertexSumSpec spec;
    std::uint64_t seed = 1;
};

inline SimulationConfig parse_simulation_config(const std::map<std::string, std::string>& kv) {
    int n = 0;
    double alpha = 0.5, s = 1.0;
    std::uint64_t seed = 1;
    bool have_n = false, have_s = false, have_alpha = false;
    for (const auto& [key, value] : kv) {
        if (key == "n") {
            n = static_cast<int>(io::parse_int(value));
            have_n = true;
        } else if (key == "alpha") {
            alpha = io::parse_double(value);
            have_alpha = true;
        } else if (key == "s") {
            s = io::parse_double(value);
            have_s = true;
        } else if (key == "seed") {
            seed = io::parse_u64(value);
        } else {
            throw std::invalid_argument("simulation config: unknown key '" + key + "'");
        }
    }
    if (!have_n || !have_alpha || !have_s)
        throw std::invalid_argument("simulation config: required keys are n, alpha, s");
    return SimulationConfig{vertexsum::VertexSumSpec(n, alpha, s), seed};
}

struct TrialRecord {
    int n = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    bool recovered = false;
    bool tied = false;
    double objective_true = 0.0;
    double objective_min = 0.0;
};

struct SummaryRow {
    int n = 0;
    double rate = 0.0;
    double stderr_rate = 0.0;
};

namespace detail {

struct SizeContext {
    vertexsum::VertexSumSpec spec;
    ModelSpec model;
    CommunityAssignment truth;
};

inline TrialRecord run_trial(const SizeContext& ctx, const ExperimentConfig& cfg, int trial) {
    TrialRecord rec;
    rec.n = ctx.spec.n;
    rec.trial = trial;
    rec.seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(ctx.spec.n),
                           static_cast<std::uint64_t>(trial));
    const Matrix k = observe(ctx.model, ctx.truth, rec.seed);

    SolveOptions opt;
    MLEResult res = cfg.size_knowledge == SizeKnowledge::Known
                        ? solve_known_sizes(ctx.model, k, ctx.truth.community_sizes(), opt)
                        : solve_unknown_sizes(ctx.model, k, 0.0, opt);

    auto obj = make_objective(ctx.model, k);
    for (int v = 0; v < ctx.truth.n(); ++v) obj->assign(v, ctx.truth(v));
    rec.objective_true = obj->value();
    rec.objective_min = res.objective;
    rec.tied = res.tied;
    rec.recovered =
        !res.tied && is_equivalent(res.minimizer, ctx.truth, ctx.model.theta());
    return rec;
}

}  // namespace detail

inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg, int threads = 1) {
    cfg.validate();
    if (threads < 1) throw std::invalid_argument("run_experiment: threads must be positive");
    std::vector<TrialRecord> out;
    for (int n : cfg.sizes()) {
        vertexsum::VertexSumSpec spec(n, cfg.alpha, cfg.noise_scale(n));
        detail::SizeContext ctx{spec, vertexsum::make_model_spec(spec),
                                vertexsum::canonical_truth(spec)};
        std::vector<TrialRecord> rows(static_cast<std::size_t>(cfg.trials));
        if (threads == 1) {
            for (int t = 0; t < cfg.trials; ++t)
                rows[static_cast<std::size_t>(t)] = detail::run_trial(ctx, cfg, t);
        } else {
            std::vector<std::future<void>> tasks;
            for (int w = 0; w < threads; ++w) {
                tasks.push_back(std::async(std::launch::async, [&, w] {
                    for (int t = w; t < cfg.trials; t += threads)
                        rows[static_cast<std::size_t>(t)] = detail::run_trial(ctx, cfg, t);
                }));
            }
            for (auto& task : tasks) task.get();
        }
        for (auto& r : rows) out.push_back(r);
    }
    return out;
}

inline std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
    std::map<int, std::pair<int, int>> tally;  // n -> (recovered, total)
    for (const auto& r : records) {
        auto& [rec, tot] = tally[r.n];
        rec += r.recovered ? 1 : 0;
        tot += 1;
    }
    std::vector<SummaryRow> rows;
    for (const auto& [n, counts] : tally) {
        const auto [rec, tot] = counts;
        const double rate = static_cast<double>(rec) / static_cast<double>(tot);
        rows.push_back(SummaryRow{n, rate, std::sqrt(rate * (1.0 - rate) / tot)});
    }
    return rows;
}

inline const char* kTrialsHeader = "n,trial,seed,recovered,tied,objective_true,objective_min";

inline std::string trials_csv(const std::vector<TrialRecord>& records) {
    std::string out = kTrialsHeader;
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.n) + ',' + std::to_string(r.trial) + ',' + std::to_string(r.seed) +
               ',' + (r.recovered ? "1" : "0") + ',' + (r.tied ? "1" : "0") + ',' +
               io::format_double(r.objective_true) + ',' + io::format_double(r.objective_min) +
               '\n';
    }
    return out;
}

inline std::vector<TrialRecord> parse_trials_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || io::trim(line) != kTrialsHeader)
        throw std::invalid_argument("trials csv: bad header");
    std::vector<TrialRecord> out;
    while (std::getline(ss, line)) {
        if (io::trim(line).empty()) continue;
        const auto cells = io::split_csv_row(line);
        if (cells.size() != 7) throw std::invalid_argument("trials csv: expected 7 columns");
        TrialRecord r;
        r.n = static_cast<int>(io::parse_int(cells[0]));
        r.trial = static_cast<int>(io::parse_int(cells[1]));
        r.seed = io::parse_u64(cells[2]);
        r.recovered = io::parse_int(cells[3]) != 0;
        r.tied = io::parse_int(cells[4]) != 0;
        r.objective_true = io::parse_double(cells[5]);
        r.objective_min = io::parse_double(cells[6]);
        out.push_back(r);
    }
    return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "n,rate,stderr\n";
    for (const auto& r : rows)
        out += std::to_string(r.n) + ',' + io::format_double(r.rate) + ',' +
               io::format_double(r.stderr_rate) + '\n';
    return out;
}

}  // namespace commdet::experiments
