// Command line front end. Subcommands:
//   simulate    draw one observation from a configured model, write CSV
//   mle         solve an observation CSV exactly, print the minimizer
//   experiment  Monte Carlo recovery-rate sweep from a config file
//   verify      exact self-checks of the spectral and bound machinery
// Exit codes: 0 success, 1 validation / usage failure, 2 check failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commdet/commdet.hpp"

namespace {

using namespace commdet;

int run_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_path) {
    auto cfg = experiments::parse_simulation_config(io::parse_key_values(io::read_file(config_path)));
    if (seed) cfg.seed = *seed;
    const ModelSpec model = vertexsum::make_model_spec(cfg.spec);
    const CommunityAssignment truth = vertexsum::canonical_truth(cfg.spec);
    const Matrix k = observe(model, truth, cfg.seed);
    io::write_file(out_path, io::format_observation(k));
    io::write_file(out_path + ".truth.csv", io::format_assignment(truth) + "\n");
    std::cout << "wrote " << out_path << " (" << k.rows() << "x" << k.cols() << "), truth in "
              << out_path << ".truth.csv\n";
    return 0;
}

int run_mle(const std::string& config_path, const std::string& obs_path, bool size_known,
            const std::string& out_path) {
    auto cfg = experiments::parse_simulation_config(io::parse_key_values(io::read_file(config_path)));
    const Matrix k = io::parse_observation(io::read_file(obs_path));
    if (k.rows() != cfg.spec.n || k.cols() != cfg.spec.n)
        throw std::invalid_argument("observation shape does not match config n");
    const ModelSpec model = vertexsum::make_model_spec(cfg.spec);
    const std::vector<int> sizes{cfg.spec.size1(), cfg.spec.size2()};
    const MLEResult res = size_known ? solve_known_sizes(model, k, sizes)
                                     : solve_unknown_sizes(model, k, 0.0);
    const std::string row = io::format_assignment(res.minimizer);
    if (!out_path.empty()) io::write_file(out_path, row + "\n");
    std::cout << row << "\n";
    std::cout << "objective = " << io::format_double(res.objective) << ", tied = " << res.tied
              << ", candidates = " << res.candidates_evaluated << "\n";
    return 0;
}

int run_experiment_cmd(const std::string& config_path, std::optional<std::uint64_t> seed,
                       std::optional<int> trials, std::optional<bool> size_known,
                       const std::string& out_path) {
    auto cfg = experiments::parse_experiment_config(io::parse_key_values(io::read_file(config_path)));
    if (seed) cfg.base_seed = *seed;
    if (trials) cfg.trials = *trials;
    if (size_known)
        cfg.size_knowledge = *size_known ? experiments::SizeKnowledge::Known
                                         : experiments::SizeKnowledge::Unknown;
    cfg.validate();
    const auto records = experiments::run_experiment(cfg);
    const auto summary = experiments::summarize(records);
    const std::string summary_text = experiments::summary_csv(summary);
    if (!out_path.empty()) {
        io::write_file(out_path, experiments::trials_csv(records));
        io::write_file(out_path + ".summary.csv", summary_text);
    }
    std::cout << summary_text;
    return 0;
}

bool report(const char* name, bool ok) {
    std::printf("[%s] %s\n", ok ? "ok" : "FAIL", name);
    return ok;
}

// Exact (sampling-free where possible) consistency checks across the
// linear-algebra, vertex-sum, and bound modules.
int run_verify() {
    bool all = true;

    {
        // Penrose axioms for the pseudo-inverse of a seeded rank-deficient matrix.
        Rng rng(41);
        Matrix b(6, 3);
        for (Eigen::Index i = 0; i < b.rows(); ++i)
            for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) = rng.normal();
        SymMatrix a(b * b.transpose());
        const Matrix p = moore_penrose(a).mat();
        const Matrix& m = a.mat();
        const double scale = m.cwiseAbs().maxCoeff();
        bool ok = (m * p * m - m).cwiseAbs().maxCoeff() < 1e-9 * scale;
        ok = ok && (p * m * p - p).cwiseAbs().maxCoeff() < 1e-9;
        ok = ok && (m * p - (m * p).transpose()).cwiseAbs().maxCoeff() < 1e-9;
        ok = ok && (p * m - (p * m).transpose()).cwiseAbs().maxCoeff() < 1e-9;
        all = report("pseudo-inverse satisfies the four Penrose axioms", ok) && all;
    }

    {
        bool ok = true;
        for (int n = 2; n <= 12 && ok; ++n) {
            vertexsum::VertexSumSpec spec(n, 0.5, 1.3);
            const auto eig = eigen_factorize(vertexsum::build_sigma(spec));
            const double ns2 = n * 1.3 * 1.3;
            ok = std::abs(eig.eigenvalues(0) - 4.0 * ns2) < 1e-9 * ns2;
            for (int i = 1; i < n && ok; ++i)
                ok = std::abs(eig.eigenvalues(i) - 2.0 * ns2) < 1e-9 * ns2;
            for (int i = n; i < n * n && ok; ++i) ok = std::abs(eig.eigenvalues(i)) < 1e-9 * ns2;
        }
        all = report("noise covariance spectrum is {4ns^2, 2ns^2 x (n-1), 0}", ok) && all;
    }

    {
        bool ok = true;
        for (int n = 2; n <= 8 && ok; ++n) {
            vertexsum::VertexSumSpec spec(n, 0.5, 0.7);
            const Matrix closed = vertexsum::build_sigma_pinv(spec).mat();
            const Matrix numeric = moore_penrose(vertexsum::build_sigma(spec)).mat();
            ok = (closed - numeric).cwiseAbs().maxCoeff() < 1e-9 * closed.cwiseAbs().maxCoeff();
        }
        all = report("closed-form pseudo-inverse matches the spectral one", ok) && all;
    }

    {
        // Closed-form pair separation against the generic quadratic form,
        // exhaustively over all two-community assignments at n = 6.
        vertexsum::VertexSumSpec spec(6, 0.5, 0.9);
        const ModelSpec model = vertexsum::make_model_spec(spec);
        bool ok = true;
        for (int xm = 0; xm < 64 && ok; ++xm) {
            for (int ym = 0; ym < 64 && ok; ++ym) {
                std::vector<int> xl(6), yl(6);
                for (int v = 0; v < 6; ++v) {
                    xl[v] = (xm >> v) & 1;
                    yl[v] = (ym >> v) & 1;
                }
                CommunityAssignment x(xl, 2), y(yl, 2);
                const double generic = l_sigma(model, x, y);
                const double closed = vertexsum::l_sigma_closed(spec, confusion_table(x, y));
                ok = std::abs(generic - closed) < 1e-8 * (1.0 + std::abs(closed));
            }
        }
        all = report("pair separation closed form matches the generic form", ok) && all;
    }

    {
        // Impossibility premise at n = 400: above threshold the calibrated
        // max-Gaussian lower bound applies (premise > 1), below it does not.
        const int n = 400;
        const double logn = std::log(static_cast<double>(n));
        const int h = static_cast<int>(std::ceil(n / (logn * logn)));
        std::vector<int> subset(static_cast<std::size_t>(h));
        for (int i = 0; i < h; ++i) subset[static_cast<std::size_t>(i)] = i;
        const double alpha = 16.0 / 25.0;
        auto premise_at = [&](double mult, double factor) {
            const double s = mult * (2.0 * alpha - 1.0) / std::sqrt(factor * logn);
            vertexsum::VertexSumSpec spec(n, alpha, s);
            const SymMatrix phi = vertexsum::eta_flip_covariance(spec, subset);
            const auto eig = eigen_factorize(phi);
            const double lambda0 = eig.eigenvalues(phi.dim() - 1);
            return bounds::premise_value(lambda0, h);
        };
        bool ok = premise_at(1.5, 2.0) > 1.0 && premise_at(0.5, 32.0) < 1.0;
        all = report("impossibility premise separates the noise presets", ok) && all;
    }

    {
        // Tail bound for the maximum of i.i.d. Gaussians, Monte Carlo slack included.
        const int count = 1000;
        const double eps = 0.5;
        const int trials = 2000;
        std::vector<double> variances(count, 1.0);
        const double p = bounds::max_gaussian_upper_bound_check(variances, eps, trials, 999);
        const double budget = std::pow(count, -eps);
        bool ok = p <= budget + 4.0 * std::sqrt(budget / trials);
        all = report("max-Gaussian upper tail stays within its budget", ok) && all;
    }

    return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact maximum-likelihood community detection under correlated Gaussian noise"};
    app.require_subcommand(1);

    std::string config_path, out_path, obs_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    bool size_known_flag = false;

    auto* sim = app.add_subcommand("simulate", "draw one observation and write it as CSV");
    sim->add_option("--config", config_path, "model config (keys n, alpha, s, seed)")->required();
    sim->add_option("--seed", seed, "override the config seed");
    sim->add_option("--out", out_path, "output CSV path")->required();

    auto* mle = app.add_subcommand("mle", "exactly solve an observation CSV");
    mle->add_option("observation", obs_path, "observation CSV path")->required();
    mle->add_option("--config", config_path, "model config (keys n, alpha, s, seed)")->required();
    mle->add_flag("--size-known", size_known_flag, "restrict the search to the true sizes");
    mle->add_option("--out", out_path, "write the minimizer row here");

    auto* exp = app.add_subcommand("experiment", "Monte Carlo recovery-rate sweep");
    exp->add_option("--config", config_path, "experiment config file")->required();
    exp->add_option("--seed", seed, "override base_seed");
    exp->add_option("--trials", trials, "override the trial count");
    exp->add_flag("--size-known", size_known_flag,
                  "solve with the true sizes regardless of the config");
    exp->add_option("--out", out_path, "trials CSV path (summary lands next to it)");

    auto* ver = app.add_subcommand("verify", "run exact self-checks and print pass/fail");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints the message or requested help
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return run_simulate(config_path, seed, out_path);
        if (mle->parsed()) return run_mle(config_path, obs_path, size_known_flag, out_path);
        if (exp->parsed()) {
            std::optional<bool> size_known_override;
            if (exp->count("--size-known") > 0) size_known_override = true;
            return run_experiment_cmd(config_path, seed, trials, size_known_override, out_path);
        }
        if (ver->parsed()) return run_verify();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
