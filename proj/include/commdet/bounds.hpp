#pragma once

// Normalized gap statistics eta for single flips and swaps of a reference
// assignment, their exact covariance (Phi / Psi), and finite-sample checks of
// the Gaussian-maxima bounds that drive the impossibility threshold.

#include <cmath>
#include <optional>
#include <vector>

#include "commdet/mle.hpp"
#include "commdet/model.hpp"

namespace commdet::bounds {

// y^(a): vertex a relabeled. The target defaults to the other label when
// k = 2 and must be explicit otherwise.
inline CommunityAssignment single_flip(const CommunityAssignment& y, int a,
                                       std::optional<int> to = {}) {
    int target;
    if (to) {
        target = *to;
        if (target == y(a))
            throw std::invalid_argument("single_flip: target equals current label");
    } else {
        if (y.k() != 2)
            throw std::invalid_argument("single_flip: target label required when k > 2");
        target = 1 - y(a);
    }
    return y.with_label(a, target);
}

namespace detail {

struct Member {
    Vector gamma;  // 2 flat(A_x - A_y) / L_Sigma(x, y)
    double l = 0.0;
};

inline Member member_for(const ModelSpec& spec, const CommunityAssignment& y,
                         const CommunityAssignment& x) {
    Member m;
    const Vector d = flatten(signal_matrix(spec, x) - signal_matrix(spec, y));
    m.l = d.dot(spec.sigma_pinv() * d);
    // A direction in the kernel of Sigma^+ rounds to ~eps * |d|^2 / lambda_min
    // rather than exactly zero, so degeneracy is a relative call, made with the
    // same cutoff the factorization uses for numerical rank.
    const int rank = spec.sigma_rank();
    const double scale =
        rank > 0 ? d.squaredNorm() / spec.sigma_eigen().eigenvalues[rank - 1] : 0.0;
    if (m.l <= kRankCutoff * scale)
        throw std::domain_error("eta statistic: degenerate direction (L_Sigma = 0)");
    m.gamma = 2.0 * d / m.l;
    return m;
}

}  // namespace detail

// eta_a = 2 <A_{y^(a)} - A_y, Sigma^+ W> / L_Sigma(y^(a), y); zero mean,
// variance 4 / L_Sigma.
inline double eta_single(const ModelSpec& spec, const CommunityAssignment& y, int a,
                         const ObservationMatrix& w, std::optional<int> to = {}) {
    const auto m = detail::member_for(spec, y, single_flip(y, a, to));
    return m.gamma.dot(spec.sigma_pinv() * flatten(w));
}

// eta_ab for the swap y^(ab); requires y(a) != y(b).
inline double eta_swap(const ModelSpec& spec, const CommunityAssignment& y, int a, int b,
                       const ObservationMatrix& w) {
    if (y(a) == y(b))
        throw std::invalid_argument("eta_swap: vertices share a label, swap is trivial");
    const auto m = detail::member_for(spec, y, y.with_swapped(a, b));
    return m.gamma.dot(spec.sigma_pinv() * flatten(w));
}

struct EtaEnsemble {
    Matrix gamma;          // pn x N, one scaled difference per column
    SymMatrix covariance;  // Gamma^T Sigma^+ Gamma
    double min_eigenvalue = 0.0;
    double min_singular_value = 0.0;  // sigma_0 of Gamma
};

namespace detail {

inline EtaEnsemble ensemble_from(const ModelSpec& spec, const std::vector<Member>& members) {
    const int count = static_cast<int>(members.size());
    Matrix gamma(spec.sigma().dim(), count);
    for (int i = 0; i < count; ++i) gamma.col(i) = members[static_cast<std::size_t>(i)].gamma;
    SymMatrix cov(gamma.transpose() * spec.sigma_pinv() * gamma, 1e-9);
    const EigenFactorization f = eigen_factorize(cov);
    Eigen::JacobiSVD<Matrix> svd(gamma);
    EtaEnsemble e{std::move(gamma), std::move(cov), f.eigenvalues[f.eigenvalues.size() - 1],
                  svd.singularValues().minCoeff()};
    return e;
}

}  // namespace detail

// Phi_H: exact covariance of {eta_a : a in H} via Gamma^T Sigma^+ Gamma.
// lambda_0 is its least eigenvalue. H defaults to all vertices.
inline EtaEnsemble eta_covariance_matrix(const ModelSpec& spec, const CommunityAssignment& y,
                                         std::vector<int> h = {}) {
    if (h.empty()) {
        h.resize(static_cast<std::size_t>(y.n()));
        std::iota(h.begin(), h.end(), 0);
    }
    std::vector<detail::Member> members;
    members.reserve(h.size());
    for (int a : h) members.push_back(detail::member_for(spec, y, single_flip(y, a)));
    return detail::ensemble_from(spec, members);
}

// Psi_{H1,H2}: covariance of the swap statistics {eta_ab} over pairs
// a in H1, b in H2 with y(a) != y(b) (other pairs have no swap statistic).
inline EtaEnsemble eta_swap_covariance_matrix(const ModelSpec& spec,
                                              const CommunityAssignment& y,
                                              const std::vector<int>& h1,
                                              const std::vector<int>& h2) {
    std::vector<detail::Member> members;
    for (int a : h1)
        for (int b : h2)
            if (y(a) != y(b))
                members.push_back(detail::member_for(spec, y, y.with_swapped(a, b)));
    if (members.empty())
        throw std::invalid_argument("eta_swap_covariance_matrix: no admissible pairs");
    return detail::ensemble_from(spec, members);
}

// Premise of the impossibility threshold: sqrt(2 lambda_0 log N).
inline double premise_value(double lambda0, int count) {
    if (lambda0 < 0.0 || count < 1)
        throw std::invalid_argument("premise_value: need lambda0 >= 0 and count >= 1");
    return std::sqrt(2.0 * lambda0 * std::log(static_cast<double>(count)));
}

namespace detail {

template <typename SampleMax>
double exceedance(int trials, std::uint64_t seed, double threshold, SampleMax&& sample_max,
                  bool strict) {
    if (trials < 1) throw std::invalid_argument("bound check: trials must be >= 1");
    int hits = 0;
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        const double m = sample_max(rng);
        if (strict ? m > threshold : m >= threshold) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace detail

// Fraction of trials with max_i X_i >= sqrt(2 lambda_0 log N) (1 - eps) for
// X ~ N(0, cov); the asymptotic statement drives this to 1.
inline double max_gaussian_lower_bound_check(const SymMatrix& cov, double eps, int trials,
                                             std::uint64_t seed) {
    const EigenFactorization f = eigen_factorize(cov);
    const double lambda0 = f.eigenvalues[f.eigenvalues.size() - 1];
    if (lambda0 < -f.cutoff)
        throw std::invalid_argument("max_gaussian_lower_bound_check: covariance not PSD");
    const double threshold =
        premise_value(std::max(lambda0, 0.0), cov.dim()) * (1.0 - eps);
    const SymMatrix root = sqrt_psd(cov);
    Vector z(cov.dim());
    return detail::exceedance(
        trials, seed, threshold,
        [&](Rng& rng) {
            for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
            return (root.mat() * z).maxCoeff();
        },
        /*strict=*/false);
}

// Fraction of trials with max_i X_i > (1 + eps) sqrt(2 maxVar log N); bounded
// above by N^{-eps} in expectation.
inline double max_gaussian_upper_bound_check(const SymMatrix& cov, double eps, int trials,
                                             std::uint64_t seed) {
    const double max_var = cov.mat().diagonal().maxCoeff();
    const double threshold =
        (1.0 + eps) * std::sqrt(2.0 * max_var * std::log(static_cast<double>(cov.dim())));
    const SymMatrix root = sqrt_psd(cov);
    Vector z(cov.dim());
    return detail::exceedance(
        trials, seed, threshold,
        [&](Rng& rng) {
            for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
            return (root.mat() * z).maxCoeff();
        },
        /*strict=*/true);
}

// Independent-coordinate variants, for ensembles too large to factorize.
inline double max_gaussian_lower_bound_check(const std::vector<double>& variances, double eps,
                                             int trials, std::uint64_t seed) {
    if (variances.empty())
        throw std::invalid_argument("max_gaussian_lower_bound_check: empty ensemble");
    double lambda0 = variances[0];
    for (double v : variances) {
        if (v < 0.0)
            throw std::invalid_argument("max_gaussian_lower_bound_check: negative variance");
        lambda0 = std::min(lambda0, v);
    }
    const double threshold =
        premise_value(lambda0, static_cast<int>(variances.size())) * (1.0 - eps);
    return detail::exceedance(
        trials, seed, threshold,
        [&](Rng& rng) {
            double m = -std::numeric_limits<double>::infinity();
            for (double v : variances) m = std::max(m, std::sqrt(v) * rng.normal());
            return m;
        },
        /*strict=*/false);
}

inline double max_gaussian_upper_bound_check(const std::vector<double>& variances, double eps,
                                             int trials, std::uint64_t seed) {
    if (variances.empty())
        throw std::invalid_argument("max_gaussian_upper_bound_check: empty ensemble");
    double max_var = 0.0;
    for (double v : variances) {
        if (v < 0.0)
            throw std::invalid_argument("max_gaussian_upper_bound_check: negative variance");
        max_var = std::max(max_var, v);
    }
    const double threshold =
        (1.0 + eps) *
        std::sqrt(2.0 * max_var * std::log(static_cast<double>(variances.size())));
    return detail::exceedance(
        trials, seed, threshold,
        [&](Rng& rng) {
            double m = -std::numeric_limits<double>::infinity();
            for (double v : variances) m = std::max(m, std::sqrt(v) * rng.normal());
            return m;
        },
        /*strict=*/true);
}

}  // namespace commdet::bounds
