#pragma once

// Signal parameterization theta(x, i, a): the mean contributed to coordinate
// row i by a vertex of community a, possibly depending on the whole
// assignment x. The (i,j) entry of the signal matrix is theta(x, i, x(j)).

#include <functional>
#include <optional>
#include <vector>

#include "commdet/assignment.hpp"

namespace commdet {

class ThetaFunction {
public:
    using Evaluator = std::function<double(const CommunityAssignment&, int, int)>;
    // Exact answer to "does relabeling by this permutation leave theta
    // invariant", i.e. theta(x,i,a) == theta(perm o x, i, perm(a)) for all x,i,a.
    using PermutationPredicate = std::function<bool(const Permutation&)>;

    ThetaFunction(int p, int k, Evaluator eval,
                  PermutationPredicate preserving = nullptr)
        : p_(p), k_(k), eval_(std::move(eval)), preserving_(std::move(preserving)) {
        if (p_ < 1 || k_ < 1)
            throw std::invalid_argument("ThetaFunction: p and k must be >= 1");
        if (!eval_)
            throw std::invalid_argument("ThetaFunction: evaluator required");
    }

    int coords() const { return p_; }  // p
    int labels() const { return k_; }  // k

    double operator()(const CommunityAssignment& x, int i, int a) const {
        return eval_(x, i, a);
    }

    // Whether relabeling by perm preserves theta. Exact when the model supplied
    // a predicate. Otherwise the invariance condition quantifies over all of
    // Omega, which is not checkable from finite data; we fall back to probing
    // the constant and round-robin assignments at a small vertex count and
    // document the limitation.
    bool preserves(const Permutation& perm) const {
        if (perm.k() != k_)
            throw std::invalid_argument("ThetaFunction::preserves: wrong permutation size");
        if (preserving_) return preserving_(perm);
        for (const auto& x : probe_assignments()) {
            const CommunityAssignment px = relabel(perm, x);
            for (int i = 0; i < p_; ++i)
                for (int a = 0; a < k_; ++a)
                    if (eval_(x, i, a) != eval_(px, i, perm(a))) return false;
        }
        return true;
    }

private:
    std::vector<CommunityAssignment> probe_assignments() const {
        std::vector<CommunityAssignment> probes;
        const int n = std::max(p_, 2 * k_);
        for (int c = 0; c < k_; ++c)
            probes.emplace_back(std::vector<int>(static_cast<std::size_t>(n), c), k_);
        std::vector<int> rr(static_cast<std::size_t>(n));
        for (int v = 0; v < n; ++v) rr[static_cast<std::size_t>(v)] = v % k_;
        probes.emplace_back(std::move(rr), k_);
        return probes;
    }

    int p_;
    int k_;
    Evaluator eval_;
    PermutationPredicate preserving_;
};

// theta(x,i,a) = mu(i,a) with a fixed p-by-k table of means; the signal for a
// vertex depends only on its own label. A permutation preserves theta exactly
// when it permutes equal columns of mu onto each other.
inline ThetaFunction theta_from_means(std::vector<std::vector<double>> mu) {
    const int p = static_cast<int>(mu.size());
    if (p == 0 || mu[0].empty())
        throw std::invalid_argument("theta_from_means: empty mean table");
    const int k = static_cast<int>(mu[0].size());
    for (const auto& row : mu)
        if (static_cast<int>(row.size()) != k)
            throw std::invalid_argument("theta_from_means: ragged mean table");
    auto eval = [mu](const CommunityAssignment&, int i, int a) {
        return mu[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
    };
    auto preserving = [mu, p, k](const Permutation& perm) {
        for (int a = 0; a < k; ++a)
            for (int i = 0; i < p; ++i)
                if (mu[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] !=
                    mu[static_cast<std::size_t>(i)][static_cast<std::size_t>(perm(a))])
                    return false;
        return true;
    };
    return ThetaFunction(p, k, std::move(eval), std::move(preserving));
}

// Equivalence x ~ z: some label bijection eta with x = eta o z that preserves
// theta. Returns the witnessing permutation, or nullopt.
inline std::optional<Permutation> equivalence_witness(const CommunityAssignment& x,
                                                      const CommunityAssignment& z,
                                                      const ThetaFunction& theta) {
    if (x.n() != z.n() || x.k() != z.k())
        throw std::invalid_argument("equivalence_witness: mismatched assignments");
    const int k = x.k();
    // eta is pinned on labels used by z; free labels range over the rest.
    std::vector<int> pinned(static_cast<std::size_t>(k), -1);
    for (int v = 0; v < x.n(); ++v) {
        int& img = pinned[static_cast<std::size_t>(z(v))];
        if (img == -1) img = x(v);
        else if (img != x(v)) return std::nullopt;
    }
    std::optional<Permutation> found;
    for_each_permutation(k, [&](const std::vector<int>& perm) {
        for (int a = 0; a < k; ++a) {
            const int img = pinned[static_cast<std::size_t>(a)];
            if (img != -1 && perm[static_cast<std::size_t>(a)] != img) return true;
        }
        Permutation eta(perm);
        if (theta.preserves(eta)) {
            found = std::move(eta);
            return false;
        }
        return true;
    });
    return found;
}

inline bool is_equivalent(const CommunityAssignment& x, const CommunityAssignment& z,
                          const ThetaFunction& theta) {
    return equivalence_witness(x, z, theta).has_value();
}

}  // namespace commdet
