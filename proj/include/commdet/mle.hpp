#pragma once

// Maximum-likelihood solvers. The G objective is the support-subspace
// quadratic form; f drops the assignment-independent <K, Sigma^+ K> term and
// shares its argmin. Solvers enumerate assignments depth-first in
// lexicographic order, pruning to canonical representatives (restricted
// growth strings) when every label permutation preserves theta.

#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <vector>

#include "commdet/confusion.hpp"
#include "commdet/model.hpp"

namespace commdet {

inline double f_objective(const ModelSpec& spec, const CommunityAssignment& x,
                          const ObservationMatrix& k) {
    if (k.rows() != spec.p() || k.cols() != spec.n())
        throw std::invalid_argument("f_objective: observation shape mismatch");
    const Vector a = flatten(signal_matrix(spec, x));
    const Vector kf = flatten(k);
    return a.dot(spec.sigma_pinv() * a) - 2.0 * a.dot(spec.sigma_pinv() * kf);
}

inline double g_objective(const ModelSpec& spec, const CommunityAssignment& x,
                          const ObservationMatrix& k) {
    if (k.rows() != spec.p() || k.cols() != spec.n())
        throw std::invalid_argument("g_objective: observation shape mismatch");
    const Vector r = flatten(k - signal_matrix(spec, x));
    return r.dot(spec.sigma_pinv() * r);
}

// L_Sigma(x,y) = <A_x - A_y, Sigma^+ (A_x - A_y)>: the mean of f(x) - f(y)
// over the noise, and a quarter of its variance.
inline double l_sigma(const ModelSpec& spec, const CommunityAssignment& x,
                      const CommunityAssignment& y) {
    const Vector d = flatten(signal_matrix(spec, x) - signal_matrix(spec, y));
    return d.dot(spec.sigma_pinv() * d);
}

struct GapStatistics {
    double mean;      // L_Sigma(x,y)
    double variance;  // 4 L_Sigma(x,y)
};

inline GapStatistics gap_statistics(const ModelSpec& spec, const CommunityAssignment& x,
                                    const CommunityAssignment& y) {
    const double l = l_sigma(spec, x, y);
    return {l, 4.0 * l};
}

struct MLEResult {
    CommunityAssignment minimizer;
    double objective = 0.0;            // f at the minimizer
    bool tied = false;                 // a non-equivalent assignment ties the minimum
    bool equivalence_class_hit = false;  // set by callers comparing to a known truth
    long long candidates_evaluated = 0;
};

struct SolveOptions {
    long long budget = 1LL << 24;  // max admissible candidate count, checked up front
    double tie_tol = 1e-12;        // relative above magnitude 1
    bool allow_pruning = true;
    int threads = 1;
};

// Dense fallback evaluator: rebuilds the signal matrix at every leaf.
class GenericObjective : public IncrementalObjective {
public:
    GenericObjective(const ModelSpec& spec, const ObservationMatrix& k)
        : spec_(&spec), labels_(static_cast<std::size_t>(spec.n()), 0),
          u_(spec.sigma_pinv() * flatten(k)) {}

    void assign(int v, int c) override { labels_[static_cast<std::size_t>(v)] = c; }
    void unassign(int, int) override {}
    double value() const override {
        const CommunityAssignment x(labels_, spec_->k());
        const Vector a = flatten(signal_matrix(*spec_, x));
        return a.dot(spec_->sigma_pinv() * a) - 2.0 * a.dot(u_);
    }

private:
    const ModelSpec* spec_;
    std::vector<int> labels_;
    Vector u_;
};

inline std::unique_ptr<IncrementalObjective> make_objective(const ModelSpec& spec,
                                                            const ObservationMatrix& k) {
    if (spec.objective_factory()) return spec.objective_factory()(spec, k);
    return std::make_unique<GenericObjective>(spec, k);
}

namespace detail {

inline double tie_window(double fmin, double tie_tol) {
    return tie_tol * std::max(1.0, std::abs(fmin));
}

// Running minimum with lexicographic tie-breaking and detection of
// non-equivalent ties. Candidates must be offered in lexicographic order
// within a block; blocks merge in block order.
struct SolveAccumulator {
    double fmin = std::numeric_limits<double>::infinity();
    std::optional<std::vector<int>> argmin;
    bool tied = false;
    long long evaluated = 0;

    template <typename EquivFn>
    void offer(const std::vector<int>& labels, double f, double tie_tol, const EquivFn& equiv) {
        ++evaluated;
        if (!argmin) {
            argmin = labels;
            fmin = f;
            return;
        }
        const double window = tie_window(fmin, tie_tol);
        if (f < fmin - window) {
            argmin = labels;
            fmin = f;
            tied = false;
        } else if (f <= fmin + window) {
            if (f < fmin) fmin = f;
            if (!tied && !equiv(labels, *argmin)) tied = true;
        }
    }

    template <typename EquivFn>
    void merge(const SolveAccumulator& o, double tie_tol, const EquivFn& equiv) {
        evaluated += o.evaluated;
        if (!o.argmin) return;
        if (!argmin) {
            fmin = o.fmin;
            argmin = o.argmin;
            tied = o.tied;
            return;
        }
        const double window = tie_window(std::min(fmin, o.fmin), tie_tol);
        if (o.fmin < fmin - window) {
            fmin = o.fmin;
            argmin = o.argmin;
            tied = o.tied;
        } else if (o.fmin <= fmin + window) {
            if (o.fmin < fmin) fmin = o.fmin;
            tied = tied || o.tied || !equiv(*o.argmin, *argmin);
        }
    }
};

// Number of restricted growth strings of length n over at most k labels
// (canonical representatives of Omega under full label permutation), with
// saturation so the budget guard cannot overflow.
inline double rgs_count(int n, int k) {
    std::vector<double> cur(static_cast<std::size_t>(k) + 1, 0.0);
    cur[1] = 1.0;  // one vertex, one used label
    for (int v = 1; v < n; ++v) {
        std::vector<double> nxt(static_cast<std::size_t>(k) + 1, 0.0);
        for (int m = 1; m <= k; ++m) {
            if (cur[static_cast<std::size_t>(m)] == 0.0) continue;
            nxt[static_cast<std::size_t>(m)] += cur[static_cast<std::size_t>(m)] * m;
            if (m < k) nxt[static_cast<std::size_t>(m) + 1] += cur[static_cast<std::size_t>(m)];
        }
        cur = std::move(nxt);
    }
    double total = 0.0;
    for (int m = 1; m <= k; ++m) total += cur[static_cast<std::size_t>(m)];
    return total;
}

inline double multinomial_count(int n, const std::vector<int>& sizes) {
    double lg = std::lgamma(static_cast<double>(n) + 1.0);
    for (int s : sizes) lg -= std::lgamma(static_cast<double>(s) + 1.0);
    return std::exp(lg);
}

struct EnumerationPlan {
    bool prune = false;            // restricted-growth canonical pruning
    std::vector<int> capacity;     // per-label remaining counts; empty = unconstrained
    int min_community = 0;         // least admissible final community size
};

// DFS over the tail v..n-1. labels/used/sizes are the shared mutable state.
template <typename EquivFn>
void enumerate_tail(const ModelSpec& spec, IncrementalObjective& obj, EnumerationPlan& plan,
                    std::vector<int>& labels, int v, int maxused, std::vector<int>& sizes,
                    double tie_tol, const EquivFn& equiv, SolveAccumulator& acc) {
    const int n = spec.n();
    const int k = spec.k();
    if (v == n) {
        for (int c = 0; c < k; ++c)
            if (sizes[static_cast<std::size_t>(c)] < plan.min_community) return;
        acc.offer(labels, obj.value(), tie_tol, equiv);
        return;
    }
    // cannot satisfy the minimum community sizes with the vertices left
    if (plan.min_community > 0) {
        int deficit = 0;
        for (int c = 0; c < k; ++c)
            deficit += std::max(0, plan.min_community - sizes[static_cast<std::size_t>(c)]);
        if (deficit > n - v) return;
    }
    const int top = plan.prune ? std::min(k - 1, maxused + 1) : k - 1;
    for (int c = 0; c <= top; ++c) {
        if (!plan.capacity.empty()) {
            if (plan.capacity[static_cast<std::size_t>(c)] == 0) continue;
            --plan.capacity[static_cast<std::size_t>(c)];
        }
        labels[static_cast<std::size_t>(v)] = c;
        ++sizes[static_cast<std::size_t>(c)];
        obj.assign(v, c);
        enumerate_tail(spec, obj, plan, labels, v + 1, std::max(maxused, c), sizes, tie_tol,
                       equiv, acc);
        obj.unassign(v, c);
        --sizes[static_cast<std::size_t>(c)];
        if (!plan.capacity.empty()) ++plan.capacity[static_cast<std::size_t>(c)];
    }
}

// Lexicographically ordered prefixes of the enumeration tree at a fixed depth,
// used to partition the space across threads deterministically.
inline void collect_prefixes(const EnumerationPlan& plan, int k, int depth,
                             std::vector<int>& prefix, int maxused,
                             std::vector<std::vector<int>>& out, std::vector<int>& capacity) {
    if (static_cast<int>(prefix.size()) == depth) {
        out.push_back(prefix);
        return;
    }
    const int top = plan.prune && prefix.size() > 0
                        ? std::min(k - 1, maxused + 1)
                        : (plan.prune ? 0 : k - 1);
    for (int c = 0; c <= top; ++c) {
        if (!capacity.empty()) {
            if (capacity[static_cast<std::size_t>(c)] == 0) continue;
            --capacity[static_cast<std::size_t>(c)];
        }
        prefix.push_back(c);
        collect_prefixes(plan, k, depth, prefix, std::max(maxused, c), out, capacity);
        prefix.pop_back();
        if (!capacity.empty()) ++capacity[static_cast<std::size_t>(c)];
    }
}

template <typename EquivFn>
MLEResult run_solve(const ModelSpec& spec, const ObservationMatrix& k_obs,
                    EnumerationPlan plan, const SolveOptions& opt, const EquivFn& equiv) {
    const int n = spec.n();
    const int k = spec.k();

    const double candidates = plan.capacity.empty()
                                  ? (plan.prune ? rgs_count(n, k) : std::pow(double(k), n))
                                  : multinomial_count(n, plan.capacity);
    if (candidates > static_cast<double>(opt.budget))
        throw std::runtime_error("solve: enumeration budget exceeded");

    const int threads = std::max(1, opt.threads);
    SolveAccumulator total;
    if (threads == 1) {
        auto obj = make_objective(spec, k_obs);
        std::vector<int> labels(static_cast<std::size_t>(n), -1);
        std::vector<int> sizes(static_cast<std::size_t>(k), 0);
        enumerate_tail(spec, *obj, plan, labels, 0, -1, sizes, opt.tie_tol, equiv, total);
    } else {
        int depth = 1;
        std::vector<std::vector<int>> prefixes;
        while (depth < n) {
            prefixes.clear();
            std::vector<int> prefix;
            std::vector<int> cap = plan.capacity;
            collect_prefixes(plan, k, depth, prefix, -1, prefixes, cap);
            if (static_cast<int>(prefixes.size()) >= 4 * threads) break;
            ++depth;
        }
        std::vector<std::future<SolveAccumulator>> futs;
        futs.reserve(prefixes.size());
        for (const auto& prefix : prefixes) {
            futs.push_back(std::async(std::launch::deferred | std::launch::async,
                                      [&, prefix]() {
                SolveAccumulator acc;
                EnumerationPlan local = plan;
                auto obj = make_objective(spec, k_obs);
                std::vector<int> labels(static_cast<std::size_t>(n), -1);
                std::vector<int> sizes(static_cast<std::size_t>(k), 0);
                int maxused = -1;
                for (int v = 0; v < static_cast<int>(prefix.size()); ++v) {
                    const int c = prefix[static_cast<std::size_t>(v)];
                    labels[static_cast<std::size_t>(v)] = c;
                    ++sizes[static_cast<std::size_t>(c)];
                    if (!local.capacity.empty()) --local.capacity[static_cast<std::size_t>(c)];
                    obj->assign(v, c);
                    maxused = std::max(maxused, c);
                }
                enumerate_tail(spec, *obj, local, labels, static_cast<int>(prefix.size()),
                               maxused, sizes, opt.tie_tol, equiv, acc);
                return acc;
            }));
        }
        for (auto& f : futs) total.merge(f.get(), opt.tie_tol, equiv);
    }

    if (!total.argmin)
        throw std::domain_error("solve: feasible set is empty");
    MLEResult res{CommunityAssignment(*total.argmin, k), total.fmin, total.tied, false,
                  total.evaluated};
    return res;
}

}  // namespace detail

// Whether every label permutation preserves theta (enables k!-fold canonical
// pruning of the search space).
inline bool fully_label_symmetric(const ThetaFunction& theta) {
    bool all = true;
    for_each_permutation(theta.labels(), [&](const std::vector<int>& perm) {
        if (!theta.preserves(Permutation(perm))) {
            all = false;
            return false;
        }
        return true;
    });
    return all;
}

// Exact MLE over Omega, optionally restricted to assignments whose community
// fractions are all >= c_min. Ties within tolerance keep the
// lexicographically smallest assignment and set the tied flag when a
// non-equivalent assignment matches the minimum.
inline MLEResult solve_unknown_sizes(const ModelSpec& spec, const ObservationMatrix& k_obs,
                                     double c_min = 0.0, const SolveOptions& opt = {}) {
    if (c_min < 0.0 || c_min > 1.0)
        throw std::invalid_argument("solve_unknown_sizes: c_min outside [0,1]");
    detail::EnumerationPlan plan;
    plan.prune = opt.allow_pruning && fully_label_symmetric(spec.theta());
    plan.min_community =
        c_min > 0.0 ? static_cast<int>(std::ceil(c_min * spec.n() - 1e-9)) : 0;
    auto equiv = [&spec](const std::vector<int>& a, const std::vector<int>& b) {
        return is_equivalent(CommunityAssignment(a, spec.k()),
                             CommunityAssignment(b, spec.k()), spec.theta());
    };
    return detail::run_solve(spec, k_obs, std::move(plan), opt, equiv);
}

// Exact MLE over the assignments with exactly the given community sizes.
// No canonical pruning here: a size vector with distinct entries is not
// invariant under relabeling.
inline MLEResult solve_known_sizes(const ModelSpec& spec, const ObservationMatrix& k_obs,
                                   const std::vector<int>& sizes, const SolveOptions& opt = {}) {
    if (static_cast<int>(sizes.size()) != spec.k())
        throw std::invalid_argument("solve_known_sizes: sizes length != k");
    int tot = 0;
    for (int s : sizes) {
        if (s < 0) throw std::invalid_argument("solve_known_sizes: negative size");
        tot += s;
    }
    if (tot != spec.n())
        throw std::invalid_argument("solve_known_sizes: sizes do not sum to n");
    detail::EnumerationPlan plan;
    plan.capacity = sizes;
    auto equiv = [&spec](const std::vector<int>& a, const std::vector<int>& b) {
        return is_equivalent(CommunityAssignment(a, spec.k()),
                             CommunityAssignment(b, spec.k()), spec.theta());
    };
    return detail::run_solve(spec, k_obs, std::move(plan), opt, equiv);
}

}  // namespace commdet
