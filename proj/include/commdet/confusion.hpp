#pragma once

// Confusion tables t_{i,j}(x,z) = |x^-1(i) n z^-1(j)|, the misassignment
// distance, the B / B_eps table classes, and the one-move-at-a-time path
// between assignments.

#include <vector>

#include "commdet/assignment.hpp"
#include "commdet/theta.hpp"

namespace commdet {

class ConfusionTable {
public:
    ConfusionTable(std::vector<int> counts, int k) : t_(std::move(counts)), k_(k) {
        if (k_ < 1 || t_.size() != static_cast<std::size_t>(k_) * static_cast<std::size_t>(k_))
            throw std::invalid_argument("ConfusionTable: counts must be k*k");
        for (int c : t_)
            if (c < 0) throw std::invalid_argument("ConfusionTable: negative count");
    }

    int k() const { return k_; }
    int operator()(int i, int j) const {
        return t_[static_cast<std::size_t>(i) * static_cast<std::size_t>(k_) +
                  static_cast<std::size_t>(j)];
    }
    int n() const {
        int s = 0;
        for (int c : t_) s += c;
        return s;
    }
    int row_sum(int i) const {
        int s = 0;
        for (int j = 0; j < k_; ++j) s += (*this)(i, j);
        return s;
    }
    int col_sum(int j) const {
        int s = 0;
        for (int i = 0; i < k_; ++i) s += (*this)(i, j);
        return s;
    }
    int trace() const {
        int s = 0;
        for (int i = 0; i < k_; ++i) s += (*this)(i, i);
        return s;
    }

    bool operator==(const ConfusionTable& o) const = default;

private:
    std::vector<int> t_;
    int k_;
};

inline ConfusionTable confusion_table(const CommunityAssignment& x,
                                      const CommunityAssignment& z) {
    if (x.n() != z.n() || x.k() != z.k())
        throw std::invalid_argument("confusion_table: mismatched assignments");
    const int k = x.k();
    std::vector<int> t(static_cast<std::size_t>(k) * static_cast<std::size_t>(k), 0);
    for (int v = 0; v < x.n(); ++v)
        ++t[static_cast<std::size_t>(x(v)) * static_cast<std::size_t>(k) +
            static_cast<std::size_t>(z(v))];
    return ConfusionTable(std::move(t), k);
}

// D_Omega(x,z): number of vertices assigned different labels, equal to the
// off-diagonal mass of the confusion table.
inline int distance(const CommunityAssignment& x, const CommunityAssignment& z) {
    const ConfusionTable t = confusion_table(x, z);
    return t.n() - t.trace();
}

// Table class B: column sums match the supplied true community sizes.
inline bool in_b(const ConfusionTable& t, const std::vector<int>& sizes) {
    if (static_cast<int>(sizes.size()) != t.k())
        throw std::invalid_argument("in_b: sizes length != k");
    for (int j = 0; j < t.k(); ++j)
        if (t.col_sum(j) != sizes[static_cast<std::size_t>(j)]) return false;
    return true;
}

// Table class B_eps: every column maximum is within n*eps of that column's
// sum, the per-column argmax map w is a bijection, and w preserves theta.
// Argmax ties are resolved generously: membership holds if any argmax choice
// satisfies all three conditions.
inline bool in_b_epsilon(const ConfusionTable& t, double eps, const ThetaFunction& theta) {
    if (eps <= 0.0)
        throw std::invalid_argument("in_b_epsilon: eps must be > 0");
    const int k = t.k();
    if (theta.labels() != k)
        throw std::invalid_argument("in_b_epsilon: theta labels != table k");
    const double n = static_cast<double>(t.n());
    std::vector<int> colmax(static_cast<std::size_t>(k), 0);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i)
            colmax[static_cast<std::size_t>(j)] = std::max(colmax[static_cast<std::size_t>(j)], t(i, j));
    bool member = false;
    for_each_permutation(k, [&](const std::vector<int>& perm) {
        for (int j = 0; j < k; ++j) {
            const int w_j = perm[static_cast<std::size_t>(j)];
            if (t(w_j, j) != colmax[static_cast<std::size_t>(j)]) return true;
            if (static_cast<double>(t(w_j, j)) < static_cast<double>(t.col_sum(j)) - n * eps)
                return true;
        }
        if (!theta.preserves(Permutation(perm))) return true;
        member = true;
        return false;
    });
    return member;
}

// Community-changing process from y_star toward x: repeatedly pick the least
// (j,i), j != i, with t_{j,i}(x, y_r) > 0 and relabel the smallest-index
// vertex u with x(u)=j, y_r(u)=i to label j. Each step lowers D_Omega by one;
// the returned sequence is y_star = y_0, ..., y_h = x with h = D_Omega(x, y_star).
inline std::vector<CommunityAssignment> assignment_path(const CommunityAssignment& x,
                                                        const CommunityAssignment& y_star) {
    if (x.n() != y_star.n() || x.k() != y_star.k())
        throw std::invalid_argument("assignment_path: mismatched assignments");
    std::vector<CommunityAssignment> path;
    path.push_back(y_star);
    CommunityAssignment cur = y_star;
    const int k = x.k();
    for (;;) {
        int pick = -1;
        for (int j = 0; j < k && pick < 0; ++j) {
            for (int i = 0; i < k && pick < 0; ++i) {
                if (i == j) continue;
                for (int v = 0; v < x.n(); ++v) {
                    if (x(v) == j && cur(v) == i) {
                        pick = v;
                        break;
                    }
                }
            }
        }
        if (pick < 0) break;
        cur = cur.with_label(pick, x(pick));
        path.push_back(cur);
    }
    return path;
}

}  // namespace commdet
