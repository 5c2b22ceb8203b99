#pragma once

// Community assignments x : {vertices} -> {labels} and label permutations.
// Labels are 0-based internally; all text I/O (io.hpp) is 1-based.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace commdet {

class CommunityAssignment {
public:
    CommunityAssignment(std::vector<int> labels, int k)
        : labels_(std::move(labels)), k_(k) {
        if (k_ < 1)
            throw std::invalid_argument("CommunityAssignment: k must be >= 1");
        if (labels_.empty())
            throw std::invalid_argument("CommunityAssignment: no vertices");
        for (int c : labels_)
            if (c < 0 || c >= k_)
                throw std::invalid_argument("CommunityAssignment: label out of range [0,k)");
    }

    int n() const { return static_cast<int>(labels_.size()); }
    int k() const { return k_; }
    int operator()(int v) const { return labels_[static_cast<std::size_t>(v)]; }
    const std::vector<int>& labels() const { return labels_; }

    std::vector<int> community_sizes() const {
        std::vector<int> sizes(static_cast<std::size_t>(k_), 0);
        for (int c : labels_) ++sizes[static_cast<std::size_t>(c)];
        return sizes;
    }

    // copy with vertex v relabeled to c (the y^(a) construction)
    CommunityAssignment with_label(int v, int c) const {
        if (v < 0 || v >= n())
            throw std::invalid_argument("with_label: vertex out of range");
        CommunityAssignment out(*this);
        if (c < 0 || c >= k_)
            throw std::invalid_argument("with_label: label out of range");
        out.labels_[static_cast<std::size_t>(v)] = c;
        return out;
    }

    // copy with the labels of vertices a and b exchanged (the y^(ab) construction)
    CommunityAssignment with_swapped(int a, int b) const {
        if (a < 0 || a >= n() || b < 0 || b >= n())
            throw std::invalid_argument("with_swapped: vertex out of range");
        CommunityAssignment out(*this);
        std::swap(out.labels_[static_cast<std::size_t>(a)],
                  out.labels_[static_cast<std::size_t>(b)]);
        return out;
    }

    bool operator==(const CommunityAssignment& o) const = default;

private:
    std::vector<int> labels_;
    int k_;
};

// Bijection on the label set {0..k-1}.
class Permutation {
public:
    explicit Permutation(std::vector<int> map) : map_(std::move(map)) {
        const int k = static_cast<int>(map_.size());
        std::vector<bool> seen(map_.size(), false);
        for (int v : map_) {
            if (v < 0 || v >= k || seen[static_cast<std::size_t>(v)])
                throw std::invalid_argument("Permutation: not a bijection on {0..k-1}");
            seen[static_cast<std::size_t>(v)] = true;
        }
    }

    static Permutation identity(int k) {
        std::vector<int> m(static_cast<std::size_t>(k));
        std::iota(m.begin(), m.end(), 0);
        return Permutation(std::move(m));
    }

    int k() const { return static_cast<int>(map_.size()); }
    int operator()(int a) const { return map_[static_cast<std::size_t>(a)]; }
    const std::vector<int>& map() const { return map_; }

    bool is_identity() const {
        for (int a = 0; a < k(); ++a)
            if (map_[static_cast<std::size_t>(a)] != a) return false;
        return true;
    }

    bool operator==(const Permutation& o) const = default;

private:
    std::vector<int> map_;
};

// eta o x : relabel every vertex through the permutation
inline CommunityAssignment relabel(const Permutation& eta, const CommunityAssignment& x) {
    if (eta.k() != x.k())
        throw std::invalid_argument("relabel: permutation size != k");
    std::vector<int> out(static_cast<std::size_t>(x.n()));
    for (int v = 0; v < x.n(); ++v) out[static_cast<std::size_t>(v)] = eta(x(v));
    return CommunityAssignment(std::move(out), x.k());
}

// Visit all k! permutations of {0..k-1} in lexicographic order; f returns false to stop.
template <typename F>
void for_each_permutation(int k, F&& f) {
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    do {
        if (!f(perm)) return;
    } while (std::next_permutation(perm.begin(), perm.end()));
}

}  // namespace commdet
