#pragma once

// Two-community model with vertex-sum noise on a full n-by-n observation:
// p = n, (A_x)_{i,j} = 1{x(i) = x(j)}, W_{i,j} = xi_i + xi_j with xi i.i.d.
// N(0, s^2). Sigma and its Moore-Penrose inverse have closed forms, as do
// L_Sigma (through the confusion table), the single-move gaps, the recovery
// threshold, and the eta statistics; everything here scales to large n
// without touching a dense n^2-by-n^2 matrix.

#include <cmath>
#include <optional>

#include "commdet/confusion.hpp"
#include "commdet/mle.hpp"
#include "commdet/model.hpp"

namespace commdet::vertexsum {

struct VertexSumSpec {
    int n = 0;
    double alpha = 0.0;  // community-1 fraction; sizes are (floor(alpha n), rest)
    double s = 0.0;      // vertex noise scale

    VertexSumSpec(int n_, double alpha_, double s_) : n(n_), alpha(alpha_), s(s_) {
        if (n < 2) throw std::invalid_argument("VertexSumSpec: n must be >= 2");
        if (!(s > 0.0)) throw std::invalid_argument("VertexSumSpec: s must be > 0");
        if (alpha < 0.5 || alpha >= 2.0 / 3.0)
            throw std::invalid_argument(
                "VertexSumSpec: alpha must lie in [1/2, 2/3) (1/2 only for the balanced case)");
    }

    // exact community sizes; the epsilon guards floating floor(alpha*n) when
    // alpha*n is mathematically integral
    int size1() const { return static_cast<int>(std::floor(alpha * n + 1e-9)); }
    int size2() const { return n - size1(); }
};

// truth assignment: first floor(alpha n) vertices in community 0
inline CommunityAssignment canonical_truth(const VertexSumSpec& spec) {
    std::vector<int> labels(static_cast<std::size_t>(spec.n), 1);
    for (int v = 0; v < spec.size1(); ++v) labels[static_cast<std::size_t>(v)] = 0;
    return CommunityAssignment(std::move(labels), 2);
}

// co-membership signal: theta(x, i, a) = 1{x(i) = a}; every label permutation
// preserves it
inline ThetaFunction make_theta(int n) {
    return ThetaFunction(
        n, 2, [](const CommunityAssignment& x, int i, int a) { return x(i) == a ? 1.0 : 0.0; },
        [](const Permutation&) { return true; });
}

// Covariance of the flattened noise, by the overlap of the index pairs:
//   0                     {i,j} and {k,l} disjoint
//   s^2                   one shared vertex, i != j and k != l
//   2 s^2                 one shared vertex, exactly one of the pairs diagonal
//   2 s^2                 {i,j} = {k,l} as sets, i != j
//   4 s^2                 i = j = k = l
inline SymMatrix build_sigma(const VertexSumSpec& spec) {
    const int n = spec.n;
    const double s2 = spec.s * spec.s;
    Matrix m(n * n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    const int shared = (i == k || i == l ? 1 : 0) + (j == k || j == l ? 1 : 0) -
                                       (i == j && (i == k || i == l) ? 1 : 0);
                    double v = 0.0;
                    if (shared == 0) {
                        v = 0.0;
                    } else if (i == j && k == l) {
                        v = i == k ? 4.0 * s2 : 0.0;
                    } else if (i == j || k == l) {
                        v = 2.0 * s2;
                    } else if ((i == k && j == l) || (i == l && j == k)) {
                        v = 2.0 * s2;  // same unordered pair
                    } else {
                        v = s2;  // exactly one shared vertex, both pairs off-diagonal
                    }
                    m(n * i + j, n * k + l) = v;
                }
    return SymMatrix(std::move(m));
}

// Closed-form Moore-Penrose inverse: entry ((i,j),(k,l)) is
//   -3/(4 n^3 s^2)        disjoint pairs
//   (n-3)/(4 n^3 s^2)     one shared vertex, both pairs off-diagonal
//   (2n-3)/(4 n^3 s^2)    one shared vertex with one pair diagonal, or
//                         {i,j} = {k,l} with i != j
//   (4n-3)/(4 n^3 s^2)    i = j = k = l
inline SymMatrix build_sigma_pinv(const VertexSumSpec& spec) {
    const int n = spec.n;
    const double denom = 4.0 * std::pow(static_cast<double>(n), 3) * spec.s * spec.s;
    Matrix m(n * n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double num = -3.0;
                    if (i == j && k == l) {
                        num = i == k ? 4.0 * n - 3.0 : -3.0;
                    } else if (i == j || k == l) {
                        const bool shared = i == k || i == l || j == k || j == l;
                        num = shared ? 2.0 * n - 3.0 : -3.0;
                    } else if ((i == k && j == l) || (i == l && j == k)) {
                        num = 2.0 * n - 3.0;
                    } else if (i == k || i == l || j == k || j == l) {
                        num = n - 3.0;
                    }
                    m(n * i + j, n * k + l) = num / denom;
                }
    return SymMatrix(std::move(m));
}

// Diagonal / skew coordinates of a two-community confusion table.
struct ABPair {
    int a = 0;  // t_00 + t_11
    int b = 0;  // t_00 - t_11

    ABPair(int a_, int b_) : a(a_), b(b_) {
        if (std::abs(b) > a) throw std::invalid_argument("ABPair: |B| > A");
        if (((a % 2) + 2) % 2 != ((b % 2) + 2) % 2)
            throw std::invalid_argument("ABPair: A and B must have equal parity");
    }

    static ABPair from_table(const ConfusionTable& t) {
        if (t.k() != 2) throw std::invalid_argument("ABPair: table must be 2x2");
        return ABPair(t(0, 0) + t(1, 1), t(0, 0) - t(1, 1));
    }
};

// L_Sigma through the confusion table of (x, z):
//   [(nA - 3B^2)(B + d)^2 + n B^2 (n - A)] / (n^3 s^2)
// with A, B from the diagonal and d = (column 2 sum) - (column 1 sum). Exact
// for every pair of two-community assignments, not only the spec's truth.
inline double l_sigma_closed(const VertexSumSpec& spec, const ConfusionTable& t) {
    if (t.k() != 2) throw std::invalid_argument("l_sigma_closed: table must be 2x2");
    if (t.n() != spec.n)
        throw std::invalid_argument("l_sigma_closed: table total != n");
    const double n = static_cast<double>(spec.n);
    const ABPair ab = ABPair::from_table(t);
    const double a = static_cast<double>(ab.a);
    const double b = static_cast<double>(ab.b);
    const double d = static_cast<double>(t.col_sum(1) - t.col_sum(0));
    const double bd = b + d;
    return ((n * a - 3.0 * b * b) * bd * bd + n * b * b * (n - a)) /
           (n * n * n * spec.s * spec.s);
}

enum class MoveDirection {
    OneToTwo,  // a community-1 vertex relabeled 2: t_00 = n1 - 1, t_11 = n2
    TwoToOne,  // a community-2 vertex relabeled 1: t_00 = n1, t_11 = n2 - 1
};

// L_Sigma(y^(a), y) for a single relabeled vertex, as a polynomial in alpha;
// matches l_sigma_closed on the corresponding table when alpha*n is integral.
inline double single_move_gap(const VertexSumSpec& spec, MoveDirection dir) {
    const double n = static_cast<double>(spec.n);
    const double al = spec.alpha;
    const double n3 = n * n * n;
    double poly;
    if (dir == MoveDirection::TwoToOne) {
        poly = (2 * al - 1) * (2 * al - 1) * n3 - 4 * (3 * al - 1) * (al - 1) * n * n -
               6 * (2 * al - 1) * n - 3;
    } else {
        poly = (2 * al - 1) * (2 * al - 1) * n3 - 4 * al * (3 * al - 2) * n * n +
               6 * (2 * al - 1) * n - 3;
    }
    return poly / (spec.s * spec.s * n3);
}

// Noise scale below which exact recovery becomes possible: (2a-1)/sqrt(8 log n).
inline double recovery_threshold(int n, double alpha) {
    if (n < 2) throw std::invalid_argument("recovery_threshold: n must be >= 2");
    if (alpha <= 0.5 || alpha >= 2.0 / 3.0)
        throw std::invalid_argument("recovery_threshold: alpha must lie in (1/2, 2/3)");
    return (2.0 * alpha - 1.0) / std::sqrt(8.0 * std::log(static_cast<double>(n)));
}

// Uniform lower-bound constant for L_Sigma * s^2 / n over tables outside
// B_eps: min of the three regime bounds.
inline double b_complement_constant(double alpha, double eps) {
    if (alpha <= 0.5 || alpha >= 2.0 / 3.0)
        throw std::invalid_argument("b_complement_constant: alpha must lie in (1/2, 2/3)");
    if (eps <= 0.0 || eps >= (1.0 - alpha) / 2.0)
        throw std::invalid_argument("b_complement_constant: eps must lie in (0, (1-alpha)/2)");
    const double g = alpha - 0.5;
    const double c1 = alpha * (2.0 - 3.0 * alpha) * eps * eps;
    const double c2 = g * g * (1.0 - g * g) * eps * (1.0 + eps) * (1.0 + eps);
    const double c3 = eps * eps * g * g;
    return std::min({c1, c2, c3});
}

namespace detail {

// Row sums of D_a = A_{y^(a)} - A_y (a symmetric matrix with support in row
// and column a), enough to evaluate any bilinear form u^T Sigma^+ v through
//   <P, Sigma^+ R> = [4n sum_v rp_v rr_v - 3 S(P) S(R)] / (4 n^3 s^2).
struct FlipProfile {
    std::vector<double> rowsum;
    double total = 0.0;  // S = sum of all entries
    double l = 0.0;      // L_Sigma(y^(a), y)
};

inline FlipProfile flip_profile(const VertexSumSpec& spec, int a) {
    const int n = spec.n;
    if (a < 0 || a >= n) throw std::invalid_argument("flip_profile: vertex out of range");
    const int n1 = spec.size1();
    const int old_label = a < n1 ? 0 : 1;
    const int new_label = 1 - old_label;
    const double n_old = old_label == 0 ? n1 : n - n1;
    const double n_new = old_label == 0 ? n - n1 : n1;
    FlipProfile prof;
    prof.rowsum.assign(static_cast<std::size_t>(n), 0.0);
    for (int v = 0; v < n; ++v) {
        const int yv = v < n1 ? 0 : 1;
        prof.rowsum[static_cast<std::size_t>(v)] = yv == new_label ? 1.0 : -1.0;
    }
    prof.rowsum[static_cast<std::size_t>(a)] = n_new - n_old + 1.0;
    prof.total = 2.0 * (n_new - n_old + 1.0);

    const CommunityAssignment y = canonical_truth(spec);
    prof.l = l_sigma_closed(spec, confusion_table(y.with_label(a, new_label), y));
    return prof;
}

inline double bilinear(const VertexSumSpec& spec, const FlipProfile& p, const FlipProfile& r) {
    const double n = static_cast<double>(spec.n);
    double dot = 0.0;
    for (int v = 0; v < spec.n; ++v)
        dot += p.rowsum[static_cast<std::size_t>(v)] * r.rowsum[static_cast<std::size_t>(v)];
    return (4.0 * n * dot - 3.0 * p.total * r.total) / (4.0 * n * n * n * spec.s * spec.s);
}

}  // namespace detail

// Exact moments of the normalized gap statistics eta_a for single-vertex
// flips of the canonical truth: E eta_a^2 = 4 / L_Sigma(y^(a), y) and
// E eta_a1 eta_a2 = 4 <D_a1, Sigma^+ D_a2> / (L_a1 L_a2). Closed-form; no
// dense matrix, so usable at large n.
inline double eta_moment(const VertexSumSpec& spec, int a1, std::optional<int> a2 = {}) {
    const auto p1 = detail::flip_profile(spec, a1);
    if (p1.l <= 0.0) throw std::domain_error("eta_moment: degenerate flip (L = 0)");
    if (!a2 || *a2 == a1) return 4.0 / p1.l;
    const auto p2 = detail::flip_profile(spec, *a2);
    if (p2.l <= 0.0) throw std::domain_error("eta_moment: degenerate flip (L = 0)");
    return 4.0 * detail::bilinear(spec, p1, p2) / (p1.l * p2.l);
}

// Covariance matrix Phi_H of {eta_a : a in H} by the closed forms above.
inline SymMatrix eta_flip_covariance(const VertexSumSpec& spec, const std::vector<int>& h) {
    const int m = static_cast<int>(h.size());
    if (m == 0) throw std::invalid_argument("eta_flip_covariance: empty vertex set");
    std::vector<detail::FlipProfile> profs;
    profs.reserve(h.size());
    for (int a : h) {
        profs.push_back(detail::flip_profile(spec, a));
        if (profs.back().l <= 0.0)
            throw std::domain_error("eta_flip_covariance: degenerate flip (L = 0)");
    }
    Matrix phi(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            const double u = detail::bilinear(spec, profs[static_cast<std::size_t>(i)],
                                              profs[static_cast<std::size_t>(j)]);
            const double v = 4.0 * u / (profs[static_cast<std::size_t>(i)].l *
                                        profs[static_cast<std::size_t>(j)].l);
            phi(i, j) = v;
            phi(j, i) = v;
        }
    return SymMatrix(std::move(phi));
}

// Incremental f for this model through sufficient statistics: with community
// sizes m_c and T_c = sum over community c of (row sum + column sum of K),
//   f(x) = [4n sum m_c^3 - 3 (sum m_c^2)^2 - 4n sum m_c T_c
//           + 6 (sum m_c^2) S(K)] / (4 n^3 s^2).
// O(1) per label change, which is what makes n = 20 enumeration cheap.
class VertexSumObjective : public IncrementalObjective {
public:
    VertexSumObjective(const VertexSumSpec& spec, const ObservationMatrix& k)
        : n_(spec.n), scale_(1.0 / (4.0 * std::pow(double(spec.n), 3) * spec.s * spec.s)) {
        if (k.rows() != n_ || k.cols() != n_)
            throw std::invalid_argument("VertexSumObjective: observation must be n x n");
        g_.assign(static_cast<std::size_t>(n_), 0.0);
        for (int v = 0; v < n_; ++v)
            g_[static_cast<std::size_t>(v)] = k.row(v).sum() + k.col(v).sum();
        s_k_ = k.sum();
        m_[0] = m_[1] = 0;
        t_[0] = t_[1] = 0.0;
    }

    void assign(int v, int c) override {
        ++m_[c];
        t_[c] += g_[static_cast<std::size_t>(v)];
    }
    void unassign(int v, int c) override {
        --m_[c];
        t_[c] -= g_[static_cast<std::size_t>(v)];
    }
    double value() const override {
        const double n = static_cast<double>(n_);
        const double m0 = m_[0], m1 = m_[1];
        const double sq = m0 * m0 + m1 * m1;
        return (4.0 * n * (m0 * m0 * m0 + m1 * m1 * m1) - 3.0 * sq * sq -
                4.0 * n * (m0 * t_[0] + m1 * t_[1]) + 6.0 * sq * s_k_) *
               scale_;
    }

private:
    int n_;
    double scale_;
    std::vector<double> g_;
    double s_k_ = 0.0;
    int m_[2];
    double t_[2];
};

// ModelSpec wired with the closed-form fast objective (pass fast = false to
// force the dense generic evaluator, e.g. for cross-validation).
inline ModelSpec make_model_spec(const VertexSumSpec& spec, bool fast = true) {
    ModelSpec model(spec.n, spec.n, 2, make_theta(spec.n), build_sigma(spec));
    if (fast) {
        const VertexSumSpec vs = spec;
        model.set_objective_factory(
            [vs](const ModelSpec&, const ObservationMatrix& k) {
                return std::make_unique<VertexSumObjective>(vs, k);
            });
    }
    return model;
}

}  // namespace commdet::vertexsum
