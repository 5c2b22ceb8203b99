#pragma once

// The observation model: K_y = A_y + W where (A_x)_{i,j} = theta(x, i, x(j))
// and W is centered Gaussian with pn-by-pn covariance Sigma over the
// flattening (i,j) -> n*i + j (0-based, fixed project-wide).

#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>

#include "commdet/assignment.hpp"
#include "commdet/linalg.hpp"
#include "commdet/rng.hpp"
#include "commdet/theta.hpp"

namespace commdet {

using ObservationMatrix = Matrix;  // p rows, n columns

// Residuals whose null-space component exceeds this fraction of their norm
// are rejected as off the support subspace of Sigma.
inline constexpr double kSupportTol = 1e-6;

inline Vector flatten(const Matrix& m) {
    Vector v(m.rows() * m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) v[i * m.cols() + j] = m(i, j);
    return v;
}

inline Matrix unflatten(const Vector& v, int p, int n) {
    if (v.size() != static_cast<Eigen::Index>(p) * n)
        throw std::invalid_argument("unflatten: size mismatch");
    Matrix m(p, n);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = v[static_cast<Eigen::Index>(i) * n + j];
    return m;
}

// Incremental objective evaluator used by the enumeration solvers. assign and
// unassign are called in stack (DFS) order; value() is read only when every
// vertex has a label.
class IncrementalObjective {
public:
    virtual ~IncrementalObjective() = default;
    virtual void assign(int v, int c) = 0;
    virtual void unassign(int v, int c) = 0;
    virtual double value() const = 0;
};

// Immutable model instance. The spectral pieces of Sigma (factorization,
// pseudo-inverse, PSD square root, log pseudo-determinant) are computed once
// at construction and shared by sampling, densities and objectives; the
// object is safe for concurrent read-only use afterwards.
class ModelSpec {
public:
    using ObjectiveFactory = std::function<std::unique_ptr<IncrementalObjective>(
        const ModelSpec&, const ObservationMatrix&)>;

    ModelSpec(int n, int p, int k, ThetaFunction theta, SymMatrix sigma)
        : n_(n), p_(p), k_(k), theta_(std::move(theta)), sigma_(std::move(sigma)),
          eig_(eigen_factorize(sigma_)) {
        if (n_ < 1 || p_ < 1 || k_ < 1)
            throw std::invalid_argument("ModelSpec: n, p, k must be >= 1");
        if (theta_.coords() != p_ || theta_.labels() != k_)
            throw std::invalid_argument("ModelSpec: theta shape != (p, k)");
        if (sigma_.dim() != p_ * n_)
            throw std::invalid_argument("ModelSpec: sigma dimension != p*n");
        Vector inv = Vector::Zero(sigma_.dim());
        Vector root = Vector::Zero(sigma_.dim());
        log_pdet_ = 0.0;
        for (int i = 0; i < sigma_.dim(); ++i) {
            if (eig_.eigenvalues[i] < -eig_.cutoff)
                throw std::invalid_argument("ModelSpec: sigma is not PSD");
            if (!eig_.significant(i)) continue;
            inv[i] = 1.0 / eig_.eigenvalues[i];
            root[i] = std::sqrt(eig_.eigenvalues[i]);
            log_pdet_ += std::log(eig_.eigenvalues[i]);
        }
        pinv_ = eig_.eigenvectors * inv.asDiagonal() * eig_.eigenvectors.transpose();
        sqrt_ = eig_.eigenvectors * root.asDiagonal() * eig_.eigenvectors.transpose();
    }

    int n() const { return n_; }
    int p() const { return p_; }
    int k() const { return k_; }
    const ThetaFunction& theta() const { return theta_; }
    const SymMatrix& sigma() const { return sigma_; }
    const EigenFactorization& sigma_eigen() const { return eig_; }
    const Matrix& sigma_pinv() const { return pinv_; }
    const Matrix& sigma_sqrt() const { return sqrt_; }
    double sigma_log_pseudo_det() const { return log_pdet_; }
    int sigma_rank() const { return eig_.rank; }

    // Optional model-specific fast objective; solvers fall back to the dense
    // generic evaluator when unset.
    void set_objective_factory(ObjectiveFactory f) { objective_factory_ = std::move(f); }
    const ObjectiveFactory& objective_factory() const { return objective_factory_; }

private:
    int n_, p_, k_;
    ThetaFunction theta_;
    SymMatrix sigma_;
    EigenFactorization eig_;
    Matrix pinv_;
    Matrix sqrt_;
    double log_pdet_ = 0.0;
    ObjectiveFactory objective_factory_;
};

inline ObservationMatrix signal_matrix(const ModelSpec& spec, const CommunityAssignment& x) {
    if (x.n() != spec.n() || x.k() != spec.k())
        throw std::invalid_argument("signal_matrix: assignment shape mismatch");
    Matrix a(spec.p(), spec.n());
    for (int i = 0; i < spec.p(); ++i)
        for (int j = 0; j < spec.n(); ++j) a(i, j) = spec.theta()(x, i, x(j));
    return a;
}

// W = unflatten(Sigma^{1/2} z), z i.i.d. standard normal from the seed.
inline ObservationMatrix sample_noise(const ModelSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    Vector z(spec.sigma().dim());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return unflatten(spec.sigma_sqrt() * z, spec.p(), spec.n());
}

inline ObservationMatrix observe(const ModelSpec& spec, const CommunityAssignment& y,
                                 std::uint64_t seed) {
    return signal_matrix(spec, y) + sample_noise(spec, seed);
}

// Log of the density restricted to the support subspace A_x + range(Sigma):
//   -(pn/2) log(2 pi) - (1/2) log det* Sigma - G_Sigma(x, K)/2.
// Observations off the support (relative null-space residual > kSupportTol)
// signal an inconsistent Sigma and are rejected.
inline double log_density(const ModelSpec& spec, const CommunityAssignment& x,
                          const ObservationMatrix& k) {
    if (k.rows() != spec.p() || k.cols() != spec.n())
        throw std::invalid_argument("log_density: observation shape mismatch");
    const Vector r = flatten(k - signal_matrix(spec, x));
    const auto& eig = spec.sigma_eigen();
    Vector proj = Vector::Zero(r.size());
    for (int i = 0; i < spec.sigma().dim(); ++i) {
        if (!eig.significant(i)) continue;
        const auto q = eig.eigenvectors.col(i);
        proj += q * q.dot(r);
    }
    const double off = (r - proj).norm();
    if (off > kSupportTol * r.norm())
        throw std::domain_error("log_density: observation off the support subspace of sigma");
    const double d = static_cast<double>(spec.p()) * static_cast<double>(spec.n());
    const double g = r.dot(spec.sigma_pinv() * r);
    return -0.5 * (d * std::log(2.0 * std::numbers::pi) + spec.sigma_log_pseudo_det()) - 0.5 * g;
}

}  // namespace commdet
