#pragma once

// Spectral helpers for symmetric matrices: factorization, pseudo-determinant,
// Moore-Penrose inverse, PSD square root, quadratic forms. Backed by Eigen's
// SelfAdjointEigenSolver; rank decisions use a single relative cutoff so the
// support subspace is consistent across all of them.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace commdet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Eigenvalues with |lambda| <= cutoff * max(|lambda_max|, 1) are treated as zero.
inline constexpr double kRankCutoff = 1e-10;

// Symmetric matrix, validated on construction.
class SymMatrix {
public:
    explicit SymMatrix(Matrix m, double sym_tol = 1e-12) : m_(std::move(m)) {
        if (m_.rows() != m_.cols())
            throw std::invalid_argument("SymMatrix: not square");
        const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
        if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
            throw std::invalid_argument("SymMatrix: not symmetric");
        // exact symmetry downstream regardless of input roundoff
        m_ = ((m_ + m_.transpose()) / 2.0).eval();
    }

    static SymMatrix identity(int d) { return SymMatrix(Matrix::Identity(d, d)); }
    static SymMatrix zero(int d) { return SymMatrix(Matrix::Zero(d, d)); }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& mat() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

private:
    Matrix m_;
};

// A = V diag(lambda) V^T with eigenvalues sorted descending and orthonormal
// eigenvector columns. rank counts eigenvalues of magnitude above the cutoff;
// for PSD input those are exactly the leading ones.
struct EigenFactorization {
    Vector eigenvalues;
    Matrix eigenvectors;
    int rank = 0;
    double cutoff = 0.0;  // absolute threshold that was applied

    bool significant(int i) const { return std::abs(eigenvalues[i]) > cutoff; }

    Matrix reconstruct() const {
        return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
    }
};

inline EigenFactorization eigen_factorize(const SymMatrix& a, double rank_cutoff = kRankCutoff) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.mat());
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigen_factorize: eigensolver failed to converge");
    EigenFactorization f;
    const int d = a.dim();
    f.eigenvalues = solver.eigenvalues().reverse();
    f.eigenvectors = solver.eigenvectors().rowwise().reverse();
    const double lam_max = f.eigenvalues.cwiseAbs().maxCoeff();
    f.cutoff = rank_cutoff * std::max(lam_max, 1.0);
    f.rank = 0;
    for (int i = 0; i < d; ++i)
        if (f.significant(i)) ++f.rank;
    return f;
}

// Product of the nonzero eigenvalues: det*(A) = lim_{a->0+} det(A + aI)/a^(d-r).
// Equals det(A) when A is invertible; 1 for the zero matrix (empty product).
inline double pseudo_determinant(const SymMatrix& a, double rank_cutoff = kRankCutoff) {
    const EigenFactorization f = eigen_factorize(a, rank_cutoff);
    double det = 1.0;
    for (int i = 0; i < a.dim(); ++i)
        if (f.significant(i)) det *= f.eigenvalues[i];
    return det;
}

// log det*(A) for PSD A; avoids overflow at large dimension.
inline double log_pseudo_determinant(const SymMatrix& a, double rank_cutoff = kRankCutoff) {
    const EigenFactorization f = eigen_factorize(a, rank_cutoff);
    double acc = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
        if (!f.significant(i)) continue;
        if (f.eigenvalues[i] <= 0.0)
            throw std::invalid_argument("log_pseudo_determinant: negative eigenvalue");
        acc += std::log(f.eigenvalues[i]);
    }
    return acc;
}

// Moore-Penrose inverse of a symmetric matrix: invert the significant
// eigenvalues, zero the rest. Symmetric, and satisfies the four Penrose
// axioms to factorization accuracy.
inline SymMatrix moore_penrose(const SymMatrix& a, double rank_cutoff = kRankCutoff) {
    const EigenFactorization f = eigen_factorize(a, rank_cutoff);
    Vector inv = Vector::Zero(a.dim());
    for (int i = 0; i < a.dim(); ++i)
        if (f.significant(i)) inv[i] = 1.0 / f.eigenvalues[i];
    return SymMatrix(f.eigenvectors * inv.asDiagonal() * f.eigenvectors.transpose());
}

// Unique PSD square root B with B*B = A. Requires A PSD up to the cutoff.
inline SymMatrix sqrt_psd(const SymMatrix& a, double rank_cutoff = kRankCutoff) {
    const EigenFactorization f = eigen_factorize(a, rank_cutoff);
    Vector root = Vector::Zero(a.dim());
    for (int i = 0; i < a.dim(); ++i) {
        if (f.eigenvalues[i] < -f.cutoff)
            throw std::invalid_argument("sqrt_psd: matrix has a negative eigenvalue");
        if (f.significant(i)) root[i] = std::sqrt(f.eigenvalues[i]);
    }
    return SymMatrix(f.eigenvectors * root.asDiagonal() * f.eigenvectors.transpose());
}

inline double quadratic_form(const Vector& u, const SymMatrix& a, const Vector& v) {
    if (u.size() != a.dim() || v.size() != a.dim())
        throw std::invalid_argument("quadratic_form: dimension mismatch");
    return u.dot(a.mat() * v);
}

}  // namespace commdet
