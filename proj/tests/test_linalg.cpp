#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "commdet/linalg.hpp"
#include "oracles.hpp"

using namespace commdet;

namespace {

Matrix random_symmetric(int d, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = nd(gen);
    return m;
}

Matrix random_psd(int d, int rank, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Matrix b(d, rank);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < rank; ++j) b(i, j) = nd(gen);
    return b * b.transpose();
}

}  // namespace

TEST_CASE("symmetric matrix construction validates shape and symmetry") {
    CHECK_THROWS_AS(SymMatrix(Matrix::Zero(2, 3)), std::invalid_argument);
    Matrix bad = Matrix::Zero(3, 3);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(SymMatrix(bad), std::invalid_argument);

    // tiny asymmetry below the tolerance is symmetrized exactly
    Matrix near = random_symmetric(4, 2);
    near(1, 2) += 1e-14;
    SymMatrix s(near);
    CHECK(s.mat() == s.mat().transpose());
    CHECK(SymMatrix::identity(3)(1, 1) == 1.0);
    CHECK(SymMatrix::zero(2).dim() == 2);
}

TEST_CASE("eigenfactorization reconstructs and orders") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        SymMatrix a(random_symmetric(17, seed));
        auto f = eigen_factorize(a);
        CHECK((f.reconstruct() - a.mat()).cwiseAbs().maxCoeff() < 1e-10);
        for (int i = 0; i + 1 < a.dim(); ++i) CHECK(f.eigenvalues[i] >= f.eigenvalues[i + 1]);
        // orthonormal eigenvectors
        Matrix vtv = f.eigenvectors.transpose() * f.eigenvectors;
        CHECK((vtv - Matrix::Identity(17, 17)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(f.rank == 17);
    }
}

TEST_CASE("rank detection on a constructed low-rank matrix") {
    SymMatrix a(random_psd(12, 5, 21));
    auto f = eigen_factorize(a);
    CHECK(f.rank == 5);
    for (int i = 0; i < 5; ++i) CHECK(f.eigenvalues[i] > f.cutoff);
    for (int i = 5; i < 12; ++i) CHECK(std::abs(f.eigenvalues[i]) <= f.cutoff);
}

TEST_CASE("pseudo-inverse satisfies the Penrose axioms") {
    // symmetric indefinite, full rank
    for (int d : {3, 10, 40}) {
        SymMatrix a(random_symmetric(d, static_cast<std::uint64_t>(d)));
        const Matrix p = moore_penrose(a).mat();
        const Matrix& m = a.mat();
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        CHECK((m * p * m - m).cwiseAbs().maxCoeff() < 1e-9 * scale);
        CHECK((p * m * p - p).cwiseAbs().maxCoeff() < 1e-9 * scale);
        CHECK((m * p - (m * p).transpose()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((p * m - (p * m).transpose()).cwiseAbs().maxCoeff() < 1e-9);
    }
    // rank-deficient PSD
    SymMatrix a(random_psd(15, 6, 5));
    const Matrix p = moore_penrose(a).mat();
    const Matrix& m = a.mat();
    CHECK((m * p * m - m).cwiseAbs().maxCoeff() < 1e-9 * m.cwiseAbs().maxCoeff());
    CHECK((p * m * p - p).cwiseAbs().maxCoeff() < 1e-9 * p.cwiseAbs().maxCoeff());
    CHECK((m * p - (m * p).transpose()).cwiseAbs().maxCoeff() < 1e-10);
    // involution: pinv(pinv(A)) recovers A
    CHECK((moore_penrose(moore_penrose(a)).mat() - m).cwiseAbs().maxCoeff() <
          1e-8 * m.cwiseAbs().maxCoeff());
}

TEST_CASE("pseudo-inverse spectrum pairs with the original") {
    // least nonzero eigenvalue of the pseudo-inverse times the largest
    // eigenvalue of the matrix equals 1
    SymMatrix a(random_psd(10, 7, 33));
    auto fa = eigen_factorize(a);
    auto fp = eigen_factorize(moore_penrose(a));
    double mu0 = 0.0;
    for (int i = 0; i < 10; ++i)
        if (fp.significant(i)) mu0 = fp.eigenvalues[i];  // last significant = smallest nonzero
    CHECK(mu0 * fa.eigenvalues[0] == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pseudo-determinant multiplies the significant spectrum") {
    // full rank: agrees with the ordinary determinant
    SymMatrix a(random_symmetric(6, 77));
    CHECK(pseudo_determinant(a) == Catch::Approx(a.mat().determinant()).epsilon(1e-8));

    // known singular case: diag(3, 2, 0)
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = 2.0;
    SymMatrix sd(d);
    CHECK(pseudo_determinant(sd) == Catch::Approx(6.0));
    CHECK(log_pseudo_determinant(sd) == Catch::Approx(std::log(6.0)));
    CHECK(pseudo_determinant(SymMatrix::zero(4)) == 1.0);  // empty product

    // negative significant eigenvalue rejected by the log variant
    Matrix neg = Matrix::Zero(2, 2);
    neg(0, 0) = 1.0;
    neg(1, 1) = -2.0;
    CHECK_THROWS_AS(log_pseudo_determinant(SymMatrix(neg)), std::invalid_argument);

    // consistency between the two on PSD input
    SymMatrix psd(random_psd(9, 9, 8));
    CHECK(std::log(pseudo_determinant(psd)) ==
          Catch::Approx(log_pseudo_determinant(psd)).epsilon(1e-9));
}

TEST_CASE("psd square root squares back") {
    SymMatrix a(random_psd(14, 9, 3));
    const Matrix r = sqrt_psd(a).mat();
    CHECK((r * r - a.mat()).cwiseAbs().maxCoeff() < 1e-9 * a.mat().cwiseAbs().maxCoeff());
    CHECK((r - r.transpose()).cwiseAbs().maxCoeff() == 0.0);

    Matrix neg = -Matrix::Identity(3, 3);
    CHECK_THROWS_AS(sqrt_psd(SymMatrix(neg)), std::invalid_argument);
}

TEST_CASE("quadratic form matches explicit summation") {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> nd;
    SymMatrix a(random_symmetric(8, 90));
    Vector u(8), v(8);
    for (int i = 0; i < 8; ++i) {
        u[i] = nd(gen);
        v[i] = nd(gen);
    }
    CHECK(quadratic_form(u, a, v) ==
          Catch::Approx(testutil::naive_quadratic(u, a.mat(), v)).epsilon(1e-12));
    Vector w(5);
    CHECK_THROWS_AS(quadratic_form(w, a, v), std::invalid_argument);
}

TEST_CASE("frozen two-by-two spectra") {
    Matrix m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    auto f = eigen_factorize(SymMatrix(m));
    CHECK(f.eigenvalues[0] == Catch::Approx(3.0).epsilon(1e-12));
    CHECK(f.eigenvalues[1] == Catch::Approx(1.0).epsilon(1e-12));

    Matrix ones(2, 2);
    ones << 1.0, 1.0, 1.0, 1.0;
    SymMatrix so(ones);
    CHECK(pseudo_determinant(so) == Catch::Approx(2.0));
    const Matrix p = moore_penrose(so).mat();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(p(i, j) == Catch::Approx(0.25).epsilon(1e-12));
}
