#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "commdet/mle.hpp"
#include "commdet/model.hpp"
#include "oracles.hpp"

using namespace commdet;

namespace {

Matrix random_psd(int d, int rank, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Matrix b(d, rank);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < rank; ++j) b(i, j) = nd(gen);
    return b * b.transpose();
}

// small asymmetric-mean model: p = 2 rows, k = 2 communities
ModelSpec small_model(int n, std::uint64_t sigma_seed, int rank = -1) {
    const int p = 2, d = p * n;
    auto theta = theta_from_means({{1.0, -0.5}, {0.25, 2.0}});
    return ModelSpec(n, p, 2, theta, SymMatrix(random_psd(d, rank < 0 ? d : rank, sigma_seed)));
}

}  // namespace

TEST_CASE("flatten uses the row-major index map") {
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    const Vector v = flatten(m);
    REQUIRE(v.size() == 6);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) CHECK(v[i * 3 + j] == m(i, j));
    CHECK(unflatten(v, 2, 3) == m);
    CHECK_THROWS_AS(unflatten(v, 3, 3), std::invalid_argument);
}

TEST_CASE("model construction validates shapes and positivity") {
    auto theta = theta_from_means({{1.0, 0.0}});
    // sigma dimension must be p*n
    CHECK_THROWS_AS(ModelSpec(3, 1, 2, theta, SymMatrix::identity(4)), std::invalid_argument);
    // theta shape must match (p, k)
    CHECK_THROWS_AS(ModelSpec(3, 2, 2, theta, SymMatrix::identity(6)), std::invalid_argument);
    // sigma must be PSD
    Matrix neg = -Matrix::Identity(3, 3);
    CHECK_THROWS_AS(ModelSpec(3, 1, 2, theta, SymMatrix(neg)), std::invalid_argument);

    ModelSpec ok(3, 1, 2, theta, SymMatrix::identity(3));
    CHECK(ok.sigma_rank() == 3);
    CHECK(ok.sigma_log_pseudo_det() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("signal matrix is theta evaluated at (i, x(j))") {
    ModelSpec spec = small_model(3, 101);
    CommunityAssignment x({0, 1, 0}, 2);
    const Matrix a = signal_matrix(spec, x);
    const Matrix ref = testutil::naive_signal(spec, x.labels());
    CHECK(a == ref);
    CHECK(a(0, 0) == 1.0);   // row 0, community 0
    CHECK(a(0, 1) == -0.5);  // row 0, community 1
    CHECK(a(1, 1) == 2.0);   // row 1, community 1
    CHECK_THROWS_AS(signal_matrix(spec, CommunityAssignment({0, 1}, 2)), std::invalid_argument);
}

TEST_CASE("noise sampling is seed-deterministic") {
    ModelSpec spec = small_model(3, 7);
    const Matrix w1 = sample_noise(spec, 42);
    const Matrix w2 = sample_noise(spec, 42);
    const Matrix w3 = sample_noise(spec, 43);
    CHECK(w1 == w2);
    CHECK((w1 - w3).cwiseAbs().maxCoeff() > 0.0);
    CommunityAssignment y({0, 1, 1}, 2);
    CHECK(observe(spec, y, 42) == signal_matrix(spec, y) + w1);
}

TEST_CASE("sampled noise reproduces the covariance") {
    ModelSpec spec = small_model(3, 55);
    const Matrix& sigma = spec.sigma().mat();
    const int d = spec.sigma().dim();
    const int draws = 100000;

    Matrix acc = Matrix::Zero(d, d);
    Vector mean = Vector::Zero(d);
    for (int t = 0; t < draws; ++t) {
        const Vector w = flatten(sample_noise(spec, derive_seed(9000, static_cast<std::uint64_t>(t))));
        acc += w * w.transpose();
        mean += w;
    }
    acc /= static_cast<double>(draws);
    mean /= static_cast<double>(draws);

    for (int i = 0; i < d; ++i) {
        CHECK(std::abs(mean[i]) < 5.0 * std::sqrt(sigma(i, i) / draws));
        for (int j = 0; j < d; ++j) {
            const double se =
                std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / draws);
            CHECK(std::abs(acc(i, j) - sigma(i, j)) < 5.0 * se);
        }
    }
}

TEST_CASE("rank-deficient noise stays on the support subspace") {
    ModelSpec spec = small_model(3, 23, /*rank=*/4);
    REQUIRE(spec.sigma_rank() == 4);
    const auto& eig = spec.sigma_eigen();
    for (int t = 0; t < 25; ++t) {
        const Vector w = flatten(sample_noise(spec, static_cast<std::uint64_t>(t)));
        Vector proj = Vector::Zero(w.size());
        for (int i = 0; i < spec.sigma().dim(); ++i)
            if (eig.significant(i)) proj += eig.eigenvectors.col(i) * eig.eigenvectors.col(i).dot(w);
        CHECK((w - proj).norm() < 1e-9 * (1.0 + w.norm()));
    }
}

TEST_CASE("log density agrees with the dense Gaussian formula at full rank") {
    ModelSpec spec = small_model(3, 311);
    CommunityAssignment x({1, 0, 1}, 2);
    const Matrix k = observe(spec, x, 5);
    const Vector r = flatten(k - signal_matrix(spec, x));
    const Matrix& sigma = spec.sigma().mat();
    const double d = static_cast<double>(spec.sigma().dim());
    const double ref = -0.5 * (d * std::log(2.0 * std::numbers::pi) +
                               std::log(sigma.determinant()) +
                               testutil::naive_quadratic(r, sigma.inverse(), r));
    CHECK(log_density(spec, x, k) == Catch::Approx(ref).epsilon(1e-9));
}

TEST_CASE("log density and the search objective rank assignments identically") {
    ModelSpec spec = small_model(4, 99);
    CommunityAssignment y({0, 0, 1, 1}, 2);
    const Matrix k = observe(spec, y, 17);

    double best_ld = -std::numeric_limits<double>::infinity();
    double worst_gap = 0.0;
    std::vector<int> best;
    double shift = std::numeric_limits<double>::quiet_NaN();
    for (const auto& labels : testutil::all_label_vectors(4, 2)) {
        CommunityAssignment x(labels, 2);
        const double ld = log_density(spec, x, k);
        const double f = f_objective(spec, x, k);
        // ld + f/2 is assignment-independent
        if (std::isnan(shift)) shift = ld + 0.5 * f;
        worst_gap = std::max(worst_gap, std::abs(ld + 0.5 * f - shift));
        if (ld > best_ld) {
            best_ld = ld;
            best = labels;
        }
    }
    CHECK(worst_gap < 1e-8);

    auto brute = testutil::brute_force_minimize(spec, k, nullptr);
    CHECK(brute.labels == best);
}

TEST_CASE("observations off the support subspace are rejected") {
    // sigma = diag(1, 0): second flattened coordinate carries no noise
    auto theta = theta_from_means({{1.0, 0.0}});
    Matrix sigma = Matrix::Zero(2, 2);
    sigma(0, 0) = 1.0;
    ModelSpec spec(2, 1, 2, theta, SymMatrix(sigma));
    CommunityAssignment x({0, 1}, 2);

    Matrix on = signal_matrix(spec, x);
    on(0, 0) += 0.7;  // noise along the supported coordinate
    CHECK_NOTHROW(log_density(spec, x, on));

    Matrix off = signal_matrix(spec, x);
    off(0, 1) += 0.7;  // impossible under sigma
    CHECK_THROWS_AS(log_density(spec, x, off), std::domain_error);
}
