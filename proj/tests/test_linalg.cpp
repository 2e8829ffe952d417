#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "apet/linalg.hpp"
#include "apet/rng.hpp"

#include "test_util.hpp"

using apet::Index;
using test_util::make_matrix;
using test_util::random_matrix;

TEST_CASE("pairwise_sq_dist hand values") {
    const auto one_d = make_matrix({{0.0}, {3.0}});
    const auto dist = apet::pairwise_sq_dist(one_d);
    CHECK(dist(0, 0) == 0.0);
    CHECK(dist(0, 1) == 9.0);
    CHECK(dist(1, 0) == 9.0);
    CHECK(dist(1, 1) == 0.0);

    const auto single = apet::pairwise_sq_dist(make_matrix({{5.0, 7.0}}));
    CHECK(single.n() == 1);
    CHECK(single(0, 0) == 0.0);

    const auto axes = apet::pairwise_sq_dist(make_matrix({{1.0, 0.0}, {0.0, 1.0}}));
    CHECK(axes(0, 1) == 2.0);
}

TEST_CASE("pairwise_sq_dist matches the naive double loop") {
    const auto x = random_matrix(50, 16, 11);
    const auto dist = apet::pairwise_sq_dist(x);
    const auto naive = oracle::pairwise_sq_dist(test_util::to_rows(x));
    for (Index i = 0; i < 50; ++i) {
        for (Index j = 0; j < 50; ++j) {
            const double ref = naive[i][j];
            CHECK(dist(i, j) == doctest::Approx(ref).epsilon(1e-10));
            CHECK(dist(i, j) == dist(j, i)); // mirrored, exactly
            CHECK(dist(i, j) >= 0.0);
        }
        CHECK(dist(i, i) == 0.0);
    }
}

TEST_CASE("cosine_to_rows") {
    const auto x = make_matrix({{1.0, 0.0}, {0.0, 2.0}, {0.0, 0.0}});

    SUBCASE("self similarity is 1") {
        const std::vector<double> q = {1.0, 0.0};
        const auto sims = apet::cosine_to_rows(x, q);
        CHECK(sims[0] == doctest::Approx(1.0));
        CHECK(sims[1] == doctest::Approx(0.0)); // orthogonal
        CHECK(sims[2] == 0.0);                  // zero row attracts nothing
    }
    SUBCASE("zero query gives all zeros") {
        const std::vector<double> q = {0.0, 0.0};
        for (double s : apet::cosine_to_rows(x, q)) CHECK(s == 0.0);
    }
    SUBCASE("dimension mismatch throws") {
        const std::vector<double> q = {1.0, 0.0, 0.0};
        CHECK_THROWS_AS((void)apet::cosine_to_rows(x, q), apet::DimensionMismatch);
    }
}

TEST_CASE("lstsq_fit identity and hand-solved cases") {
    SUBCASE("token fits itself exactly") {
        const auto basis = make_matrix({{1.0, 2.0, 3.0}});
        const auto coeff = apet::lstsq_fit(basis, basis, 0.0);
        CHECK(coeff.values(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
        const double residual = (basis.values() - coeff.values * basis.values()).norm();
        CHECK(residual <= 1e-10);
    }
    SUBCASE("orthonormal basis, hand normal equations") {
        const auto basis = make_matrix({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}});
        const auto target = make_matrix({{1.0, 1.0, 1.0}});
        const auto coeff = apet::lstsq_fit(basis, target, 0.0);
        CHECK(coeff.values(0, 0) == doctest::Approx(1.0));
        CHECK(coeff.values(0, 1) == doctest::Approx(1.0));
        const apet::RowMatrix rec = coeff.values * basis.values();
        CHECK(rec(0, 0) == doctest::Approx(1.0));
        CHECK(rec(0, 1) == doctest::Approx(1.0));
        CHECK(rec(0, 2) == doctest::Approx(0.0));
    }
    SUBCASE("scalar ridge shrinks the coefficient") {
        const auto basis = make_matrix({{1.0, 0.0}});
        const auto target = make_matrix({{1.0, 0.0}});
        // G = 1, λ = 0.01·1 → c = 1/1.01
        const auto coeff = apet::lstsq_fit(basis, target, 0.01);
        CHECK(coeff.values(0, 0) == doctest::Approx(1.0 / 1.01).epsilon(1e-12));
    }
}

TEST_CASE("lstsq_fit error paths") {
    const auto zeros = make_matrix({{0.0, 0.0}, {0.0, 0.0}});
    const auto target = make_matrix({{1.0, 1.0}});
    CHECK_THROWS_AS((void)apet::lstsq_fit(zeros, target, 0.0), apet::SingularGram);

    const auto basis = make_matrix({{1.0, 0.0}});
    const auto bad = make_matrix({{1.0, 0.0, 0.0}});
    CHECK_THROWS_AS((void)apet::lstsq_fit(basis, bad, 0.0), apet::DimensionMismatch);
    CHECK_THROWS_AS((void)apet::lstsq_fit(basis, basis, -1.0), apet::UsageError);
}

TEST_CASE("lstsq_fit recovers from a duplicate-row basis via jitter") {
    const auto basis = make_matrix({{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}});
    const auto target = make_matrix({{2.0, 0.0, 0.0}});
    const auto coeff = apet::lstsq_fit(basis, target, 0.0);
    const double residual = (target.values() - coeff.values * basis.values()).norm();
    CHECK(residual <= 1e-4);
}

TEST_CASE("residual is orthogonal to the basis at ridge 0") {
    const auto basis = random_matrix(6, 12, 21);
    const auto targets = random_matrix(30, 12, 22);
    const auto coeff = apet::lstsq_fit(basis, targets, 0.0);
    const apet::RowMatrix residual = targets.values() - coeff.values * basis.values();
    const double basis_norm = basis.values().norm();
    for (Index i = 0; i < targets.n(); ++i) {
        const double bound = 1e-6 * targets.row(i).norm() * basis_norm;
        const double viol =
            (basis.values() * residual.row(static_cast<Eigen::Index>(i)).transpose())
                .cwiseAbs()
                .maxCoeff();
        CHECK(viol <= bound);
    }
}

TEST_CASE("no coefficient perturbation beats the least-squares fit") {
    const auto basis = random_matrix(4, 8, 31);
    const auto targets = random_matrix(3, 8, 32);
    const auto coeff = apet::lstsq_fit(basis, targets, 0.0);

    auto eng = apet::rng::make_engine(33);
    apet::rng::GaussianSampler gauss;
    for (Index t = 0; t < targets.n(); ++t) {
        const Eigen::RowVectorXd c = coeff.values.row(static_cast<Eigen::Index>(t));
        const double best = (targets.row(t) - c * basis.values()).norm();
        for (int trial = 0; trial < 1000; ++trial) {
            Eigen::RowVectorXd delta(basis.n());
            for (Eigen::Index j = 0; j < delta.size(); ++j) delta(j) = gauss.next(eng);
            delta *= apet::rng::uniform01(eng) / std::max(delta.norm(), 1e-300);
            const double perturbed = (targets.row(t) - (c + delta) * basis.values()).norm();
            CHECK(perturbed >= best - 1e-9);
        }
    }
}

TEST_CASE("residual norms are invariant under orthogonal feature maps") {
    const auto basis = random_matrix(5, 10, 41);
    const auto targets = random_matrix(20, 10, 42);
    const Eigen::MatrixXd q = test_util::random_orthogonal(10, 43);

    const auto coeff = apet::lstsq_fit(basis, targets, 0.0);
    const apet::TokenMatrix basis_q(basis.values() * q);
    const apet::TokenMatrix targets_q(targets.values() * q);
    const auto coeff_q = apet::lstsq_fit(basis_q, targets_q, 0.0);

    for (Index i = 0; i < targets.n(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double res = (targets.values().row(r) - coeff.values.row(r) * basis.values()).norm();
        const double res_q =
            (targets_q.values().row(r) - coeff_q.values.row(r) * basis_q.values()).norm();
        CHECK(res_q == doctest::Approx(res).epsilon(1e-8));
    }
}

TEST_CASE("token matrix invariants are enforced") {
    CHECK_THROWS_AS(apet::TokenMatrix(apet::RowMatrix(0, 3)), apet::EmptyMatrix);
    CHECK_THROWS_AS(apet::TokenMatrix(apet::RowMatrix(2, 0)), apet::EmptyMatrix);
    apet::RowMatrix bad(1, 2);
    bad << 1.0, std::nan("");
    CHECK_THROWS_AS(apet::TokenMatrix(std::move(bad)), apet::NonFiniteValue);
}
