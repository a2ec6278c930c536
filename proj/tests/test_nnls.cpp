#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "core/nnls.hpp"
#include "helpers.hpp"

using namespace epf;
using epf_test::thrown_code;

TEST_CASE("nnls: reduces to ordinary least squares when the optimum is interior")
{
    Eigen::MatrixXd A(3, 2);
    A << 1, 0, 0, 1, 1, 1;
    Eigen::VectorXd b(3);
    b << 1.0, 2.0, 2.8;

    const NnlsResult r = nnls(A, b);
    const Eigen::VectorXd ls = (A.transpose() * A).ldlt().solve(A.transpose() * b);
    REQUIRE(ls.minCoeff() > 0.0);
    CHECK((r.x - ls).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK(r.residual_norm == doctest::Approx((A * ls - b).norm()).epsilon(1e-12));
    CHECK(r.kkt_residual <= 1e-12);
}

TEST_CASE("nnls: clamps coordinates pulled negative")
{
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd b(2);
    b << -1.0, 2.0;
    const NnlsResult r = nnls(A, b);
    CHECK(r.x(0) == doctest::Approx(0.0));
    CHECK(r.x(1) == doctest::Approx(2.0));
    CHECK(r.residual_norm == doctest::Approx(1.0));

    Eigen::MatrixXd one(2, 1);
    one << 1.0, 1.0;
    Eigen::VectorXd neg(2);
    neg << -3.0, -1.0;
    const NnlsResult r1 = nnls(one, neg);
    CHECK(r1.x(0) == doctest::Approx(0.0));
    CHECK(r1.residual_norm == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("nnls: matches brute-force support enumeration on small problems")
{
    std::mt19937_64 rng(418);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial)
    {
        Eigen::MatrixXd A(5, 3);
        Eigen::VectorXd b(5);
        for (int i = 0; i < 5; ++i)
        {
            b(i) = gauss(rng);
            for (int j = 0; j < 3; ++j)
                A(i, j) = gauss(rng);
        }

        double best = b.norm(); // empty support
        for (int mask = 1; mask < 8; ++mask)
        {
            std::vector<int> cols;
            for (int j = 0; j < 3; ++j)
                if (mask & (1 << j))
                    cols.push_back(j);
            Eigen::MatrixXd As(5, static_cast<Eigen::Index>(cols.size()));
            for (std::size_t c = 0; c < cols.size(); ++c)
                As.col(static_cast<Eigen::Index>(c)) = A.col(cols[c]);
            const Eigen::VectorXd xs = (As.transpose() * As).ldlt().solve(As.transpose() * b);
            if (xs.minCoeff() < -1e-12)
                continue; // support infeasible for the constrained problem
            best = std::min(best, (As * xs - b).norm());
        }

        const NnlsResult r = nnls(A, b);
        CHECK(r.x.minCoeff() >= 0.0);
        CHECK(r.residual_norm <= best + 1e-9);
    }
}

TEST_CASE("nnls: KKT residual certifies optimality")
{
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd A(10, 6);
    Eigen::VectorXd b(10);
    for (int i = 0; i < 10; ++i)
    {
        b(i) = gauss(rng);
        for (int j = 0; j < 6; ++j)
            A(i, j) = gauss(rng);
    }
    const NnlsResult r = nnls(A, b);
    CHECK(r.kkt_residual <= 1e-10);

    // No feasible direction improves the residual.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int probe = 0; probe < 200; ++probe)
    {
        Eigen::VectorXd d(6);
        for (int j = 0; j < 6; ++j)
        {
            d(j) = gauss(rng);
            if (r.x(j) <= 1e-14)
                d(j) = unit(rng); // keep zero coordinates feasible
        }
        const double eps = 1e-6;
        CHECK((A * (r.x + eps * d.normalized()) - b).norm() >= r.residual_norm - 1e-9);
    }
}

TEST_CASE("ldp: nearest point under inequality constraints")
{
    SUBCASE("box away from origin")
    {
        const Eigen::MatrixXd G = Eigen::MatrixXd::Identity(2, 2);
        const Eigen::VectorXd h = Eigen::VectorXd::Ones(2);
        const Eigen::VectorXd x = ldp(G, h);
        CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("half-plane")
    {
        Eigen::MatrixXd G(1, 2);
        G << 1.0, 1.0;
        Eigen::VectorXd h(1);
        h << 2.0;
        const Eigen::VectorXd x = ldp(G, h);
        CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("already feasible origin")
    {
        Eigen::MatrixXd G(1, 2);
        G << 1.0, 0.0;
        Eigen::VectorXd h(1);
        h << -1.0;
        CHECK(ldp(G, h).norm() <= 1e-12);
    }
    SUBCASE("infeasible constraints")
    {
        Eigen::MatrixXd G(2, 1);
        G << 1.0, -1.0;
        Eigen::VectorXd h(2);
        h << 1.0, 1.0;
        CHECK(thrown_code([&] { ldp(G, h); }) == ErrorCode::Numeric);
    }
}

TEST_CASE("lsi: constrained least squares against analytic solutions")
{
    SUBCASE("inactive constraints reduce to plain least squares")
    {
        Eigen::MatrixXd A(3, 2);
        A << 2, 0, 0, 1, 1, 1;
        Eigen::VectorXd b(3);
        b << 4.0, 3.0, 5.0;
        Eigen::MatrixXd G = Eigen::MatrixXd::Identity(2, 2);
        Eigen::VectorXd h = Eigen::VectorXd::Zero(2);
        const Eigen::VectorXd x = lsi(A, b, G, h);
        const Eigen::VectorXd ls = (A.transpose() * A).ldlt().solve(A.transpose() * b);
        REQUIRE(ls.minCoeff() > 0.0);
        CHECK((x - ls).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
    SUBCASE("with G = I, h = 0 lsi solves the nnls problem")
    {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::MatrixXd A(8, 4);
        Eigen::VectorXd b(8);
        for (int i = 0; i < 8; ++i)
        {
            b(i) = gauss(rng);
            for (int j = 0; j < 4; ++j)
                A(i, j) = gauss(rng);
        }
        const Eigen::VectorXd x = lsi(A, b, Eigen::MatrixXd::Identity(4, 4), Eigen::VectorXd::Zero(4));
        const NnlsResult r = nnls(A, b);
        CHECK((x - r.x).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
    SUBCASE("active bound lands on the constraint")
    {
        const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
        Eigen::VectorXd b(2);
        b << 2.0, -1.0;
        const Eigen::VectorXd x = lsi(A, b, Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2));
        CHECK(x(0) == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(x(1) == doctest::Approx(0.0));
    }
    SUBCASE("rank-deficient A is rejected")
    {
        Eigen::MatrixXd A(3, 2);
        A << 1, 1, 2, 2, 3, 3;
        Eigen::VectorXd b(3);
        b << 1.0, 2.0, 3.0;
        CHECK(thrown_code([&] {
                  lsi(A, b, Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2));
              }) == ErrorCode::Numeric);
    }
}
