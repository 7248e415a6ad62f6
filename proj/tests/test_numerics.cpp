#include <cmath>

#include "doctest.h"
#include "itd/numerics.hpp"
#include "oracle_helpers.hpp"

using namespace itd;

TEST_CASE("solve_linear identity and diagonal cases") {
    Matrix eye = Matrix::identity(3);
    Vector b{1, 2, 3};
    Vector x = solve_linear(eye, b);
    CHECK(x == b);

    Matrix d(2, 2);
    d(0, 0) = 2;
    d(1, 1) = 4;
    Vector y = solve_linear(d, {2, 8});
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(y[1] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("solve_linear recovers a forward-constructed solution") {
    RngStream rng(1, 0);
    Matrix a(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) a(i, j) = (i == j ? 5.0 : 0.0) + 2.0 * rng.next_double() - 1.0;
    Vector x0{0.3, -1.2, 2.5, 0.0, 4.0};
    Vector b = a * x0;
    Vector x = solve_linear(a, b);
    CHECK(norm_inf(x - x0) < 1e-9);
}

TEST_CASE("solve_linear residual bound over 1000 random well-conditioned systems") {
    RngStream rng(2, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + rng.next_below(20);
        Matrix a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                a(i, j) = (i == j ? n + 1.0 : 0.0) + 2.0 * rng.next_double() - 1.0;
        Vector x0(n);
        for (double& v : x0) v = 4.0 * rng.next_double() - 2.0;
        const Vector b = a * x0;
        const Vector x = solve_linear(a, b);
        CHECK(norm_inf(a * x - b) <= 1e-9 * (1.0 + norm_inf(b)));
    }
}

TEST_CASE("solve_linear rejects singular input") {
    Matrix a(2, 2, 1.0);  // rank 1
    CHECK_THROWS_AS(solve_linear(a, {1, 2}), SingularMatrixError);
}

TEST_CASE("inverse matches the Gauss-Jordan reference") {
    RngStream rng(3, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + rng.next_below(10);
        Matrix a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                a(i, j) = (i == j ? n + 2.0 : 0.0) + 2.0 * rng.next_double() - 1.0;
        const Matrix inv = inverse(a);
        const Matrix ref = testoracle::gauss_jordan_inverse(a);
        CHECK(norm_inf(inv - ref) < 1e-10);
    }
}

TEST_CASE("least_squares identity and mean cases") {
    Matrix eye = Matrix::identity(4);
    Vector t{4, 3, 2, 1};
    CHECK(norm_inf(least_squares(eye, t) - t) < 1e-12);

    Matrix ones(3, 1, 1.0);
    Vector w = least_squares(ones, {0, 1, 2});
    CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("least_squares recovers a consistent system and is residual-orthogonal") {
    RngStream rng(4, 0);
    Matrix phi(20, 5);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 5; ++j) phi(i, j) = 2.0 * rng.next_double() - 1.0;
    Vector w0{1.5, -0.5, 2.0, 0.25, -3.0};
    CHECK(norm_inf(least_squares(phi, phi * w0) - w0) < 1e-8);

    for (int trial = 0; trial < 100; ++trial) {
        const int m = 6 + rng.next_below(20);
        const int d = 1 + rng.next_below(5);
        Matrix a(m, d);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < d; ++j) a(i, j) = 2.0 * rng.next_double() - 1.0;
        Vector t(m);
        for (double& v : t) v = 4.0 * rng.next_double() - 2.0;
        const Vector w = least_squares(a, t);
        const Vector grad = transpose(a) * (a * w - t);
        CHECK(norm_inf(grad) <= 1e-8 * m);
    }
}

TEST_CASE("least_squares rejects rank-deficient input") {
    Matrix phi(4, 2);
    for (int i = 0; i < 4; ++i) {
        phi(i, 0) = i + 1.0;
        phi(i, 1) = 2.0 * (i + 1.0);  // duplicate direction
    }
    CHECK_THROWS_AS(least_squares(phi, {1, 2, 3, 4}), RankDeficientError);
}

TEST_CASE("least_squares_minnorm matches least_squares on full-rank input") {
    RngStream rng(5, 0);
    Matrix phi(10, 3);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 3; ++j) phi(i, j) = 2.0 * rng.next_double() - 1.0;
    Vector t(10);
    for (double& v : t) v = rng.next_double();
    CHECK(norm_inf(least_squares_minnorm(phi, t) - least_squares(phi, t)) < 1e-9);
}

TEST_CASE("stationary_distribution examples") {
    SUBCASE("reducible identity chain fails") {
        CHECK_THROWS_AS(stationary_distribution(Matrix::identity(2)), NoConvergenceError);
    }
    SUBCASE("periodic two-cycle solves via the balance equations") {
        Matrix p(2, 2);
        p(0, 1) = 1.0;
        p(1, 0) = 1.0;
        Vector mu = stationary_distribution(p);
        CHECK(mu[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(mu[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("2-state chain solved by hand") {
        Matrix p(2, 2);
        p(0, 0) = 0.9;
        p(0, 1) = 0.1;
        p(1, 0) = 0.5;
        p(1, 1) = 0.5;
        Vector mu = stationary_distribution(p);
        CHECK(mu[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
        CHECK(mu[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    }
}

TEST_CASE("stationary_distribution postconditions on random chains") {
    RngStream rng(6, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + rng.next_below(30);
        Matrix p(n, n);
        for (int i = 0; i < n; ++i) {
            double sum = 0.0;
            for (int j = 0; j < n; ++j) {
                p(i, j) = 0.05 + rng.next_double();
                sum += p(i, j);
            }
            for (int j = 0; j < n; ++j) p(i, j) /= sum;
        }
        const Vector mu = stationary_distribution(p);
        double total = 0.0, residual = 0.0;
        for (int j = 0; j < n; ++j) {
            CHECK(mu[j] >= 0.0);
            total += mu[j];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        for (int j = 0; j < n; ++j) {
            double col = 0.0;
            for (int i = 0; i < n; ++i) col += mu[i] * p(i, j);
            residual += std::abs(col - mu[j]);
        }
        CHECK(residual <= 1e-10);
    }
}

TEST_CASE("min_eigenvalue_sym on diagonal, identity, and constructed spectra") {
    Vector d{1, 2, 3};
    CHECK(min_eigenvalue_sym(diag(d)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(min_eigenvalue_sym(Matrix::identity(6)) == doctest::Approx(1.0).epsilon(1e-12));

    RngStream rng(7, 0);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + rng.next_below(12);
        Vector lam(n);
        for (double& v : lam) v = 0.1 + 5.0 * rng.next_double();
        const double expected = *std::min_element(lam.begin(), lam.end());
        const Matrix q = testoracle::random_orthogonal(rng, n);
        const Matrix s = q * diag(lam) * transpose(q);
        CHECK(min_eigenvalue_sym(s) == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("min_eigenvalue_sym rejects asymmetry") {
    Matrix a(2, 2);
    a(0, 1) = 1.0;
    CHECK_THROWS_AS(min_eigenvalue_sym(a), NotSymmetricError);
}

TEST_CASE("min_abs_eigenvalue on symmetric and general matrices") {
    CHECK(min_abs_eigenvalue(-1.0 * Matrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(min_abs_eigenvalue(diag({-0.5, -2.0})) == doctest::Approx(0.5).epsilon(1e-10));

    SUBCASE("rotation block has complex pair of modulus 1") {
        const double th = 0.7;
        Matrix r(2, 2);
        r(0, 0) = std::cos(th);
        r(0, 1) = -std::sin(th);
        r(1, 0) = std::sin(th);
        r(1, 1) = std::cos(th);
        CHECK(min_abs_eigenvalue(r) == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("similarity transform of a known spectrum") {
        RngStream rng(8, 0);
        Vector lam{-3.0, 2.0, 0.5, -0.25};
        Matrix s(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) s(i, j) = (i == j ? 3.0 : 0.0) + rng.next_double();
        const Matrix m = s * diag(lam) * testoracle::gauss_jordan_inverse(s);
        CHECK(min_abs_eigenvalue(m) == doctest::Approx(0.25).epsilon(1e-6));
    }
    SUBCASE("block with complex pair of modulus below the real eigenvalues") {
        Matrix m(3, 3);
        m(0, 0) = 0.3;
        m(0, 1) = -0.4;
        m(1, 0) = 0.4;
        m(1, 1) = 0.3;  // pair 0.3 +- 0.4i, modulus 0.5
        m(2, 2) = 2.0;
        m(0, 2) = 0.7;  // coupling above the diagonal leaves the spectrum intact
        CHECK(min_abs_eigenvalue(m) == doctest::Approx(0.5).epsilon(1e-8));
    }
}

TEST_CASE("rng streams replay identically and differ across stream ids") {
    RngStream a(99, 5), b(99, 5), c(99, 6);
    bool identical = true;
    for (int i = 0; i < 1000000; ++i)
        if (a.next_u64() != b.next_u64()) identical = false;
    CHECK(identical);

    RngStream a2(99, 5);
    bool differs = false;
    for (int i = 0; i < 100; ++i)
        if (a2.next_u64() != c.next_u64()) differs = true;
    CHECK(differs);
}

TEST_CASE("rng doubles live in [0,1) and next_below stays in range") {
    RngStream rng(11, 0);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 10000; ++i) {
        const int v = rng.next_below(7);
        CHECK(v >= 0);
        CHECK(v < 7);
    }
}
