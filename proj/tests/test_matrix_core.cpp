#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "semilab/errors.hpp"
#include "semilab/matrix_core.hpp"
#include "test_support.hpp"

using namespace semilab;
using testing_support::max_abs;

TEST_CASE("sym_eig on the identity and the 2x2 swap") {
    const EigenDecomposition id = sym_eig(Matrix::Identity(3, 3));
    CHECK(max_abs(id.eigenvalues - Vector::Ones(3)) < 1e-15);
    CHECK(max_abs(id.eigenvectors.transpose() * id.eigenvectors - Matrix::Identity(3, 3)) < 1e-14);

    Matrix swap(2, 2);
    swap << 0, 1, 1, 0;
    const EigenDecomposition e = sym_eig(swap);
    CHECK(e.eigenvalues(0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(e.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-14));
    const double r = 1.0 / std::sqrt(2.0);
    // eigenvectors up to sign
    CHECK(std::abs(std::abs(e.eigenvectors.col(0).dot(Vector{{r, -r}})) - 1.0) < 1e-14);
    CHECK(std::abs(std::abs(e.eigenvectors.col(1).dot(Vector{{r, r}})) - 1.0) < 1e-14);
}

TEST_CASE("finite-difference Dirichlet Laplacian spectrum") {
    for (int n : {10, 57, 300}) {
        const double h = 1.0 / (n + 1);
        Matrix a = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            a(i, i) = -2.0 / (h * h);
            if (i > 0) a(i, i - 1) = 1.0 / (h * h);
            if (i + 1 < n) a(i, i + 1) = 1.0 / (h * h);
        }
        const Vector ev = sym_eigenvalues(a);
        // closed form, ascending order means k = n first
        for (int k = 1; k <= n; ++k) {
            const double s = std::sin(k * std::numbers::pi * h / 2.0);
            const double exact = -4.0 / (h * h) * s * s;
            CHECK(std::abs(ev(n - k) - exact) <= 1e-10 * 4.0 / (h * h));
        }
    }
}

TEST_CASE("eigendecomposition reconstructs 100 random symmetric matrices") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> size(1, 40);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = size(rng);
        const Matrix a = testing_support::random_symmetric(rng, n);
        const EigenDecomposition e = sym_eig(a);
        const Matrix rec = e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.transpose();
        CHECK(max_abs(rec - a) <= 1e-12 * std::max(1.0, max_abs(a)) * n);
        CHECK(max_abs(e.eigenvectors.transpose() * e.eigenvectors - Matrix::Identity(n, n)) <= 1e-12 * n);
        for (int k = 1; k < n; ++k) CHECK(e.eigenvalues(k - 1) <= e.eigenvalues(k));
    }
}

TEST_CASE("sym_eig rejects asymmetric and non-finite input") {
    Matrix a(2, 2);
    a << 1, 2, 3, 4;
    CHECK_THROWS_AS(sym_eig(a), InvalidInput);
    a << 1, NAN, NAN, 1;
    CHECK_THROWS_AS(sym_eig(a), InvalidInput);
    CHECK_THROWS_AS(sym_eig(Matrix(0, 0)), InvalidInput);
}

TEST_CASE("expm basic cases") {
    CHECK(max_abs(expm(Matrix::Zero(4, 4), 5.0) - Matrix::Identity(4, 4)) == 0.0);

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = -1.0;
    d(1, 1) = -2.0;
    const Matrix e = expm(d, 1.0);
    CHECK(e(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(e(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    CHECK(std::abs(e(0, 1)) < 1e-16);

    Matrix a(2, 2);
    a << -1, 1, 1, -1;
    const Matrix p = Matrix::Constant(2, 2, 0.5);
    CHECK(max_abs(expm(a, 10.0) - p) <= std::exp(-20.0));
    for (double t : {0.01, 0.3, 2.0}) {
        // e^{tA} = P + e^{-2t} (I - P)
        const Matrix exact = p + std::exp(-2.0 * t) * (Matrix::Identity(2, 2) - p);
        CHECK(max_abs(expm(a, t) - exact) < 1e-15);
        CHECK(max_abs(expm_pade(a, t) - exact) < 1e-14);
    }

    CHECK(max_abs(expm(a, 0.0) - Matrix::Identity(2, 2)) == 0.0);
    CHECK_THROWS_AS(expm(a, -1.0), InvalidInput);
}

TEST_CASE("expm_pade against closed forms of non-symmetric matrices") {
    Matrix nil(2, 2);
    nil << 0, 1, 0, 0;
    for (double t : {0.5, 3.0, 100.0}) {
        const Matrix e = expm(nil, t);
        CHECK(e(0, 0) == doctest::Approx(1.0));
        CHECK(e(0, 1) == doctest::Approx(t).epsilon(1e-14));
        CHECK(std::abs(e(1, 0)) == 0.0);
    }

    // upper triangular [[a, b], [0, c]]
    const double a = -0.7, b = 2.5, c = -3.1;
    Matrix up(2, 2);
    up << a, b, 0, c;
    for (double t : {0.1, 1.0, 7.0}) {
        const Matrix e = expm_pade(up, t);
        CHECK(e(0, 0) == doctest::Approx(std::exp(a * t)).epsilon(1e-13));
        CHECK(e(1, 1) == doctest::Approx(std::exp(c * t)).epsilon(1e-13));
        CHECK(e(0, 1) == doctest::Approx(b * (std::exp(a * t) - std::exp(c * t)) / (a - c)).epsilon(1e-12));
    }

    // rotation generator: e^{tJ} is the rotation by t
    Matrix j(2, 2);
    j << 0, -1, 1, 0;
    const Matrix r = expm(j, 1.2);
    CHECK(r(0, 0) == doctest::Approx(std::cos(1.2)).epsilon(1e-14));
    CHECK(r(1, 0) == doctest::Approx(std::sin(1.2)).epsilon(1e-14));
}

TEST_CASE("symmetric and Pade paths agree") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 25;
        const Matrix a = testing_support::random_symmetric(rng, n, 2.0);
        for (double t : {0.05, 1.0, 3.0}) {
            const Matrix e1 = expm(a, t);
            const Matrix e2 = expm_pade(a, t);
            CHECK(max_abs(e1 - e2) <= 1e-11 * max_abs(e1));
        }
    }
}

TEST_CASE("semigroup law for random generators") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + trial % 12;
        const Matrix a = testing_support::random_matrix(rng, n, n);
        const double s = 0.3 + 0.05 * trial, t = 0.7;
        const Matrix lhs = expm(a, s + t);
        const Matrix rhs = expm(a, s) * expm(a, t);
        CHECK(max_abs(lhs - rhs) <= 1e-11 * std::max(1.0, max_abs(lhs)));
    }
}

TEST_CASE("derivative of t -> e^{tA} is A e^{tA} with second-order central differences") {
    std::mt19937_64 rng(8);
    const Matrix a = testing_support::random_matrix(rng, 6, 6);
    const double t = 0.8;
    const Matrix exact = a * expm(a, t);
    auto err = [&](double dt) {
        return max_abs((expm(a, t + dt) - expm(a, t - dt)) / (2.0 * dt) - exact);
    };
    const double e1 = err(1e-2), e2 = err(5e-3);
    CHECK(e1 < 1e-2 * max_abs(exact));
    const double order = std::log2(e1 / e2);
    CHECK(order == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("spectral_norm") {
    CHECK(spectral_norm(Matrix::Identity(4, 4)) == doctest::Approx(1.0));
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = -5.0;
    CHECK(spectral_norm(d) == doctest::Approx(5.0));
    Matrix nil = Matrix::Zero(2, 2);
    nil(0, 1) = 2.0;
    CHECK(spectral_norm(nil) == doctest::Approx(2.0));

    // large inputs take the Gram route; compare with a full SVD
    std::mt19937_64 rng(9);
    const Matrix a = testing_support::random_matrix(rng, 80, 80);
    Eigen::JacobiSVD<Matrix> svd(a);
    CHECK(spectral_norm(a) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-10));
}

TEST_CASE("weighted_spectral_norm is the norm of D^{1/2} A D^{-1/2}") {
    std::mt19937_64 rng(10);
    const Matrix a = testing_support::random_matrix(rng, 7, 7);
    Vector w(7);
    for (int i = 0; i < 7; ++i) w(i) = 0.5 + i;
    const Matrix scaled = w.cwiseSqrt().asDiagonal() * a * w.cwiseSqrt().cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Matrix> svd(scaled);
    CHECK(weighted_spectral_norm(a, w) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-12));
    CHECK(weighted_spectral_norm(a, Vector::Ones(7)) == doctest::Approx(spectral_norm(a)).epsilon(1e-12));
}

TEST_CASE("solve") {
    const Vector b{{1.0, -2.0, 3.0}};
    CHECK(max_abs(solve(Matrix::Identity(3, 3), b) - b) == 0.0);

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    CHECK(max_abs(solve(d, Vector{{2.0, 4.0}}) - Vector::Ones(2)) < 1e-15);

    // inverse of [[1, 1/2], [1/2, 1/3]] is [[4, -6], [-6, 12]]
    Matrix hil(2, 2);
    hil << 1.0, 0.5, 0.5, 1.0 / 3.0;
    const Vector x = solve(hil, Vector{{1.0, 0.0}});
    CHECK(x(0) == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(x(1) == doctest::Approx(-6.0).epsilon(1e-13));

    Matrix sing(2, 2);
    sing << 1, 2, 2, 4;
    CHECK_THROWS_AS(solve(sing, Vector::Ones(2)), NumericalError);
    CHECK_THROWS_AS(solve(hil, Vector::Ones(3)), InvalidInput);
}

TEST_CASE("structure predicates") {
    Matrix a(3, 3);
    a << 1, 2, 0, 2, 1, 2, 0, 2, 1;
    CHECK(is_tridiagonal(a));
    CHECK(relative_asymmetry(a) == 0.0);
    a(0, 2) = 1.0;
    CHECK_FALSE(is_tridiagonal(a));
    CHECK(relative_asymmetry(a) == doctest::Approx(0.5));
}
