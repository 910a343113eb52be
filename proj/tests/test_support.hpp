#pragma once

#include <random>

#include "semilab/matrix_core.hpp"

namespace testing_support {

using semilab::Matrix;
using semilab::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Matrix a(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) a(i, j) = nd(rng);
    }
    return a;
}

inline Matrix random_symmetric(std::mt19937_64& rng, int n, double scale = 1.0) {
    const Matrix a = random_matrix(rng, n, n, scale);
    return 0.5 * (a + a.transpose());
}

// Nonnegative off-diagonal part with the given density, diagonal in [-3, 0].
inline Matrix random_metzler(std::mt19937_64& rng, int n, double density = 0.5) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix a = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            if (i == j) a(i, i) = -3.0 * u(rng);
            else if (u(rng) < density) a(i, j) = u(rng);
        }
    }
    return a;
}

// Metzler with a positive cycle 0 -> 1 -> ... -> n-1 -> 0, hence irreducible.
inline Matrix random_irreducible_metzler(std::mt19937_64& rng, int n, double density = 0.3) {
    std::uniform_real_distribution<double> u(0.1, 1.0);
    Matrix a = random_metzler(rng, n, density);
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        if (i != j) a(j, i) += u(rng);
    }
    return a;
}

inline double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace testing_support
