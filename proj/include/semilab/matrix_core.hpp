#pragma once

// Dense real linear algebra substrate.
//
// Matrices are Eigen::MatrixXd (column-major storage). All routines are pure
// functions of their inputs and safe to call concurrently.

#include <Eigen/Dense>

#include <string>

#include "semilab/errors.hpp"

namespace semilab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default accuracy thresholds; every routine taking a Tolerances accepts
/// an override.
struct Tolerances {
    double symmetry = 1e-12;          // relative asymmetry accepted by sym_eig
    double condition_limit = 1e14;    // solve() refuses beyond this estimate
};

struct EigenDecomposition {
    Vector eigenvalues;   // ascending
    Matrix eigenvectors;  // orthonormal columns, column k pairs with eigenvalues(k)
};

/// Throws InvalidInput when the matrix is empty or has a non-finite entry.
void require_valid(const Matrix& a, const std::string& what = "matrix");

/// max |a_ij - a_ji| / max(1, max |a_ij|); requires square input.
double relative_asymmetry(const Matrix& a);

/// True iff all entries strictly off the first sub/super-diagonals vanish.
bool is_tridiagonal(const Matrix& a);

EigenDecomposition sym_eig(const Matrix& a, const Tolerances& tol = {});

/// Eigenvalues only (ascending), same preconditions as sym_eig.
Vector sym_eigenvalues(const Matrix& a, const Tolerances& tol = {});

/// e^{tA}. Symmetric input goes through the eigendecomposition, everything
/// else through expm_pade.
Matrix expm(const Matrix& a, double t, const Tolerances& tol = {});

/// Scaling and squaring with a diagonal Pade approximant of degree 3..13
/// chosen from the 1-norm of tA; backward error at unit-roundoff level.
Matrix expm_pade(const Matrix& a, double t);

/// Q f(Lambda) Q^T evaluated for the exponential, given a decomposition.
Matrix expm_from_eig(const EigenDecomposition& eig, double t);

/// Largest singular value.
double spectral_norm(const Matrix& a);

/// ||D^{1/2} A D^{-1/2}||_2, the operator norm induced by the inner product
/// <f,g> = sum_i w_i f_i g_i.
double weighted_spectral_norm(const Matrix& a, const Vector& weights);

/// Solves Ax = b by LU with partial pivoting. Throws NumericalError carrying
/// the condition estimate when it exceeds tol.condition_limit.
Vector solve(const Matrix& a, const Vector& b, const Tolerances& tol = {});

/// 1-norm condition number estimate from the LU factors, as used by solve().
double condition_estimate(const Matrix& a);

}  // namespace semilab
