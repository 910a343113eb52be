#include "semilab/matrix_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace semilab {

namespace {

std::string describe(double x) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << x;
    return os.str();
}

void require_square(const Matrix& a, const char* op) {
    if (a.rows() != a.cols()) {
        std::ostringstream os;
        os << op << ": matrix must be square, got " << a.rows() << "x" << a.cols();
        throw InvalidInput(os.str());
    }
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

void require_symmetric(const Matrix& a, const Tolerances& tol, const char* op) {
    require_valid(a, op);
    require_square(a, op);
    const double asym = relative_asymmetry(a);
    if (asym > tol.symmetry) {
        throw InvalidInput(std::string(op) + ": matrix is not symmetric (max relative asymmetry " +
                           describe(asym) + ")");
    }
}

Eigen::SelfAdjointEigenSolver<Matrix> run_symmetric_solver(const Matrix& a, int options) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver;
    const Matrix s = symmetrized(a);
    const Eigen::Index n = s.rows();
    if (n > 2 && is_tridiagonal(s)) {
        // Skips the Householder reduction; 1D stencils are already tridiagonal.
        const Vector diag = s.diagonal();
        const Vector sub = s.diagonal(-1);
        solver.computeFromTridiagonal(diag, sub, options);
    } else {
        solver.compute(s, options);
    }
    if (solver.info() != Eigen::Success) {
        throw NumericalError("sym_eig: QR iteration did not converge");
    }
    return solver;
}

// Coefficients of the diagonal Pade approximants r_m to exp, m = 3,5,7,9,13,
// and the 1-norm thresholds theta_m below which r_m has backward error at
// most the double unit roundoff.
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};
constexpr std::array<double, 4> kTheta = {1.495585217958292e-2, 2.539398330063230e-1,
                                          9.504178996162932e-1, 2.097847961257068e0};
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t N>
Matrix pade_low_degree(const Matrix& a, const std::array<double, N>& b) {
    const Eigen::Index n = a.rows();
    const Matrix id = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    Matrix even_pow = id;
    Matrix u_part = b[1] * id;
    Matrix v_part = b[0] * id;
    for (std::size_t k = 2; k < N; k += 2) {
        even_pow = even_pow * a2;
        v_part += b[k] * even_pow;
        if (k + 1 < N) u_part += b[k + 1] * even_pow;
    }
    const Matrix u = a * u_part;
    return (v_part - u).partialPivLu().solve(v_part + u);
}

Matrix pade13(const Matrix& a) {
    const auto& b = kPade13;
    const Eigen::Index n = a.rows();
    const Matrix id = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    const Matrix u = a * (u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const Matrix v_inner = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
    const Matrix v = v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

void require_valid(const Matrix& a, const std::string& what) {
    if (a.rows() < 1 || a.cols() < 1) throw InvalidInput(what + ": empty matrix");
    if (!a.allFinite()) throw InvalidInput(what + ": non-finite entry");
}

double relative_asymmetry(const Matrix& a) {
    require_square(a, "relative_asymmetry");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

bool is_tridiagonal(const Matrix& a) {
    const Eigen::Index n = a.rows();
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if ((i > j + 1 || j > i + 1) && a(i, j) != 0.0) return false;
        }
    }
    return true;
}

EigenDecomposition sym_eig(const Matrix& a, const Tolerances& tol) {
    require_symmetric(a, tol, "sym_eig");
    auto solver = run_symmetric_solver(a, Eigen::ComputeEigenvectors);
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Vector sym_eigenvalues(const Matrix& a, const Tolerances& tol) {
    require_symmetric(a, tol, "sym_eigenvalues");
    return run_symmetric_solver(a, Eigen::EigenvaluesOnly).eigenvalues();
}

Matrix expm_from_eig(const EigenDecomposition& eig, double t) {
    // Subnormal factors would slow the product down by orders of magnitude
    // while contributing nothing representable relative to the largest term.
    const double top = t * eig.eigenvalues.maxCoeff();
    const Vector e = (t * eig.eigenvalues.array()).unaryExpr([top](double v) {
        return v - top < -700.0 ? 0.0 : std::exp(v);
    }).matrix();
    return eig.eigenvectors * e.asDiagonal() * eig.eigenvectors.transpose();
}

Matrix expm(const Matrix& a, double t, const Tolerances& tol) {
    require_valid(a, "expm");
    require_square(a, "expm");
    if (!(t >= 0.0)) throw InvalidInput("expm: time must be nonnegative, got " + describe(t));
    if (t == 0.0) return Matrix::Identity(a.rows(), a.cols());
    if (relative_asymmetry(a) <= tol.symmetry) return expm_from_eig(sym_eig(a, tol), t);
    return expm_pade(a, t);
}

Matrix expm_pade(const Matrix& a, double t) {
    require_valid(a, "expm_pade");
    require_square(a, "expm_pade");
    if (!(t >= 0.0)) throw InvalidInput("expm_pade: time must be nonnegative, got " + describe(t));
    const Eigen::Index n = a.rows();
    if (t == 0.0) return Matrix::Identity(n, n);

    const Matrix ta = t * a;
    const double norm1 = ta.cwiseAbs().colwise().sum().maxCoeff();

    if (norm1 <= kTheta[0]) return pade_low_degree(ta, kPade3);
    if (norm1 <= kTheta[1]) return pade_low_degree(ta, kPade5);
    if (norm1 <= kTheta[2]) return pade_low_degree(ta, kPade7);
    if (norm1 <= kTheta[3]) return pade_low_degree(ta, kPade9);

    int squarings = 0;
    if (norm1 > kTheta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
    }
    Matrix r = pade13(ta / std::ldexp(1.0, squarings));
    for (int k = 0; k < squarings; ++k) r = (r * r).eval();
    if (!r.allFinite()) throw NumericalError("expm_pade: overflow (||tA||_1 = " + describe(norm1) + ")");
    return r;
}

double spectral_norm(const Matrix& a) {
    require_valid(a, "spectral_norm");
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    const Matrix s = a / scale;
    if (std::min(s.rows(), s.cols()) <= 32) {
        Eigen::JacobiSVD<Matrix> svd(s);
        return scale * svd.singularValues()(0);
    }
    // Largest eigenvalue of the Gram matrix keeps full relative accuracy for
    // the top singular value.
    const Matrix gram = s.rows() >= s.cols() ? Matrix(s.transpose() * s) : Matrix(s * s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("spectral_norm: eigensolver failed");
    return scale * std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

double weighted_spectral_norm(const Matrix& a, const Vector& weights) {
    if (weights.size() != a.rows() || a.rows() != a.cols()) {
        throw InvalidInput("weighted_spectral_norm: weight length must match a square matrix");
    }
    if ((weights.array() <= 0.0).any()) throw InvalidInput("weighted_spectral_norm: weights must be > 0");
    const Vector root = weights.cwiseSqrt();
    const Matrix scaled = root.asDiagonal() * a * root.cwiseInverse().asDiagonal();
    return spectral_norm(scaled);
}

double condition_estimate(const Matrix& a) {
    require_valid(a, "condition_estimate");
    require_square(a, "condition_estimate");
    Eigen::PartialPivLU<Matrix> lu(a);
    const double rc = lu.rcond();
    if (!(rc > 0.0) || !std::isfinite(rc)) return std::numeric_limits<double>::infinity();
    return 1.0 / rc;
}

Vector solve(const Matrix& a, const Vector& b, const Tolerances& tol) {
    require_valid(a, "solve");
    require_square(a, "solve");
    if (b.size() != a.rows()) throw InvalidInput("solve: right-hand side length mismatch");
    if (!b.allFinite()) throw InvalidInput("solve: non-finite right-hand side");
    Eigen::PartialPivLU<Matrix> lu(a);
    const double rc = lu.rcond();
    const double cond = (rc > 0.0 && std::isfinite(rc)) ? 1.0 / rc : std::numeric_limits<double>::infinity();
    if (!(cond <= tol.condition_limit)) {
        throw NumericalError("solve: matrix is singular or ill-conditioned (condition estimate " +
                             describe(cond) + ")");
    }
    return lu.solve(b);
}

}  // namespace semilab
