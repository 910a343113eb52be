#pragma once

// Perron-Frobenius analysis of matrix semigroups t -> e^{tA}.
//
// A Generator carries the matrix A together with the weights w of the
// discrete measure that defines the pairing <f,g> = sum_i w_i f_i g_i. A
// generator flagged symmetric is self-adjoint for that pairing, i.e. diag(w) A
// is a symmetric matrix.

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semilab/matrix_core.hpp"

namespace semilab {

struct GridDescriptor {
    double x_left = 0.0;
    double x_right = 1.0;
    int n_nodes = 3;

    double h() const { return (x_right - x_left) / (n_nodes - 1); }
    double node(int i) const { return x_left + i * h(); }
    /// Throws InvalidInput unless h > 0 and n_nodes >= 3.
    void validate() const;
};

namespace detail {
struct SpectralCache;
}

class Generator {
public:
    /// Validates the invariants and throws InvalidInput on violation: square
    /// finite matrix, strictly positive weights of matching length, and for
    /// symmetric generators a weighted asymmetry of at most 1e-10 (relative).
    Generator(Matrix matrix, Vector mass_weights, bool symmetric, std::string label,
              std::optional<GridDescriptor> grid = std::nullopt);

    /// Unit weights; the symmetric flag is detected from the matrix.
    static Generator from_matrix(Matrix matrix, std::string label = "matrix");

    const Matrix& matrix() const { return matrix_; }
    const Vector& mass_weights() const { return weights_; }
    bool symmetric() const { return symmetric_; }
    const std::string& label() const { return label_; }
    const std::optional<GridDescriptor>& grid() const { return grid_; }
    Eigen::Index size() const { return matrix_.rows(); }

    /// Eigenpairs of D^{1/2} A D^{-1/2} (D = diag(w)), which is symmetric for
    /// symmetric generators. Computed once and shared between copies.
    const EigenDecomposition& symmetrized_eig() const;

    /// All eigenvalues, ordered by descending real part (ties by descending
    /// imaginary part). Computed once and shared between copies.
    const std::vector<std::complex<double>>& eigenvalues() const;

private:
    Matrix matrix_;
    Vector weights_;
    bool symmetric_;
    std::string label_;
    std::optional<GridDescriptor> grid_;
    std::shared_ptr<detail::SpectralCache> cache_;
};

/// The dominant part of the spectrum.
struct SpectralSummary {
    double lambda0 = 0.0;             // spectral bound
    std::optional<double> lambda1;    // largest real part among the other eigenvalues
    double gap = 0.0;                 // lambda0 - lambda1 (0 when n == 1 or not simple)
    bool simple = false;
};

double spectral_bound(const Generator& g);
SpectralSummary spectral_summary(const Generator& g);

struct MetzlerReport {
    bool metzler = true;
    double worst_off_diagonal = 0.0;  // minimum off-diagonal entry (0 for n == 1)
};

/// e^{tA} >= 0 for all t >= 0 iff every off-diagonal entry of A is >= 0.
MetzlerReport is_metzler(const Generator& g, double tol = 0.0);

/// Strong connectivity of the digraph with an edge i -> j whenever
/// A_ji > threshold. Throws InvalidInput for a non-Metzler generator.
bool is_irreducible(const Generator& g, double threshold = 1e-12);

/// Rank-one limit P f = <phi, f> u of the rescaled semigroup e^{-lambda0 t} S(t).
struct EquilibriumProjection {
    double lambda0 = 0.0;
    Vector u;       // right eigenvector
    Vector phi;     // left eigenvector for the weighted pairing, <phi,u> = 1
    Vector weights; // pairing weights used for phi
    Matrix rank1;   // u (w .* phi)^T

    /// <phi, f> = sum_i w_i phi_i f_i
    double pair(const Vector& f) const;
};

/// Throws NumericalError when the dominant eigenvalue is not simple (the
/// message names the two closest eigenvalues). For irreducible Metzler
/// generators u and phi are checked to be entrywise > 0.
EquilibriumProjection equilibrium_projection(const Generator& g);

/// S(t) and its rescaling R(t) = e^{-lambda0 t} S(t).
class Propagator {
public:
    explicit Propagator(Generator g);

    const Generator& generator() const { return g_; }
    double lambda0() const { return lambda0_; }

    Matrix evolve(double t) const;
    Matrix rescaled(double t) const;

    /// Operator norm matching the generator: weighted for symmetric
    /// generators, plain spectral norm otherwise.
    double norm(const Matrix& a) const;

private:
    Generator g_;
    double lambda0_;
};

struct ProfilePoint {
    double t = 0.0;
    double distance = 0.0;
};

enum class ProfileMethod {
    automatic,      // spectral for symmetric generators above 400 unknowns
    explicit_norm,  // form R(t) - P and take its norm
    spectral        // symmetric only: d(t) = max over non-dominant k of e^{(lambda_k - lambda0) t}
};

/// d(t) = ||e^{-lambda0 t} S(t) - P|| at each requested time, in the norm of
/// Propagator::norm. times must be nonempty and strictly positive. The
/// spectral method is exact in the weighted norm when P is the equilibrium
/// projection of g; it is refused otherwise.
std::vector<ProfilePoint> convergence_profile(const Generator& g, const EquilibriumProjection& p,
                                              const std::vector<double>& times,
                                              ProfileMethod method = ProfileMethod::automatic);

struct RateFit {
    double M = 0.0;
    double delta = 0.0;
    int points_used = 0;
};

/// Least-squares fit of log d = log M - delta t over points with d > 1e-14.
/// Throws InvalidInput with fewer than four usable points.
RateFit fit_exponential_rate(const std::vector<ProfilePoint>& profile);

enum class AsymptoticClass {
    decay_to_zero,
    converges_rank1,
    not_convergent_fixed_functional,
    not_convergent_multi
};

std::string to_string(AsymptoticClass c);

struct ClassifyOptions {
    /// Analyse e^{-spb(A) t} S(t) instead of S(t). Generators with positive
    /// spectral bound are always rescaled since the semigroup is unbounded.
    bool rescale_to_spectral_bound = false;
    double kernel_tol = 1e-7;
};

struct AsymptoticClassification {
    AsymptoticClass kind = AsymptoticClass::decay_to_zero;
    int dual_kernel_dim = 0;  // dim ker(A^T - lambda)
    int kernel_dim = 0;       // dim ker(A - lambda)
    double lambda = 0.0;      // the point analysed: 0, or spb(A) when rescaled
    bool rescaled = false;
    std::vector<std::complex<double>> peripheral_spectrum;  // Re = lambda, Im != 0
};

/// Four-way long-time classification of a positive semigroup. Throws
/// InvalidInput for non-Metzler generators.
AsymptoticClassification classify_asymptotics(const Generator& g, const ClassifyOptions& opt = {});

}  // namespace semilab
