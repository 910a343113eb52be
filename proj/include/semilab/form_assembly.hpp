#pragma once

// P1 finite elements for symmetric bilinear forms on an interval
//
//   a(u,v) = int u'v' + int m u v + (u(l) u(r)) B (v(l) v(r))^T
//
// with lumped (row-sum) mass. The associated generator is A = -M^{-1} K.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semilab/matrix_core.hpp"
#include "semilab/semigroup_engine.hpp"

namespace semilab {

enum class BoundaryKind {
    natural,   // no constraint at the endpoints (Neumann / Robin via B)
    dirichlet  // endpoint unknowns removed
};

struct FormSpec {
    double x_left = 0.0;
    double x_right = 1.0;
    int n_cells = 2;
    std::function<double(double)> potential;        // empty: no potential term
    std::optional<Eigen::Matrix2d> boundary_matrix;  // couples (u(l), u(r))
    BoundaryKind boundary = BoundaryKind::natural;
    std::string label = "form";

    void validate() const;
};

struct AssembledForm {
    Matrix stiffness;           // K
    Matrix gradient_stiffness;  // Dirichlet energy part of K
    Vector mass;                // lumped diagonal M
    Matrix vnorm;               // gradient_stiffness + diag(M)
    GridDescriptor grid;        // full grid, endpoints included
    BoundaryKind boundary = BoundaryKind::natural;
    std::string label;

    Eigen::Index size() const { return mass.size(); }
};

AssembledForm assemble(const FormSpec& spec);

/// A = -M^{-1} K with mass weights M; flagged symmetric when K is.
Generator generator_from_form(const AssembledForm& f);

struct EllipticityConstants {
    double omega = 0.0;
    double alpha = 0.0;
    double alpha_at_zero = 0.0;  // min generalized eigenvalue of K vs vnorm
    bool positive_coercive = false;
};

/// First omega in {0, 1, 2, 4, ..., 2^16} with
///   min_u (a(u,u) + omega |u|_H^2) / |u|_V^2 > 1e-10.
/// Throws NumericalError when none qualifies.
EllipticityConstants ellipticity_constants(const AssembledForm& f);

/// delta = alpha / c_H with c_H = max |u|_H^2 / |u|_V^2. Throws InvalidInput
/// unless the form is positive-coercive and 0 < alpha <= alpha(0).
double coercive_decay_bound(double alpha, const AssembledForm& f);

/// -a(u+, u-) for the lattice parts u+ = max(u,0), u- = max(-u,0).
double beurling_deny_quantity(const Matrix& stiffness, const Vector& u);

struct BeurlingDenyReport {
    int samples = 0;
    double min_quantity = 0.0;
    double tolerance = 0.0;  // 1e-10 * ||K||_2
    bool satisfied = true;   // min_quantity >= -tolerance
    Vector worst_sample;
};

/// Evaluates beurling_deny_quantity on sample_count standard normal vectors.
BeurlingDenyReport beurling_deny_check(const AssembledForm& f, int sample_count, unsigned long long seed = 1);

enum class SweepTrend { single_size, stable, collapsing, indeterminate };
std::string to_string(SweepTrend t);

struct SweepRow {
    double size = 0.0;
    double spectral_bound = 0.0;
    double gap = 0.0;
    std::optional<double> delta_fit;
    std::string error;  // non-empty when the row failed
};

struct SweepTable {
    std::vector<SweepRow> rows;
    SweepTrend trend = SweepTrend::single_size;
    /// |gap_last - gap_prev| / gap_last for the last two rows (0 for one row).
    double last_relative_change = 0.0;
};

/// Rebuilds a generator for every size and records spectral bound, gap and
/// the fitted decay rate of e^{-lambda0 t} S(t). Trend: stable when the last
/// two gaps differ by less than 10%; collapsing when the gaps decrease
/// monotonically and the last step shrinks them at least twofold.
SweepTable sweep_domain(const std::function<Generator(double)>& builder, const std::vector<double>& sizes);

/// Trend and last relative change for rows already computed.
SweepTable tabulate_sweep(std::vector<SweepRow> rows);

}  // namespace semilab
