#include "semilab/form_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "semilab/parallel.hpp"

namespace semilab {

namespace {

constexpr double kEllipticityFloor = 1e-10;

Matrix sym_part(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// Generalized eigenvalues of (a, b) for symmetric a and SPD b, ascending.
Vector generalized_eigenvalues(const Matrix& a, const Matrix& b) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(sym_part(a), sym_part(b), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("generalized eigensolve failed (V-norm matrix not positive definite?)");
    }
    return solver.eigenvalues();
}

Matrix restrict_interior(const Matrix& a) {
    const Eigen::Index n = a.rows();
    return a.block(1, 1, n - 2, n - 2);
}

}  // namespace

void FormSpec::validate() const {
    if (!(x_left < x_right) || !std::isfinite(x_left) || !std::isfinite(x_right)) {
        throw InvalidInput("form '" + label + "': need x_left < x_right");
    }
    if (n_cells < 2) throw InvalidInput("form '" + label + "': need at least 2 cells");
    if (boundary_matrix && !boundary_matrix->allFinite()) {
        throw InvalidInput("form '" + label + "': boundary matrix has non-finite entries");
    }
    if (boundary_matrix && boundary == BoundaryKind::dirichlet) {
        throw InvalidInput("form '" + label + "': boundary coupling is meaningless with Dirichlet endpoints");
    }
}

AssembledForm assemble(const FormSpec& spec) {
    spec.validate();
    const int nodes = spec.n_cells + 1;
    GridDescriptor grid{spec.x_left, spec.x_right, nodes};
    const double h = grid.h();

    Matrix grad = Matrix::Zero(nodes, nodes);
    Vector mass = Vector::Zero(nodes);
    for (int e = 0; e < spec.n_cells; ++e) {
        grad(e, e) += 1.0 / h;
        grad(e + 1, e + 1) += 1.0 / h;
        grad(e, e + 1) -= 1.0 / h;
        grad(e + 1, e) -= 1.0 / h;
        mass(e) += 0.5 * h;
        mass(e + 1) += 0.5 * h;
    }

    Matrix k = grad;
    if (spec.potential) {
        for (int i = 0; i < nodes; ++i) {
            const double x = grid.node(i);
            const double m = spec.potential(x);
            if (!std::isfinite(m)) {
                std::ostringstream os;
                os << "form '" << spec.label << "': potential is not finite at node " << i << " (x = " << x << ")";
                throw InvalidInput(os.str());
            }
            k(i, i) += mass(i) * m;
        }
    }
    if (spec.boundary_matrix) {
        const Eigen::Matrix2d& b = *spec.boundary_matrix;
        const int last = nodes - 1;
        k(0, 0) += b(0, 0);
        k(0, last) += b(0, 1);
        k(last, 0) += b(1, 0);
        k(last, last) += b(1, 1);
    }

    AssembledForm f;
    f.grid = grid;
    f.boundary = spec.boundary;
    f.label = spec.label;
    if (spec.boundary == BoundaryKind::dirichlet) {
        f.stiffness = restrict_interior(k);
        f.gradient_stiffness = restrict_interior(grad);
        f.mass = mass.segment(1, nodes - 2);
    } else {
        f.stiffness = std::move(k);
        f.gradient_stiffness = std::move(grad);
        f.mass = std::move(mass);
    }
    f.vnorm = f.gradient_stiffness;
    f.vnorm.diagonal() += f.mass;
    return f;
}

Generator generator_from_form(const AssembledForm& f) {
    const Matrix a = -(f.mass.cwiseInverse().asDiagonal() * f.stiffness);
    const bool sym = relative_asymmetry(f.stiffness) <= 1e-12;
    return Generator(a, f.mass, sym, f.label, f.grid);
}

EllipticityConstants ellipticity_constants(const AssembledForm& f) {
    EllipticityConstants out;
    const Matrix mdiag = f.mass.asDiagonal();
    out.alpha_at_zero = generalized_eigenvalues(f.stiffness, f.vnorm)(0);
    out.positive_coercive = out.alpha_at_zero > kEllipticityFloor;
    if (out.positive_coercive) {
        out.omega = 0.0;
        out.alpha = out.alpha_at_zero;
        return out;
    }
    for (int p = 0; p <= 16; ++p) {
        const double omega = std::ldexp(1.0, p);
        const double alpha = generalized_eigenvalues(f.stiffness + omega * mdiag, f.vnorm)(0);
        if (alpha > kEllipticityFloor) {
            out.omega = omega;
            out.alpha = alpha;
            return out;
        }
    }
    throw NumericalError("form '" + f.label + "' not elliptic at this discretization (no omega <= 2^16)");
}

double coercive_decay_bound(double alpha, const AssembledForm& f) {
    const EllipticityConstants ec = ellipticity_constants(f);
    if (!ec.positive_coercive) {
        throw InvalidInput("coercive_decay_bound: form '" + f.label + "' is not positive-coercive");
    }
    if (!(alpha > 0.0) || alpha > ec.alpha_at_zero * (1.0 + 1e-9)) {
        throw InvalidInput("coercive_decay_bound: alpha must lie in (0, alpha(0)]");
    }
    const Matrix mdiag = f.mass.asDiagonal();
    const double c_h = generalized_eigenvalues(mdiag, f.vnorm).maxCoeff();
    return alpha / c_h;
}

double beurling_deny_quantity(const Matrix& stiffness, const Vector& u) {
    if (u.size() != stiffness.rows()) throw InvalidInput("beurling_deny_quantity: size mismatch");
    const Vector pos = u.cwiseMax(0.0);
    const Vector neg = (-u).cwiseMax(0.0);
    return -pos.dot(stiffness * neg);
}

BeurlingDenyReport beurling_deny_check(const AssembledForm& f, int sample_count, unsigned long long seed) {
    if (sample_count < 1) throw InvalidInput("beurling_deny_check: sample_count must be >= 1");
    BeurlingDenyReport r;
    r.samples = sample_count;
    r.tolerance = 1e-10 * spectral_norm(f.stiffness);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::Index n = f.size();
    bool first = true;
    for (int s = 0; s < sample_count; ++s) {
        Vector u(n);
        for (Eigen::Index i = 0; i < n; ++i) u(i) = normal(rng);
        const double q = beurling_deny_quantity(f.stiffness, u);
        if (first || q < r.min_quantity) {
            r.min_quantity = q;
            r.worst_sample = u;
            first = false;
        }
    }
    r.satisfied = r.min_quantity >= -r.tolerance;
    return r;
}

std::string to_string(SweepTrend t) {
    switch (t) {
        case SweepTrend::single_size: return "single_size";
        case SweepTrend::stable: return "stable";
        case SweepTrend::collapsing: return "collapsing";
        case SweepTrend::indeterminate: return "indeterminate";
    }
    return "unknown";
}

SweepTable sweep_domain(const std::function<Generator(double)>& builder, const std::vector<double>& sizes) {
    if (sizes.empty()) throw InvalidInput("sweep_domain: no sizes given");
    SweepTable table;
    table.rows = parallel_map(sizes.size(), [&](std::size_t i) {
        SweepRow row;
        row.size = sizes[i];
        try {
            const Generator g = builder(sizes[i]);
            const SpectralSummary s = spectral_summary(g);
            row.spectral_bound = s.lambda0;
            row.gap = s.gap;
            if (s.simple && s.gap > 0.0) {
                const EquilibriumProjection p = equilibrium_projection(g);
                std::vector<double> times;
                for (int k = 1; k <= 8; ++k) times.push_back(0.5 * k / s.gap);
                row.delta_fit = fit_exponential_rate(convergence_profile(g, p, times)).delta;
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        return row;
    });
    return tabulate_sweep(std::move(table.rows));
}

SweepTable tabulate_sweep(std::vector<SweepRow> rows) {
    SweepTable table;
    table.rows = std::move(rows);
    if (table.rows.size() < 2) return table;
    const SweepRow& prev = table.rows[table.rows.size() - 2];
    const SweepRow& last = table.rows.back();
    if (!prev.error.empty() || !last.error.empty() || !(last.gap > 0.0)) {
        table.trend = SweepTrend::indeterminate;
        return table;
    }
    table.last_relative_change = std::abs(last.gap - prev.gap) / last.gap;
    bool decreasing = true;
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        if (!table.rows[i].error.empty() || !(table.rows[i].gap < table.rows[i - 1].gap)) decreasing = false;
    }
    if (table.last_relative_change < 0.1) {
        table.trend = SweepTrend::stable;
    } else if (decreasing && prev.gap >= 2.0 * last.gap) {
        table.trend = SweepTrend::collapsing;
    } else {
        table.trend = SweepTrend::indeterminate;
    }
    return table;
}

}  // namespace semilab
