#include "semilab/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace semilab {

namespace {

void require_probability_vector(const Vector& p, int n, const char* which) {
    std::ostringstream os;
    if (p.size() != n) {
        os << "nonlocal_dirichlet_diffusion: " << which << " jump weights have length " << p.size()
           << ", expected " << n;
        throw InvalidInput(os.str());
    }
    if (!p.allFinite() || (p.array() < 0.0).any()) {
        os << "nonlocal_dirichlet_diffusion: " << which << " jump weights must be finite and >= 0";
        throw InvalidInput(os.str());
    }
    if (std::abs(p.sum() - 1.0) > 1e-12) {
        os << "nonlocal_dirichlet_diffusion: " << which << " jump weights sum to " << p.sum() << ", not 1";
        throw InvalidInput(os.str());
    }
}

}  // namespace

double potential_example_7_2(double x) {
    const double q = 1.0 + x * x;
    return (6.0 * x * x - 2.0) / (q * q);
}

double confined_potential(double x) { return std::abs(x) <= 1.0 ? 0.0 : 1.0; }

Generator schrodinger_1d(const Potential& potential, double half_width, int n, std::string label) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw InvalidInput("schrodinger_1d: L must be > 0");
    if (n < 10) throw InvalidInput("schrodinger_1d: need at least 10 interior nodes");
    const GridDescriptor grid{-half_width, half_width, n + 2};
    const double h = grid.h();
    const double inv_h2 = 1.0 / (h * h);

    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double x = grid.node(i + 1);
        const double m = potential ? potential(x) : 0.0;
        if (!std::isfinite(m)) {
            std::ostringstream os;
            os << label << ": potential is not finite at node " << i + 1 << " (x = " << x << ")";
            throw InvalidInput(os.str());
        }
        a(i, i) = -2.0 * inv_h2 - m;
        if (i > 0) a(i, i - 1) = inv_h2;
        if (i + 1 < n) a(i, i + 1) = inv_h2;
    }
    return Generator(std::move(a), Vector::Constant(n, h), true, std::move(label), grid);
}

Generator absorption_1d(const Potential& m, double half_width, int n) {
    if (!m) throw InvalidInput("absorption_1d: absorption term is missing");
    if (!(half_width > 0.0)) throw InvalidInput("absorption_1d: L must be > 0");
    if (n < 10) throw InvalidInput("absorption_1d: need at least 10 interior nodes");
    const GridDescriptor grid{-half_width, half_width, n + 2};
    bool nonzero = false;
    for (int i = 1; i <= n; ++i) {
        const double v = m(grid.node(i));
        if (v < 0.0) {
            std::ostringstream os;
            os << "absorption_1d: m is negative at x = " << grid.node(i) << "; only absorption (m >= 0) is modelled";
            throw InvalidInput(os.str());
        }
        if (v > 0.0) nonzero = true;
    }
    if (!nonzero) throw InvalidInput("absorption_1d: m vanishes on the whole grid");
    return schrodinger_1d(m, half_width, n, "absorption_1d");
}

Generator nonlocal_laplace_interval(int n_cells) {
    if (n_cells < 4) throw InvalidInput("nonlocal_laplace_interval: need at least 4 cells");
    FormSpec spec;
    spec.x_left = 0.0;
    spec.x_right = 1.0;
    spec.n_cells = n_cells;
    Eigen::Matrix2d b;
    b << 1.0, 1.0, 1.0, 1.0;
    spec.boundary_matrix = b;
    spec.label = "nonlocal_laplace_interval";
    return generator_from_form(assemble(spec));
}

Generator neumann_heat(int n_cells, double length) {
    FormSpec spec;
    spec.x_right = length;
    spec.n_cells = n_cells;
    spec.label = "heat_neumann";
    return generator_from_form(assemble(spec));
}

Generator dirichlet_heat(int n_cells, double length) {
    FormSpec spec;
    spec.x_right = length;
    spec.n_cells = n_cells;
    spec.boundary = BoundaryKind::dirichlet;
    spec.label = "heat_dirichlet";
    return generator_from_form(assemble(spec));
}

Vector uniform_jump_weights(int n) {
    if (n < 1) throw InvalidInput("uniform_jump_weights: n must be >= 1");
    return Vector::Constant(n, 1.0 / n);
}

Vector point_mass_jump_weights(int n, int node) {
    if (node < 0 || node >= n) throw InvalidInput("point_mass_jump_weights: node out of range");
    Vector p = Vector::Zero(n);
    p(node) = 1.0;
    return p;
}

Generator nonlocal_dirichlet_diffusion(int n, const Vector& left_weights, const Vector& right_weights) {
    if (n < 3) throw InvalidInput("nonlocal_dirichlet_diffusion: need at least 3 interior nodes");
    require_probability_vector(left_weights, n, "left");
    require_probability_vector(right_weights, n, "right");
    const double h = 1.0 / (n + 1);
    const double inv_h2 = 1.0 / (h * h);
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = -2.0 * inv_h2;
        if (i > 0) a(i, i - 1) = inv_h2;
        if (i + 1 < n) a(i, i + 1) = inv_h2;
    }
    // u_0 and u_{n+1} enter the first and last stencil rows.
    a.row(0) += inv_h2 * left_weights.transpose();
    a.row(n - 1) += inv_h2 * right_weights.transpose();
    // Restore exact zero row sums (the probability vectors sum to 1 only up to rounding).
    for (int i = 0; i < n; ++i) a(i, i) -= a.row(i).sum();
    return Generator(std::move(a), Vector::Constant(n, h), false, "nonlocal_dirichlet_diffusion",
                     GridDescriptor{0.0, 1.0, n + 2});
}

MatrixPotentialCheck check_matrix_potential(const GridDescriptor& grid, const MatrixPotentialSpec& pot) {
    grid.validate();
    const int nb = pot.block_size;
    if (nb < 1) throw InvalidInput("matrix potential: block size must be >= 1");
    if (!pot.sampler) throw InvalidInput("matrix potential: sampler is missing");
    if (pot.kernel_vector.size() != nb || (pot.kernel_vector.array() <= 0.0).any()) {
        throw InvalidInput("matrix potential: kernel vector must have length N and entries > 0");
    }
    const Vector c = pot.kernel_vector.normalized();
    MatrixPotentialCheck out;
    out.max_eigenvalue = -std::numeric_limits<double>::infinity();
    out.second_smallest_abs = std::numeric_limits<double>::infinity();
    auto fail = [&](int node, const std::string& why) {
        if (out.ok) {
            out.ok = false;
            out.failing_node = node;
            std::ostringstream os;
            os << "node " << node << " (x = " << grid.node(node) << "): " << why;
            out.reason = os.str();
        }
    };
    for (int i = 0; i < grid.n_nodes; ++i) {
        const Matrix v = pot.sampler(grid.node(i));
        if (v.rows() != nb || v.cols() != nb || !v.allFinite()) {
            fail(i, "sample has wrong shape or non-finite entries");
            continue;
        }
        if (relative_asymmetry(v) > 1e-12) {
            fail(i, "V(x) is not symmetric");
            continue;
        }
        const EigenDecomposition eig = sym_eig(v);
        out.max_eigenvalue = std::max(out.max_eigenvalue, eig.eigenvalues(nb - 1));
        if (eig.eigenvalues(nb - 1) > 1e-10) fail(i, "V(x) is not negative semidefinite");

        // order eigenvalues by magnitude
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(nb));
        for (int k = 0; k < nb; ++k) idx[static_cast<std::size_t>(k)] = k;
        std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
            return std::abs(eig.eigenvalues(a)) < std::abs(eig.eigenvalues(b));
        });
        const double smallest = std::abs(eig.eigenvalues(idx[0]));
        if (smallest > 1e-10) fail(i, "V(x) has trivial kernel");
        if (nb > 1) {
            const double second = std::abs(eig.eigenvalues(idx[1]));
            out.second_smallest_abs = std::min(out.second_smallest_abs, second);
            if (second < 1e-6) fail(i, "kernel of V(x) is more than one-dimensional");
        }
        const Vector null_vec = eig.eigenvectors.col(idx[0]);
        const double sine = (null_vec - null_vec.dot(c) * c).norm();
        const double ang = std::asin(std::min(1.0, sine));
        out.kernel_angle = std::max(out.kernel_angle, ang);
        if (ang > 1e-6) fail(i, "kernel of V(x) is not spanned by c");
    }
    if (nb == 1) out.second_smallest_abs = 0.0;
    return out;
}

Generator schrodinger_system(const GridDescriptor& grid, const MatrixPotentialSpec& pot) {
    grid.validate();
    const int nb = pot.block_size;
    const int nodes = grid.n_nodes;
    if (static_cast<long>(nb) * nodes > 5000) throw InvalidInput("schrodinger_system: N * n_nodes exceeds 5000");
    const MatrixPotentialCheck check = check_matrix_potential(grid, pot);
    if (!check.ok) throw InvalidInput("schrodinger_system: matrix potential invalid at " + check.reason);

    FormSpec lap;
    lap.x_left = grid.x_left;
    lap.x_right = grid.x_right;
    lap.n_cells = nodes - 1;
    lap.label = "neumann_laplacian";
    const AssembledForm f = assemble(lap);
    const Matrix scalar = -(f.mass.cwiseInverse().asDiagonal() * f.stiffness);

    const int dim = nb * nodes;
    Matrix a = Matrix::Zero(dim, dim);
    Vector w(dim);
    for (int i = 0; i < nodes; ++i) {
        for (int j = std::max(0, i - 1); j <= std::min(nodes - 1, i + 1); ++j) {
            for (int k = 0; k < nb; ++k) a(i * nb + k, j * nb + k) = scalar(i, j);
        }
        Matrix v = pot.sampler(grid.node(i));
        v = 0.5 * (v + v.transpose());
        a.block(i * nb, i * nb, nb, nb) += v;
        w.segment(i * nb, nb).setConstant(f.mass(i));
    }
    return Generator(std::move(a), std::move(w), true, "schrodinger_system", grid);
}

MatrixPotentialSpec example_9_2_potential() {
    Eigen::Vector3d v1(1.0, 1.0, -2.0);
    Eigen::Vector3d v2(2.0, -1.0, -1.0);
    const Matrix v = -(4.0 * v1 * v1.transpose() + v2 * v2.transpose());
    MatrixPotentialSpec spec;
    spec.block_size = 3;
    spec.sampler = [v](double) { return v; };
    spec.kernel_vector = Vector::Ones(3);
    return spec;
}

}  // namespace semilab
