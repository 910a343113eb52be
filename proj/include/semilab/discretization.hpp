#pragma once

// Generators for the worked examples: 1D Schroedinger operators on truncated
// lines, Laplacians with nonlocal boundary conditions, and Schroedinger systems
// with matrix-valued potentials.

#include <functional>
#include <string>
#include <vector>

#include "semilab/form_assembly.hpp"
#include "semilab/semigroup_engine.hpp"

namespace semilab {

using Potential = std::function<double(double)>;

/// m(x) = (6x^2 - 2) / (1 + x^2)^2. The function w(x) = 1/(1+x^2) satisfies
/// w'' = m w, so w spans the kernel of d^2/dx^2 - m.
double potential_example_7_2(double x);

/// 1 outside [-1, 1], 0 inside.
double confined_potential(double x);

/// A u = u'' - m u on [-L, L] with homogeneous Dirichlet walls, n interior
/// nodes (h = 2L/(n+1)), three-point stencil. Mass weights are h; the
/// generator is symmetric.
Generator schrodinger_1d(const Potential& potential, double half_width, int n, std::string label = "schrodinger_1d");

/// Same stencil, restricted to absorbing potentials: m >= 0 at every node and
/// not identically zero.
Generator absorption_1d(const Potential& m, double half_width, int n);

/// Laplacian on (0,1) with u'(0) = -u'(1) = u(0) + u(1): the form
/// int u'v' + (u(0) u(1)) [[1,1],[1,1]] (v(0) v(1))^T on n cells.
Generator nonlocal_laplace_interval(int n_cells);

/// Neumann Laplacian on (0, length) from the P1 form with lumped mass.
Generator neumann_heat(int n_cells, double length = 1.0);

/// Dirichlet Laplacian on (0, length); n_cells - 1 interior unknowns.
Generator dirichlet_heat(int n_cells, double length = 1.0);

/// Probability vector over interior nodes (length n).
Vector uniform_jump_weights(int n);
Vector point_mass_jump_weights(int n, int node);

/// u'' on the n interior nodes of (0,1), h = 1/(n+1), with the boundary
/// values replaced by u(0) = sum_j left_j u_j and u(1) = sum_j right_j u_j.
/// Rows sum to zero, so constants are fixed. Mass weights are h.
Generator nonlocal_dirichlet_diffusion(int n, const Vector& left_weights, const Vector& right_weights);

struct MatrixPotentialSpec {
    int block_size = 1;
    std::function<Matrix(double)> sampler;  // x -> symmetric N x N matrix
    Vector kernel_vector;                   // c, entrywise > 0
};

struct MatrixPotentialCheck {
    bool ok = true;
    int failing_node = -1;
    std::string reason;
    double max_eigenvalue = 0.0;      // worst over nodes
    double kernel_angle = 0.0;        // worst angle between c and the null eigenvector
    double second_smallest_abs = 0.0; // smallest over nodes
};

/// Checks symmetry, negative semidefiniteness and ker V(x) = span{c} at every
/// grid node.
MatrixPotentialCheck check_matrix_potential(const GridDescriptor& grid, const MatrixPotentialSpec& pot);

/// Block generator (Neumann Laplacian on the grid) x I_N + diag(V(x_i)),
/// node-major ordering (index = i * N + k). Throws InvalidInput naming the
/// first node that violates the potential invariants.
Generator schrodinger_system(const GridDescriptor& grid, const MatrixPotentialSpec& pot);

/// N = 3, c = (1,1,1), V = -(4 v1 v1^T + v2 v2^T), v1 = (1,1,-2), v2 = (2,-1,-1).
MatrixPotentialSpec example_9_2_potential();

}  // namespace semilab
