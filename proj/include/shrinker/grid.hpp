#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "shrinker/models.hpp"

namespace shrinker {

enum class GridKind { Line, Sphere, Product };

// A finite-dimensional geometry: nodes, a weak-form stiffness matrix for the
// (negative) Laplacian, and lumped quadrature weights. The generalized pencil
// (stiffness, diag(weights)) discretizes -Laplace; potentials enter as
// diagonal terms against the same weights.
struct Discretization {
    GridKind kind = GridKind::Line;

    // Node chart coordinates: sphere-embedding columns first, then Euclidean.
    Eigen::MatrixXd coords;
    int sphere_cols = 0;
    int euclid_cols = 0;
    double sphere_radius = 1.0;

    Eigen::VectorXd weights;                 // quadrature weights, > 0
    Eigen::SparseMatrix<double> stiffness;   // symmetric weak-form -Laplacian
    std::vector<std::uint8_t> interior;      // 1 = eigenproblem unknown
    bool closed = true;                      // no boundary
    double mesh_h = 0;                       // resolution parameter
    double half_length = 0;                  // line factor half-width L
    int subdiv_level = -1;                   // sphere meshes

    Eigen::MatrixXi faces;                   // sphere meshes: triangles

    std::shared_ptr<const Discretization> factor_a, factor_b; // products

    int n_nodes() const { return static_cast<int>(coords.rows()); }
    ModelPoint point(int node) const;
    std::string digest() const;
};

// Uniform nodes on [-L, L] with Dirichlet truncation; trapezoid weights.
Discretization line_grid(double L, int N);

// Unit S^2 icosphere: subdivided icosahedron, cotangent stiffness, barycentric
// vertex areas.
Discretization sphere_mesh(int subdiv_level);

// Radius-r sphere from a unit mesh. In two dimensions the Dirichlet energy is
// scale invariant, so only the area weights change.
Discretization rescale_sphere(const Discretization& disc, double r);

// Tensor-product grid. Stiffness is the Kronecker sum A (x) W_b + W_a (x) B
// against product weights; node index = i_a * N_b + i_b.
Discretization product_grid(const Discretization& a, const Discretization& b,
                            long max_nodes = 4'000'000);

// Per-node finite-difference gradient of nodal samples. Columns: sphere
// factors contribute 3 embedded components, each line factor one. Row squared
// norms approximate |grad f|^2.
Eigen::MatrixXd node_gradients(const Discretization& disc, const Eigen::VectorXd& samples);

// Per-node Laplacian -(S v) / w; boundary rows are one-sided and inaccurate,
// callers restrict to interior nodes.
Eigen::VectorXd node_laplacian(const Discretization& disc, const Eigen::VectorXd& samples);

// Max over fully interior nodes of the Frobenius norm of the finite-difference
// Hessian over the Euclidean axes. Functions must be constant on sphere fibers
// (their intrinsic Hessian is then zero); anything else is a capability error.
double fd_hessian_norm(const Discretization& disc, const Eigen::VectorXd& samples);

} // namespace shrinker
