#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "shrinker/grid.hpp"
#include "shrinker/models.hpp"
#include "shrinker/potential.hpp"

namespace shrinker {

// Symmetric operator pencil (matrix, diag(mass)) restricted to the active
// (interior) nodes of a discretization.
struct DiscreteOperator {
    Eigen::SparseMatrix<double> matrix; // exactly symmetric
    Eigen::VectorXd mass;               // strictly positive
    bool weighted_measure = false;      // L2(d mu) instead of plain L2
    std::vector<int> active_nodes;      // active index -> node id
    int node_count = 0;
    std::string name;
    std::string geometry_digest;
    std::string potential_digest;

    int size() const { return static_cast<int>(mass.size()); }
    Eigen::VectorXd restrict_nodes(const Eigen::VectorXd& full) const;
    Eigen::VectorXd extend_nodes(const Eigen::VectorXd& active) const;
};

// Checks that a discretization realizes the given model (dimensions, radius).
void check_compatible(const Discretization& disc, const ModelShrinker& model);

// Closed-form geometry sampled per node.
struct GeometrySamples {
    Eigen::VectorXd f, grad_f_sq, laplacian_f, scalar_curvature, weighted_curvature, density;
};
GeometrySamples sample_geometry(const Discretization& disc, const ModelShrinker& model);

// -Laplace + R/4 + V against plain L2 weights. Refuses non-confining
// potentials on truncated noncompact grids.
DiscreteOperator assemble_schrodinger(const Discretization& disc, const ModelShrinker& model,
                                      const Potential& potential);

// Drifted operator -Laplace_f + V: the weighted-measure assembly (geometric
// mean edge conductances against d mu masses) and its exact plain-L2
// conjugate -Laplace + R/4 + (V - R_f/4); the two pencils are similar by a
// diagonal transform, so their spectra agree to rounding.
struct DriftedAssembly {
    DiscreteOperator weighted;
    DiscreteOperator conjugated;
};
DriftedAssembly assemble_drifted(const Discretization& disc, const ModelShrinker& model,
                                 const Potential& potential);

// Quadrature: sum w_i s_i and sum w_i rho_i s_i.
double integrate(const Discretization& disc, const Eigen::VectorXd& samples);
double integrate_weighted(const Discretization& disc, const ModelShrinker& model,
                          const Eigen::VectorXd& samples);

// log of integral of e^{s} against dv / d mu, evaluated max-shifted.
double log_integral_exp(const Discretization& disc, const Eigen::VectorXd& exponents);
double log_integral_exp_weighted(const Discretization& disc, const ModelShrinker& model,
                                 const Eigen::VectorXd& exponents);

// MatrixMarket coordinate dump (symmetric, lower triangle, 1-based).
void write_matrix_market(const std::string& path, const Eigen::SparseMatrix<double>& m);
// Node coordinates as CSV with header node_id,x1[,x2[,...]].
void write_nodes_csv(const std::string& path, const Discretization& disc);

} // namespace shrinker
