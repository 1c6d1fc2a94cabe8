#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "shrinker/errors.hpp"
#include "shrinker/operators.hpp"

namespace shrinker {

struct SpectralResult {
    double lambda0 = 0;
    Eigen::VectorXd eigenvector;          // node-indexed, zero on boundary,
                                          // unit norm in the operator's inner product
    double residual = 0;                  // ||A v - lambda W v|| / ||W v||
    int iterations = 0;
    std::string method;                   // "lobpcg", "lanczos", "dense"
    std::vector<double> rayleigh_history; // non-increasing
    double tolerance_used = 0;            // effective residual threshold
    std::uint64_t seed = 0;
};

struct EigOptions {
    double tol = 1e-10;       // residual / max(1, |lambda|)
    int max_iter = 20000;
    std::uint64_t seed = 42;
    int dense_cap = 3000;
    int lanczos_subspace = 400;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, SpectralResult best)
        : Error(ErrorKind::Convergence, what), best_iterate(std::move(best)) {}
    SpectralResult best_iterate;
};

// Certified smallest eigenpair of the generalized pencil (A, diag(w)) via
// diagonal square-root reduction to standard form: preconditioned locally
// optimal CG, shift-free Lanczos fallback, dense fallback below the cap.
SpectralResult smallest_eigenpair(const DiscreteOperator& op, const EigOptions& opts = {});

// All eigenvalues (ascending) by a dense symmetric solver; the oracle path.
Eigen::VectorXd dense_reference(const DiscreteOperator& op, int cap = 3000);

// Generalized Rayleigh quotient of a node-indexed trial vector; an upper
// bound for lambda0.
double rayleigh(const DiscreteOperator& op, const Eigen::VectorXd& trial);

} // namespace shrinker
