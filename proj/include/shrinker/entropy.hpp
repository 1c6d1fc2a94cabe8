#pragma once

#include <Eigen/Core>
#include <map>
#include <string>

#include "shrinker/grid.hpp"
#include "shrinker/models.hpp"

namespace shrinker {

struct FunctionalReport {
    std::string name;
    double value = 0;
    std::map<std::string, double> terms; // itemized; sums to value
    std::string inputs_digest;
};

// Exact closed-form shrinker entropy: 0 for the Gaussian,
// ln V(M) - (n/2)(1 + ln(2 pi n / R)) for round spheres, and
// ln omega_m - (m/2)(ln(2 pi/(m-1)) + 1) for cylinders. Cross-checks the
// definitional value stored on the model.
double shrinker_entropy(const ModelShrinker& model);

// Entropy functional in potential form:
//   integral of [tau (R + |grad f|^2) + f - n] d mu(f),
// with finite-difference gradients; requires the weighted volume of f to be
// 1 within norm_tol.
FunctionalReport w_functional(const Discretization& disc, const ModelShrinker& model,
                              const Eigen::VectorXd& f_samples, double tau,
                              double norm_tol = 1e-2);

// Entropy functional in density form:
//   integral of [4 tau |grad phi|^2 + tau R phi^2 - phi^2 ln phi^2
//                - n(1 + ln(4 pi tau)/2) phi^2] dv,
// with the Dirichlet term evaluated through tau |grad ln phi^2|^2 phi^2 so the
// potential-form identity holds exactly on the grid. phi >= 0 with unit L2
// norm within norm_tol; 0 ln 0 = 0.
FunctionalReport k_functional(const Discretization& disc, const ModelShrinker& model,
                              const Eigen::VectorXd& phi_samples, double tau,
                              double norm_tol = 1e-2);

struct GibbsResult {
    double value = 0;          // -ln sum mu_i e^{-t H_i}
    Eigen::VectorXd density;   // u^2, the unique minimizer
};

// Discrete Gibbs variational principle, max-shifted for overflow safety.
GibbsResult gibbs_value(const Eigen::VectorXd& mu_weights, const Eigen::VectorXd& H, double t);

// 4 tau int |grad u|^2 d mu - int u^2 ln u^2 d mu for int u^2 d mu = 1.
double log_sobolev_deficit(const Discretization& disc, const ModelShrinker& model,
                           const Eigen::VectorXd& u_samples, double norm_tol = 1e-2);

// Max-minus-min over interior nodes of tau (R + 2 lap f - |grad f|^2) + f - n;
// near zero exactly at critical points of the entropy.
double euler_lagrange_residual(const Discretization& disc, const ModelShrinker& model,
                               const Eigen::VectorXd& f_samples, double tau);

} // namespace shrinker
