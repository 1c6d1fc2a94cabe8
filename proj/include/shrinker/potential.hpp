#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "shrinker/expr.hpp"
#include "shrinker/grid.hpp"
#include "shrinker/models.hpp"

namespace shrinker {

enum class PotentialFamily { Constant, Affine, Harmonic, Polynomial, Tabulated, Expression };

// Declarative potential V over a model chart. Analytic families act on the
// Euclidean coordinates (sphere directions see only constants); Tabulated
// potentials are tied to one exact run grid.
class Potential {
public:
    static Potential constant(double c);
    static Potential affine(Eigen::VectorXd slope, double c);
    static Potential harmonic(Eigen::VectorXd center, double stiffness, double offset = 0.0);
    static Potential polynomial(std::vector<double> coeffs); // one Euclidean coordinate
    static Potential tabulated(Eigen::VectorXd node_values, bool confining);
    // Parses and classifies a coordinate expression; single-variable
    // polynomials land in the structured families, everything else stays an
    // expression with a sampled confinement heuristic.
    static Potential expression(const std::string& source);

    PotentialFamily family() const { return family_; }
    bool confining() const { return confining_; }
    double lower_bound() const { return lower_bound_; }
    // Polynomial growth degree along Euclidean rays: 0 constant, 1 affine,
    // 2 quadratic, ... ; -1 when unknown (expressions, tabulated data).
    int growth_degree() const { return growth_degree_; }

    double value(const ModelPoint& p) const; // Tabulated: lookup error
    Eigen::VectorXd sample(const Discretization& disc) const;

    Potential shifted(double c) const; // V + c
    // (1 - t) V + t W for compatible families (used by parameter scans).
    static Potential blend(const Potential& a, const Potential& b, double t);

    std::string digest() const { return digest_; }

private:
    Potential() = default;
    void finish_polynomial(); // classify degree / confinement / bounds

    PotentialFamily family_ = PotentialFamily::Constant;
    double constant_ = 0;
    Eigen::VectorXd slope_;     // Affine
    Eigen::VectorXd center_;    // Harmonic
    double stiffness_ = 0;      // Harmonic
    std::vector<double> coeffs_; // Polynomial
    Eigen::VectorXd table_;     // Tabulated
    ExprPtr expr_;              // Expression
    std::string source_;

    bool confining_ = false;
    double lower_bound_ = 0;
    int growth_degree_ = -1;
    std::string digest_;
};

} // namespace shrinker
