#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shrinker/eig.hpp"
#include "shrinker/grid.hpp"
#include "shrinker/models.hpp"
#include "shrinker/potential.hpp"

namespace shrinker {

// One grid size in a convergence schedule. Line models use line_points;
// sphere models use sphere_level; cylinders use both (halve h together).
struct ResolutionSpec {
    int line_points = 0;
    int sphere_level = -1;
};

struct VerifySchedule {
    std::vector<ResolutionSpec> resolutions; // >= 3, coarse to fine
    std::vector<double> domains;             // L values, ascending; truncated models need >= 2
};

struct VerifyOptions {
    double solver_tol = 1e-10;
    int max_iter = 20000;
    std::uint64_t seed = 42;
    double equality_tol = 5e-4;        // after extrapolation
    double rigidity_threshold = 1e-8;
    double norm_tol = 1e-2;
    int dense_cap = 3000;
    long product_cap = 4'000'000;
    double strict_factor = 10.0;       // strict inequality: gap > factor * combined tol
};

struct RunRecord {
    double L = 0;
    std::string resolution;
    double h = 0;
    double lambda0 = 0;
    double residual = 0;
    int iterations = 0;
    std::string method;
    double rhs = 0;
    double gap = 0;
};

struct BoundReport {
    std::string theorem;
    std::string model_digest;
    std::string potential_digest;
    std::vector<RunRecord> runs;
    double lambda0_extrapolated = 0;
    double observed_order = 0;
    double rhs_value = 0;                  // finest quadrature
    std::map<std::string, double> rhs_terms;
    double gap = 0;                        // lambda0_extrapolated - rhs_value
    double combined_tolerance = 0;
    double equality_tolerance = 0;
    bool equality_expected = false;
    std::string rigidity_name;
    double rigidity_value = 0;
    double rigidity_threshold = 0;
    bool domain_monotone = true;
    double domain_change = 0;              // |lambda0(L_max) - lambda0(L_prev)| at fixed h
    bool strict_inequality = false;
    std::string verdict;                   // holds | equality_confirmed | violated_within_tolerance_review
    std::string note;
    std::uint64_t seed = 0;
};

// Theorem right-hand sides. All integrals are max-shifted quadrature on the
// given grid.
double rhs_frank(int n, double tau, const Potential& V, const Discretization& disc);
double rhs_thm_1_2(const ModelShrinker& model, const Potential& V, const Discretization& disc);
double rhs_thm_1_4(const ModelShrinker& model, const Potential& V, const Discretization& disc);
double rhs_thm_1_5(const ModelShrinker& model, const Potential& V, const Discretization& disc);

// Itemized variant used in reports.
struct RhsBreakdown {
    double value = 0;
    std::map<std::string, double> terms;
};
RhsBreakdown rhs_breakdown(const std::string& theorem, const ModelShrinker& model,
                           const Potential& V, const Discretization& disc);

// Builds the grid realizing a model at one schedule entry.
Discretization make_discretization(const ModelShrinker& model, const ResolutionSpec& res,
                                   double L, long product_cap = 4'000'000);

// Domain half-width satisfying the truncation margin rule: the boundary value
// of V + R/4 exceeds a coarse Rayleigh estimate by at least `margin`,
// starting from L0 and doubling.
double choose_domain(const ModelShrinker& model, const Potential& V, double L0,
                     double margin = 50.0);

// Full pipeline for one theorem instance: domain study, resolution sweep,
// Richardson extrapolation, RHS evaluation, rigidity diagnostics, verdict.
BoundReport verify(const std::string& theorem, const ModelShrinker& model, const Potential& V,
                   const VerifySchedule& schedule, const VerifyOptions& opts = {});

// Fixed-integral family sweep V_theta = (1-theta) A + theta B + c_theta, with
// c_theta chosen so int e^{-4 tau V_theta} matches theta = 0. Fans out over a
// worker pool capped by `threads` (0 = hardware).
std::vector<BoundReport> scan(const std::string& theorem, const ModelShrinker& model,
                              const Potential& a, const Potential& b,
                              const std::vector<double>& thetas, const VerifySchedule& schedule,
                              const VerifyOptions& opts = {}, int threads = 0);

} // namespace shrinker
