#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace shrinker {

// Effective run configuration. Every field has an explicit default and is
// always emitted, so parse(emit(c)) == c.
struct RunConfig {
    std::string command = "verify"; // verify | entropy | converge | scan | gibbs

    std::string theorem = "1.2";
    std::string model = "gaussian"; // gaussian | sphere | cylinder
    int n = 1;                      // gaussian/sphere dimension
    int m = 2;                      // cylinder sphere factor
    int k = 1;                      // cylinder flat factor
    double tau = 0.25;

    std::string potential = "x^2";
    std::string potential_b;            // scan endpoint
    std::vector<double> thetas = {0.0, 0.25, 0.5, 0.75, 1.0};

    std::vector<int> line_points = {1001, 2001, 4001};
    std::vector<int> sphere_levels = {3, 4, 5};
    std::vector<double> domains;        // empty -> truncation rule picks L

    double solver_tol = 1e-10;
    int max_iter = 20000;
    double equality_tol = 5e-4;
    double norm_tol = 1e-2;
    double rigidity_threshold = 1e-8;
    std::uint64_t seed = 42;
    int dense_cap = 3000;
    long product_cap = 4'000'000;
    int threads = 0;                    // 0 = hardware; env cap applies

    int gibbs_trials = 1000;
    int gibbs_dim = 32;
    bool check_w = false;
    bool dump_matrix = false;
    std::string out_dir = ".";

    bool operator==(const RunConfig&) const = default;
};

nlohmann::json config_to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

} // namespace shrinker
