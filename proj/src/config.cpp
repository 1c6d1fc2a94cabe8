#include "shrinker/config.hpp"

#include "shrinker/errors.hpp"

namespace shrinker {

nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["command"] = c.command;
    j["theorem"] = c.theorem;
    j["model"] = c.model;
    j["n"] = c.n;
    j["m"] = c.m;
    j["k"] = c.k;
    j["tau"] = c.tau;
    j["potential"] = c.potential;
    j["potential_b"] = c.potential_b;
    j["thetas"] = c.thetas;
    j["line_points"] = c.line_points;
    j["sphere_levels"] = c.sphere_levels;
    j["domains"] = c.domains;
    j["solver_tol"] = c.solver_tol;
    j["max_iter"] = c.max_iter;
    j["equality_tol"] = c.equality_tol;
    j["norm_tol"] = c.norm_tol;
    j["rigidity_threshold"] = c.rigidity_threshold;
    j["seed"] = c.seed;
    j["dense_cap"] = c.dense_cap;
    j["product_cap"] = c.product_cap;
    j["threads"] = c.threads;
    j["gibbs_trials"] = c.gibbs_trials;
    j["gibbs_dim"] = c.gibbs_dim;
    j["check_w"] = c.check_w;
    j["dump_matrix"] = c.dump_matrix;
    j["out_dir"] = c.out_dir;
    return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        c.command = j.value("command", c.command);
        c.theorem = j.value("theorem", c.theorem);
        c.model = j.value("model", c.model);
        c.n = j.value("n", c.n);
        c.m = j.value("m", c.m);
        c.k = j.value("k", c.k);
        c.tau = j.value("tau", c.tau);
        c.potential = j.value("potential", c.potential);
        c.potential_b = j.value("potential_b", c.potential_b);
        c.thetas = j.value("thetas", c.thetas);
        c.line_points = j.value("line_points", c.line_points);
        c.sphere_levels = j.value("sphere_levels", c.sphere_levels);
        c.domains = j.value("domains", c.domains);
        c.solver_tol = j.value("solver_tol", c.solver_tol);
        c.max_iter = j.value("max_iter", c.max_iter);
        c.equality_tol = j.value("equality_tol", c.equality_tol);
        c.norm_tol = j.value("norm_tol", c.norm_tol);
        c.rigidity_threshold = j.value("rigidity_threshold", c.rigidity_threshold);
        c.seed = j.value("seed", c.seed);
        c.dense_cap = j.value("dense_cap", c.dense_cap);
        c.product_cap = j.value("product_cap", c.product_cap);
        c.threads = j.value("threads", c.threads);
        c.gibbs_trials = j.value("gibbs_trials", c.gibbs_trials);
        c.gibbs_dim = j.value("gibbs_dim", c.gibbs_dim);
        c.check_w = j.value("check_w", c.check_w);
        c.dump_matrix = j.value("dump_matrix", c.dump_matrix);
        c.out_dir = j.value("out_dir", c.out_dir);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parameter, std::string("bad configuration: ") + e.what());
    }
    return c;
}

} // namespace shrinker
