#include "shrinker/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "shrinker/bounds.hpp"
#include "shrinker/entropy.hpp"
#include "shrinker/errors.hpp"
#include "shrinker/version.hpp"

namespace shrinker {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

ModelShrinker make_model(const RunConfig& c) {
    if (c.model == "gaussian") return ModelShrinker::gaussian(c.n, c.tau);
    if (c.model == "sphere") return ModelShrinker::sphere(c.n, c.tau);
    if (c.model == "cylinder") return ModelShrinker::cylinder(c.m, c.k, c.tau);
    fail(ErrorKind::Parameter, "unknown model '" + c.model + "'");
}

VerifySchedule make_schedule(const RunConfig& c, const ModelShrinker& model) {
    VerifySchedule s;
    s.domains = c.domains;
    switch (model.kind()) {
        case ModelKind::Gaussian:
            for (int n : c.line_points) s.resolutions.push_back({n, -1});
            break;
        case ModelKind::Sphere:
            for (int level : c.sphere_levels) s.resolutions.push_back({0, level});
            break;
        case ModelKind::Cylinder:
            require(c.sphere_levels.size() == c.line_points.size(), ErrorKind::Parameter,
                    "cylinder schedules pair --levels with --points entry by entry");
            for (std::size_t i = 0; i < c.sphere_levels.size(); ++i)
                s.resolutions.push_back({c.line_points[i], c.sphere_levels[i]});
            break;
    }
    return s;
}

VerifyOptions make_options(const RunConfig& c) {
    VerifyOptions o;
    o.solver_tol = c.solver_tol;
    o.max_iter = c.max_iter;
    o.seed = c.seed;
    o.equality_tol = c.equality_tol;
    o.rigidity_threshold = c.rigidity_threshold;
    o.norm_tol = c.norm_tol;
    o.dense_cap = c.dense_cap;
    o.product_cap = c.product_cap;
    return o;
}

json report_to_json(const BoundReport& r) {
    json j;
    j["theorem"] = r.theorem;
    j["model"] = r.model_digest;
    j["potential"] = r.potential_digest;
    json runs = json::array();
    for (const RunRecord& run : r.runs) {
        runs.push_back({{"L", run.L},
                        {"resolution", run.resolution},
                        {"h", run.h},
                        {"lambda0", run.lambda0},
                        {"residual", run.residual},
                        {"iterations", run.iterations},
                        {"method", run.method},
                        {"rhs", run.rhs},
                        {"gap", run.gap}});
    }
    j["runs"] = runs;
    j["lambda0_extrapolated"] = r.lambda0_extrapolated;
    j["observed_order"] = r.observed_order;
    j["rhs"] = {{"value", r.rhs_value}, {"terms", r.rhs_terms}};
    j["gap"] = r.gap;
    j["combined_tolerance"] = r.combined_tolerance;
    j["equality_tolerance"] = r.equality_tolerance;
    j["equality_expected"] = r.equality_expected;
    j["rigidity"] = {{"name", r.rigidity_name},
                     {"value", r.rigidity_value},
                     {"threshold", r.rigidity_threshold}};
    j["domain_monotone"] = r.domain_monotone;
    j["domain_change"] = r.domain_change;
    j["strict_inequality"] = r.strict_inequality;
    j["verdict"] = r.verdict;
    if (!r.note.empty()) j["note"] = r.note;
    j["seed"] = r.seed;
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    require(out.good(), ErrorKind::Io, "cannot open " + path.string());
    out << text;
    require(out.good(), ErrorKind::Io, "write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string summary_csv(const BoundReport& r) {
    std::ostringstream os;
    os << "theorem,model,potential,resolution,L,lambda0,rhs,gap,verdict\n";
    for (const RunRecord& run : r.runs) {
        os << r.theorem << "," << r.model_digest << "," << r.potential_digest << ","
           << run.resolution << "," << fmt(run.L) << "," << fmt(run.lambda0) << ","
           << fmt(run.rhs) << "," << fmt(run.gap) << ",-\n";
    }
    os << r.theorem << "," << r.model_digest << "," << r.potential_digest << ",extrapolated,"
       << fmt(r.runs.empty() ? 0.0 : r.runs.back().L) << "," << fmt(r.lambda0_extrapolated)
       << "," << fmt(r.rhs_value) << "," << fmt(r.gap) << "," << r.verdict << "\n";
    return os.str();
}

void emit_common(const RunConfig& c, const json& report, const std::string& csv) {
    fs::create_directories(c.out_dir);
    json wrapped = report;
    wrapped["version"] = kVersion;
    wrapped["effective_config"] = config_to_json(c);
    write_json(fs::path(c.out_dir) / "report.json", wrapped);
    if (!csv.empty()) write_text(fs::path(c.out_dir) / "summary.csv", csv);
    write_json(fs::path(c.out_dir) / "effective-config.json", config_to_json(c));
}

void dump_operator(const RunConfig& c, const ModelShrinker& model, const Potential& V,
                   const VerifySchedule& schedule) {
    const double L = schedule.domains.empty() ? 0.0 : schedule.domains.back();
    const Discretization disc =
        make_discretization(model, schedule.resolutions.back(), L, c.product_cap);
    DiscreteOperator op;
    if (c.theorem == "1.4" || c.theorem == "1.5")
        op = assemble_drifted(disc, model, V).weighted;
    else
        op = assemble_schrodinger(disc, model, V);
    write_matrix_market((fs::path(c.out_dir) / "operator.mtx").string(), op.matrix);
    Eigen::SparseMatrix<double> mass(op.size(), op.size());
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < op.size(); ++i) trips.emplace_back(i, i, op.mass[i]);
    mass.setFromTriplets(trips.begin(), trips.end());
    write_matrix_market((fs::path(c.out_dir) / "mass.mtx").string(), mass);
    write_nodes_csv((fs::path(c.out_dir) / "nodes.csv").string(), disc);
}

} // namespace

int effective_threads(int requested) {
    int cap = std::numeric_limits<int>::max();
    if (const char* env = std::getenv("SHRINKER_SPECTRA_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) cap = parsed;
    }
    int t = requested > 0 ? requested
                          : static_cast<int>(std::thread::hardware_concurrency());
    if (t <= 0) t = 1;
    return std::max(1, std::min(t, cap));
}

int cmd_verify(const RunConfig& c) {
    const ModelShrinker model = make_model(c);
    const Potential potential = Potential::expression(c.potential);
    VerifySchedule schedule = make_schedule(c, model);
    const BoundReport report = verify(c.theorem, model, potential, schedule, make_options(c));

    // Re-emit the domain actually used so reruns are reproducible.
    RunConfig effective = c;
    if (effective.domains.empty() && !report.runs.empty() && !model.compact()) {
        effective.domains = {0.5 * report.runs.back().L, report.runs.back().L};
        schedule.domains = effective.domains;
    }
    emit_common(effective, report_to_json(report), summary_csv(report));
    if (c.dump_matrix) dump_operator(effective, model, potential, schedule);

    std::cout << "theorem " << report.theorem << " on " << report.model_digest << " with "
              << report.potential_digest << ": lambda0 = " << fmt(report.lambda0_extrapolated)
              << ", rhs = " << fmt(report.rhs_value) << ", gap = " << fmt(report.gap) << " ["
              << report.verdict << "]\n";
    return (report.verdict == "holds" || report.verdict == "equality_confirmed")
               ? kExitOk
               : kExitViolation;
}

int cmd_entropy(const RunConfig& c) {
    const ModelShrinker model = make_model(c);
    const double mu_s = shrinker_entropy(model);
    std::cout << "mu_s(" << model.digest() << ") = " << fmt(mu_s) << "\n";

    json j;
    j["model"] = model.digest();
    j["mu_s"] = mu_s;
    j["mu_s_definitional"] = model.entropy();

    if (c.check_w) {
        const VerifySchedule schedule = make_schedule(c, model);
        const double L =
            c.domains.empty() ? (model.compact() ? 0.0 : choose_domain(model,
                                                                       Potential::constant(0), 4.0))
                              : c.domains.back();
        json table = json::array();
        std::cout << "resolution,W,K,|W-K|,|K-mu_s|\n";
        for (const ResolutionSpec& res : schedule.resolutions) {
            const Discretization disc = make_discretization(model, res, L, c.product_cap);
            const GeometrySamples geo = sample_geometry(disc, model);
            const FunctionalReport w = w_functional(disc, model, geo.f, c.tau, c.norm_tol);
            const FunctionalReport k =
                k_functional(disc, model, geo.density.array().sqrt(), c.tau, c.norm_tol);
            json row = {{"resolution", disc.digest()},
                        {"w", w.value},
                        {"k", k.value},
                        {"wk_mismatch", std::abs(w.value - k.value)},
                        {"k_error", std::abs(k.value - mu_s)}};
            table.push_back(row);
            std::cout << disc.digest() << "," << fmt(w.value) << "," << fmt(k.value) << ","
                      << fmt(std::abs(w.value - k.value)) << ","
                      << fmt(std::abs(k.value - mu_s)) << "\n";
        }
        j["w_k_table"] = table;
    }
    emit_common(c, j, "");
    return kExitOk;
}

int cmd_converge(const RunConfig& c) {
    const ModelShrinker model = make_model(c);
    const Potential potential = Potential::expression(c.potential);
    const VerifySchedule schedule = make_schedule(c, model);
    const BoundReport report = verify(c.theorem, model, potential, schedule, make_options(c));

    std::ostringstream csv;
    csv << "h,lambda0,extrapolated\n";
    double prev = 0;
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        const RunRecord& run = report.runs[i];
        const double extrap = i == 0 ? run.lambda0 : run.lambda0 + (run.lambda0 - prev) / 3.0;
        csv << fmt(run.h) << "," << fmt(run.lambda0) << "," << fmt(extrap) << "\n";
        prev = run.lambda0;
    }
    fs::create_directories(c.out_dir);
    write_text(fs::path(c.out_dir) / "converge.csv", csv.str());
    emit_common(c, report_to_json(report), summary_csv(report));
    std::cout << csv.str();
    std::cout << "observed_order = " << fmt(report.observed_order) << "\n";
    return kExitOk;
}

int cmd_scan(const RunConfig& c) {
    const ModelShrinker model = make_model(c);
    require(!c.potential_b.empty(), ErrorKind::Parameter,
            "scan needs --potential-a and --potential-b");
    const Potential a = Potential::expression(c.potential);
    const Potential b = Potential::expression(c.potential_b);
    const VerifySchedule schedule = make_schedule(c, model);
    const std::vector<BoundReport> reports =
        scan(c.theorem, model, a, b, c.thetas, schedule, make_options(c),
             effective_threads(c.threads));

    std::ostringstream csv;
    csv << "theta,theorem,model,potential,resolution,L,lambda0,rhs,gap,verdict\n";
    json all = json::array();
    bool ok = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const BoundReport& r = reports[i];
        csv << fmt(c.thetas[i]) << "," << r.theorem << "," << r.model_digest << ","
            << r.potential_digest << ",extrapolated,"
            << fmt(r.runs.empty() ? 0.0 : r.runs.back().L) << ","
            << fmt(r.lambda0_extrapolated) << "," << fmt(r.rhs_value) << "," << fmt(r.gap)
            << "," << r.verdict << "\n";
        all.push_back(report_to_json(r));
        ok = ok && (r.verdict == "holds" || r.verdict == "equality_confirmed");
    }
    fs::create_directories(c.out_dir);
    write_text(fs::path(c.out_dir) / "scan.csv", csv.str());
    json j;
    j["reports"] = all;
    emit_common(c, j, "");
    std::cout << csv.str();
    return ok ? kExitOk : kExitViolation;
}

int cmd_gibbs(const RunConfig& c) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int violations = 0;
    double worst_slack = std::numeric_limits<double>::infinity();
    double worst_equality = 0;
    for (int trial = 0; trial < c.gibbs_trials; ++trial) {
        const int dim = 2 + static_cast<int>(unif(rng) * (c.gibbs_dim - 2));
        Eigen::VectorXd mu(dim), H(dim), u_sq(dim);
        for (int i = 0; i < dim; ++i) {
            mu[i] = 0.05 + unif(rng);
            H[i] = 40.0 * (unif(rng) - 0.5);
            u_sq[i] = 0.01 + unif(rng);
        }
        const double t = 0.05 + 5.0 * unif(rng);
        const GibbsResult g = gibbs_value(mu, H, t);

        u_sq /= mu.dot(u_sq); // normalize against the measure
        double lhs = 0;
        for (int i = 0; i < dim; ++i)
            lhs += mu[i] * (u_sq[i] * std::log(u_sq[i]) + t * H[i] * u_sq[i]);
        const double scale = 1.0 + std::abs(g.value);
        const double slack = lhs - g.value;
        worst_slack = std::min(worst_slack, slack / scale);
        if (slack < -1e-12 * scale) ++violations;

        double lhs_gibbs = 0;
        for (int i = 0; i < dim; ++i) {
            if (g.density[i] > 0)
                lhs_gibbs += mu[i] * (g.density[i] * std::log(g.density[i]) +
                                      t * H[i] * g.density[i]);
        }
        worst_equality = std::max(worst_equality, std::abs(lhs_gibbs - g.value) / scale);
    }

    json j;
    j["trials"] = c.gibbs_trials;
    j["violations"] = violations;
    j["worst_relative_slack"] = worst_slack;
    j["max_equality_deviation"] = worst_equality;
    j["seed"] = c.seed;
    emit_common(c, j, "");
    std::cout << "gibbs: " << c.gibbs_trials << " trials, " << violations
              << " violations, max equality deviation " << fmt(worst_equality) << "\n";
    return violations == 0 ? kExitOk : kExitViolation;
}

namespace {

void add_common_flags(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--model", c.model, "gaussian | sphere | cylinder");
    cmd->add_option("--n", c.n, "dimension for gaussian/sphere models");
    cmd->add_option("--m", c.m, "cylinder sphere-factor dimension");
    cmd->add_option("--k", c.k, "cylinder flat-factor dimension");
    cmd->add_option("--tau", c.tau, "shrinker scale");
    cmd->add_option("--points", c.line_points, "line resolution schedule")->delimiter(',');
    cmd->add_option("--levels", c.sphere_levels, "icosphere subdivision schedule")
        ->delimiter(',');
    cmd->add_option("--domains", c.domains, "truncation half-widths, ascending")
        ->delimiter(',');
    cmd->add_option("--tol", c.solver_tol, "eigensolver residual tolerance");
    cmd->add_option("--max-iter", c.max_iter, "eigensolver iteration cap");
    cmd->add_option("--equality-tol", c.equality_tol, "equality detection tolerance");
    cmd->add_option("--norm-tol", c.norm_tol, "normalization tolerance for functionals");
    cmd->add_option("--rigidity-threshold", c.rigidity_threshold,
                    "rigidity diagnostic threshold");
    cmd->add_option("--seed", c.seed, "RNG seed");
    cmd->add_option("--dense-cap", c.dense_cap, "dense solver size cap");
    cmd->add_option("--product-cap", c.product_cap, "product grid node cap");
    cmd->add_option("--threads", c.threads, "worker cap (0 = hardware)");
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_flag("--dump-matrix", c.dump_matrix, "write MatrixMarket operator dumps");
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    RunConfig c;
    CLI::App app{"spectral lower bounds for Schrodinger operators on model Ricci shrinkers"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CLI::App* verify_cmd = app.add_subcommand("verify", "verify one theorem instance");
    verify_cmd->add_option("--theorem", c.theorem, "1.1 | 1.2 | 1.3 | 1.4 | 1.5");
    verify_cmd->add_option("--potential", c.potential, "potential expression");
    add_common_flags(verify_cmd, c);

    CLI::App* entropy_cmd = app.add_subcommand("entropy", "closed-form shrinker entropy");
    entropy_cmd->add_flag("--check-w", c.check_w, "emit the discrete W/K cross-check table");
    add_common_flags(entropy_cmd, c);

    CLI::App* converge_cmd = app.add_subcommand("converge", "resolution convergence table");
    converge_cmd->add_option("--theorem", c.theorem, "theorem id");
    converge_cmd->add_option("--potential", c.potential, "potential expression");
    add_common_flags(converge_cmd, c);

    CLI::App* scan_cmd = app.add_subcommand("scan", "fixed-integral family sweep");
    scan_cmd->add_option("--theorem", c.theorem, "theorem id");
    scan_cmd->add_option("--potential-a", c.potential, "family endpoint at theta = 0");
    scan_cmd->add_option("--potential-b", c.potential_b, "family endpoint at theta = 1");
    scan_cmd->add_option("--thetas", c.thetas, "theta grid")->delimiter(',');
    add_common_flags(scan_cmd, c);

    CLI::App* gibbs_cmd = app.add_subcommand("gibbs", "Gibbs variational property suite");
    gibbs_cmd->add_option("--trials", c.gibbs_trials, "number of random instances");
    gibbs_cmd->add_option("--dim", c.gibbs_dim, "max discrete measure size");
    add_common_flags(gibbs_cmd, c);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        std::cout << kVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (app.got_subcommand(verify_cmd)) {
            c.command = "verify";
            return cmd_verify(c);
        }
        if (app.got_subcommand(entropy_cmd)) {
            c.command = "entropy";
            return cmd_entropy(c);
        }
        if (app.got_subcommand(converge_cmd)) {
            c.command = "converge";
            return cmd_converge(c);
        }
        if (app.got_subcommand(scan_cmd)) {
            c.command = "scan";
            return cmd_scan(c);
        }
        if (app.got_subcommand(gibbs_cmd)) {
            c.command = "gibbs";
            return cmd_gibbs(c);
        }
        std::cerr << "error: no command selected\n";
        return kExitConfig;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::Convergence ? kExitNoConvergence : kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace shrinker
