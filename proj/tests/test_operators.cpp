#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "shrinker/eig.hpp"
#include "shrinker/errors.hpp"
#include "shrinker/grid.hpp"
#include "shrinker/models.hpp"
#include "shrinker/operators.hpp"
#include "shrinker/potential.hpp"

using namespace shrinker;

namespace {
constexpr double kPi = std::numbers::pi;
} // namespace

TEST_CASE("schrodinger assembly adds w (R/4 + V) on the diagonal") {
    const ModelShrinker g = ModelShrinker::gaussian(1, 0.25);
    const Discretization d = line_grid(4.0, 41);
    const Potential v = Potential::expression("x^2");
    const DiscreteOperator op = assemble_schrodinger(d, g, v);
    // Interior node: diag = 2/h + w x^2 (R = 0), off-diagonals -1/h.
    const int a = 10; // some interior active index
    const int node = op.active_nodes[a];
    const double x = d.coords(node, 0);
    const double h = d.mesh_h;
    CHECK(op.matrix.coeff(a, a) == doctest::Approx(2.0 / h + h * x * x).epsilon(1e-14));
    CHECK(op.mass[a] == doctest::Approx(h));

    // Sphere with constant potential: action on constants is (R/4 + c) W.
    const ModelShrinker s = ModelShrinker::sphere(2, 0.5);
    const Discretization mesh = rescale_sphere(sphere_mesh(2), s.sphere_radius());
    const DiscreteOperator sop = assemble_schrodinger(mesh, s, Potential::constant(2.0));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sop.mass.size());
    const Eigen::VectorXd av = sop.matrix * ones;
    for (int i = 0; i < sop.mass.size(); ++i)
        CHECK(av[i] == doctest::Approx((0.5 + 2.0) * sop.mass[i]).epsilon(1e-11));
}

TEST_CASE("non-confining potentials are refused on truncated grids") {
    const ModelShrinker g = ModelShrinker::gaussian(1, 0.25);
    const Discretization d = line_grid(6.0, 101);
    try {
        (void)assemble_schrodinger(d, g, Potential::expression("2*x"));
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Refusal);
    }
    // Compact geometry accepts anything bounded.
    const ModelShrinker s = ModelShrinker::sphere(2, 0.5);
    const Discretization mesh = rescale_sphere(sphere_mesh(1), s.sphere_radius());
    CHECK_NOTHROW((void)assemble_schrodinger(mesh, s, Potential::constant(-3.0)));
}

TEST_CASE("quartic oscillator ground state on the stated grid") {
    const ModelShrinker g = ModelShrinker::gaussian(1, 0.25);
    const Discretization d = line_grid(8.0, 4001);
    const DiscreteOperator op = assemble_schrodinger(d, g, Potential::expression("x^4"));
    const SpectralResult sr = smallest_eigenpair(op);
    CHECK(sr.lambda0 == doctest::Approx(1.060362).epsilon(1e-4));
}

TEST_CASE("drifted operator: kernel, tilt, and exact similarity") {
    const ModelShrinker g = ModelShrinker::gaussian(1, 0.25);
    const Discretization d = line_grid(10.0, 1501);

    // V = 0: lambda0 = 0 with constant eigenvector.
    const DriftedAssembly zero = assemble_drifted(d, g, Potential::constant(0.0));
    const SpectralResult sr0 = smallest_eigenpair(zero.weighted);
    CHECK(std::abs(sr0.lambda0) <= 1e-8);
    Eigen::VectorXd interior_vals;
    const Eigen::VectorXd ev = sr0.eigenvector;
    // Cosine similarity with the constant vector in the weighted inner product.
    double dot = 0, nv = 0, nc = 0;
    for (int a = 0; a < zero.weighted.mass.size(); ++a) {
        const int node = zero.weighted.active_nodes[static_cast<std::size_t>(a)];
        dot += zero.weighted.mass[a] * ev[node];
        nv += zero.weighted.mass[a] * ev[node] * ev[node];
        nc += zero.weighted.mass[a];
    }
    CHECK(std::abs(dot) / std::sqrt(nv * nc) == doctest::Approx(1.0).epsilon(1e-6));

    // V = 2x: lambda0 = -1 (analytic drifted oscillator ground state).
    const DriftedAssembly tilt = assemble_drifted(d, g, Potential::expression("2*x"));
    const SpectralResult sr1 = smallest_eigenpair(tilt.weighted);
    CHECK(sr1.lambda0 == doctest::Approx(-1.0).epsilon(2e-5));

    // Weighted and conjugated assemblies agree to rounding.
    const SpectralResult sr1c = smallest_eigenpair(tilt.conjugated);
    CHECK(std::abs(sr1.lambda0 - sr1c.lambda0) <= 1e-10 * std::abs(sr1.lambda0));
}

TEST_CASE("drifted refusal without a confining conjugated form") {
    const ModelShrinker g = ModelShrinker::gaussian(1, 0.25);
    const Discretization d = line_grid(6.0, 101);
    try {
        (void)assemble_drifted(d, g, Potential::expression("-x^4"));
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Refusal);
    }
}

TEST_CASE("quadrature") {
    const ModelShrinker g = ModelShrinker::gaussian(1, 0.25);
    const Discretization d = line_grid(12.0, 2001);
    const Eigen::VectorXd samples = (-d.coords.col(0).array().square()).exp();
    CHECK(integrate(d, samples) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-8));
    CHECK(integrate_weighted(d, g, Eigen::VectorXd::Ones(d.n_nodes())) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(integrate(d, Eigen::VectorXd::Zero(d.n_nodes())) == 0.0);
    CHECK_THROWS_AS((void)integrate(d, Eigen::VectorXd::Zero(7)), Error);

    // Max-shifted log integral survives exponents that would overflow.
    const Eigen::VectorXd huge = Eigen::VectorXd::Constant(d.n_nodes(), 800.0);
    CHECK(log_integral_exp(d, huge) == doctest::Approx(800.0 + std::log(24.0)).epsilon(1e-12));
    const Eigen::VectorXd tiny = Eigen::VectorXd::Constant(d.n_nodes(), -800.0);
    CHECK(log_integral_exp(d, tiny) == doctest::Approx(-800.0 + std::log(24.0)).epsilon(1e-12));
}

TEST_CASE("geometry-grid compatibility is checked") {
    const ModelShrinker s = ModelShrinker::sphere(2, 0.5);
    CHECK_THROWS_AS((void)sample_geometry(line_grid(2.0, 11), s), Error);
    const ModelShrinker g = ModelShrinker::gaussian(2, 1.0);
    CHECK_THROWS_AS((void)sample_geometry(line_grid(2.0, 11), g), Error);
    // Wrong radius is rejected.
    CHECK_THROWS_AS((void)sample_geometry(sphere_mesh(1), ModelShrinker::sphere(2, 2.0)), Error);
}

TEST_CASE("matrix market and node csv dumps") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "shrinker_io_test";
    fs::create_directories(dir);

    const Discretization d = line_grid(1.0, 4);
    write_matrix_market((dir / "stiff.mtx").string(), d.stiffness);
    std::ifstream in(dir / "stiff.mtx");
    std::string banner;
    std::getline(in, banner);
    CHECK(banner == "%%MatrixMarket matrix coordinate real symmetric");
    int rows, cols, nnz;
    in >> rows >> cols >> nnz;
    CHECK(rows == 4);
    CHECK(cols == 4);
    CHECK(nnz == 7); // diagonal + subdiagonal of a 4-node chain
    int seen = 0;
    for (int r, c; in >> r >> c;) {
        double v;
        in >> v;
        CHECK(r >= c); // lower triangle, 1-based
        ++seen;
    }
    CHECK(seen == nnz);

    write_nodes_csv((dir / "nodes.csv").string(), d);
    std::ifstream csv(dir / "nodes.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "node_id,x1");
    std::string first;
    std::getline(csv, first);
    CHECK(first == "0,-1");

    const Discretization cyl = product_grid(sphere_mesh(0), line_grid(1.0, 3));
    write_nodes_csv((dir / "cyl.csv").string(), cyl);
    std::ifstream csv2(dir / "cyl.csv");
    std::getline(csv2, header);
    CHECK(header == "node_id,x1,x2,x3,x4");
    fs::remove_all(dir);
}
