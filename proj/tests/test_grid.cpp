#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shrinker/eig.hpp"
#include "shrinker/errors.hpp"
#include "shrinker/grid.hpp"
#include "shrinker/operators.hpp"

using namespace shrinker;

namespace {

constexpr double kPi = std::numbers::pi;

// Pure (negative) Laplacian pencil over the interior nodes; test-side oracle
// plumbing independent of the model/potential assembly path.
DiscreteOperator make_laplace_op(const Discretization& disc) {
    std::vector<int> active;
    for (int i = 0; i < disc.n_nodes(); ++i)
        if (disc.interior[static_cast<std::size_t>(i)]) active.push_back(i);
    std::vector<int> pos(static_cast<std::size_t>(disc.n_nodes()), -1);
    for (std::size_t a = 0; a < active.size(); ++a)
        pos[static_cast<std::size_t>(active[a])] = static_cast<int>(a);
    std::vector<Eigen::Triplet<double>> trips;
    for (int col = 0; col < disc.stiffness.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(disc.stiffness, col); it; ++it)
            if (pos[static_cast<std::size_t>(it.row())] >= 0 &&
                pos[static_cast<std::size_t>(col)] >= 0)
                trips.emplace_back(pos[static_cast<std::size_t>(it.row())],
                                   pos[static_cast<std::size_t>(col)], it.value());
    DiscreteOperator op;
    op.matrix.resize(static_cast<int>(active.size()), static_cast<int>(active.size()));
    op.matrix.setFromTriplets(trips.begin(), trips.end());
    op.mass.resize(static_cast<int>(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a)
        op.mass[static_cast<int>(a)] = disc.weights[active[a]];
    op.active_nodes = active;
    op.node_count = disc.n_nodes();
    op.name = "laplace";
    return op;
}

} // namespace

TEST_CASE("line grid stencil and weights") {
    const Discretization d = line_grid(1.0, 3); // h = 1
    CHECK(d.mesh_h == doctest::Approx(1.0));
    // Interior stencil row over the mass is (-1, 2, -1)/h^2; at h = 1 the weak
    // row itself reads (-1, 2, -1).
    CHECK(d.stiffness.coeff(1, 0) == doctest::Approx(-1.0));
    CHECK(d.stiffness.coeff(1, 1) == doctest::Approx(2.0));
    CHECK(d.stiffness.coeff(1, 2) == doctest::Approx(-1.0));

    const Discretization big = line_grid(12.0, 2001);
    CHECK(big.weights.sum() == doctest::Approx(24.0).epsilon(1e-13));

    // Constants are annihilated on interior rows.
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(big.n_nodes());
    const Eigen::VectorXd sv = big.stiffness * ones;
    for (int i = 1; i + 1 < big.n_nodes(); ++i) CHECK(std::abs(sv[i]) <= 1e-12 / big.mesh_h);

    CHECK_THROWS_AS(line_grid(0.0, 5), Error);
    CHECK_THROWS_AS(line_grid(1.0, 2), Error);
}

TEST_CASE("icosphere counts, area, and row sums") {
    const Discretization ico = sphere_mesh(0);
    CHECK(ico.n_nodes() == 12);
    CHECK(ico.faces.rows() == 20);
    for (int level : {1, 2, 3}) {
        const Discretization s = sphere_mesh(level);
        CHECK(s.n_nodes() == 10 * (1 << (2 * level)) + 2); // 10 * 4^level + 2
        CHECK(s.faces.rows() == 20 * (1 << (2 * level)));
    }
    const Discretization s4 = sphere_mesh(4);
    CHECK(s4.n_nodes() == 2562);
    CHECK(s4.weights.sum() == doctest::Approx(4.0 * kPi).epsilon(5e-3)); // within 0.5%

    // Closed surface: all row sums vanish.
    const Eigen::VectorXd sv = s4.stiffness * Eigen::VectorXd::Ones(s4.n_nodes());
    CHECK(sv.cwiseAbs().maxCoeff() <= 1e-12 * s4.stiffness.coeffs().abs().maxCoeff() * 10);
}

TEST_CASE("sphere spectrum: lowest nonzero eigenvalue is l(l+1) = 2") {
    const Discretization s = sphere_mesh(4);
    const Eigen::VectorXd evs = dense_reference(make_laplace_op(s), 3000);
    CHECK(std::abs(evs[0]) <= 1e-10);
    CHECK(evs[1] == doctest::Approx(2.0).epsilon(5e-3));
    CHECK(evs[3] == doctest::Approx(2.0).epsilon(5e-3)); // l = 1 is threefold
}

TEST_CASE("sphere rescaling scales the spectrum by 1/r^2") {
    const Discretization unit = sphere_mesh(3);
    const Discretization same = rescale_sphere(unit, 1.0);
    CHECK(same.weights.sum() == doctest::Approx(unit.weights.sum()).epsilon(1e-14));

    const Discretization doubled = rescale_sphere(unit, 2.0);
    const Eigen::VectorXd ev1 = dense_reference(make_laplace_op(unit), 3000);
    const Eigen::VectorXd ev2 = dense_reference(make_laplace_op(doubled), 3000);
    CHECK(ev2[1] == doctest::Approx(ev1[1] / 4.0).epsilon(1e-12));
    CHECK(doubled.weights.sum() == doctest::Approx(4.0 * unit.weights.sum()).epsilon(1e-14));
}

TEST_CASE("product grid: five-point stencil and separable eigenvalue") {
    const Discretization a = line_grid(1.0, 5);
    const Discretization p = product_grid(a, a);
    CHECK(p.n_nodes() == 25);
    // Interior node (2,2) -> index 12; operator row over mass is the 2-D
    // Laplacian stencil (4, -1, -1, -1, -1)/h^2.
    const double h = a.mesh_h;
    const double w = p.weights[12];
    CHECK(p.stiffness.coeff(12, 12) / w == doctest::Approx(4.0 / (h * h)).epsilon(1e-12));
    for (int nb : {7, 11, 13, 17})
        CHECK(p.stiffness.coeff(12, nb) / w == doctest::Approx(-1.0 / (h * h)).epsilon(1e-12));

    // Constants annihilated at interior nodes.
    const Eigen::VectorXd sv = p.stiffness * Eigen::VectorXd::Ones(25);
    CHECK(std::abs(sv[12]) <= 1e-13);

    // Dirichlet ground state on [-1,1]^2: 2 (pi/2)^2, second order in h.
    const Discretization fine = product_grid(line_grid(1.0, 41), line_grid(1.0, 41));
    const SpectralResult sr = smallest_eigenpair(make_laplace_op(fine));
    const double exact = 2.0 * (kPi / 2.0) * (kPi / 2.0);
    CHECK(sr.lambda0 == doctest::Approx(exact).epsilon(2e-3));

    CHECK_THROWS_AS(product_grid(line_grid(1.0, 100), line_grid(1.0, 100), 500), Error);
}

TEST_CASE("assembled matrices are exactly symmetric") {
    for (const Discretization& d :
         {line_grid(3.0, 17), sphere_mesh(2), product_grid(line_grid(2.0, 9), line_grid(1.0, 7))}) {
        const Eigen::SparseMatrix<double> t = d.stiffness.transpose();
        const Eigen::SparseMatrix<double> diff = d.stiffness - t;
        double worst = 0;
        for (int col = 0; col < diff.outerSize(); ++col)
            for (Eigen::SparseMatrix<double>::InnerIterator it(diff, col); it; ++it)
                worst = std::max(worst, std::abs(it.value()));
        CHECK(worst == 0.0); // bitwise symmetry
    }
}

TEST_CASE("node gradients and laplacian are exact on quadratics") {
    const Discretization d = line_grid(2.0, 21);
    const Eigen::VectorXd f = d.coords.col(0).array().square();
    const Eigen::MatrixXd g = node_gradients(d, f);
    for (int i = 0; i < d.n_nodes(); ++i)
        CHECK(g(i, 0) == doctest::Approx(2.0 * d.coords(i, 0)).epsilon(1e-12));
    const Eigen::VectorXd lap = node_laplacian(d, f);
    for (int i = 1; i + 1 < d.n_nodes(); ++i) CHECK(lap[i] == doctest::Approx(2.0).epsilon(1e-11));

    // Product grid: gradient of x*y has components (y, x).
    const Discretization p = product_grid(line_grid(1.0, 11), line_grid(1.0, 11));
    const Eigen::VectorXd xy = p.coords.col(0).array() * p.coords.col(1).array();
    const Eigen::MatrixXd gp = node_gradients(p, xy);
    for (int i = 0; i < p.n_nodes(); ++i) {
        CHECK(gp(i, 0) == doctest::Approx(p.coords(i, 1)).epsilon(1e-11));
        CHECK(gp(i, 1) == doctest::Approx(p.coords(i, 0)).epsilon(1e-11));
    }
}

TEST_CASE("sphere gradients vanish on constants and see tangential variation") {
    const Discretization s = sphere_mesh(3);
    const Eigen::MatrixXd gc = node_gradients(s, Eigen::VectorXd::Constant(s.n_nodes(), 3.0));
    CHECK(gc.cwiseAbs().maxCoeff() <= 1e-12);

    // f = z on the unit sphere has |grad f|^2 = 1 - z^2.
    const Eigen::VectorXd z = s.coords.col(2);
    const Eigen::MatrixXd gz = node_gradients(s, z);
    for (int i = 0; i < s.n_nodes(); i += 37) {
        const double expected = 1.0 - z[i] * z[i];
        CHECK(gz.row(i).squaredNorm() == doctest::Approx(expected).epsilon(0.08).scale(1.0));
    }
}

TEST_CASE("finite-difference hessian norm") {
    const Discretization d = line_grid(2.0, 41);
    const Eigen::VectorXd affine = 3.0 * d.coords.col(0).array() + 1.0;
    CHECK(fd_hessian_norm(d, affine) <= 1e-12);
    const Eigen::VectorXd quad = d.coords.col(0).array().square();
    CHECK(fd_hessian_norm(d, quad) == doctest::Approx(2.0).epsilon(1e-10));

    // Mixed second derivative on a tensor grid: V = x y has Frobenius sqrt(2).
    const Discretization p = product_grid(line_grid(1.0, 21), line_grid(1.0, 21));
    const Eigen::VectorXd xy = p.coords.col(0).array() * p.coords.col(1).array();
    CHECK(fd_hessian_norm(p, xy) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));

    // Sphere fibers must be constant.
    const Discretization s = sphere_mesh(2);
    CHECK(fd_hessian_norm(s, Eigen::VectorXd::Constant(s.n_nodes(), 5.0)) == 0.0);
    CHECK_THROWS_AS((void)fd_hessian_norm(s, Eigen::VectorXd(s.coords.col(2))), Error);

    // Cylinder-style product: constant-per-fiber functions pass through.
    const Discretization cyl = product_grid(sphere_mesh(1), line_grid(2.0, 31));
    Eigen::VectorXd axial(cyl.n_nodes());
    for (int i = 0; i < cyl.n_nodes(); ++i) axial[i] = cyl.coords(i, 3) * cyl.coords(i, 3);
    CHECK(fd_hessian_norm(cyl, axial) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("dirichlet monotonicity in the domain half-width") {
    // Fixed h = 0.02; lambda0(L) is non-increasing as L grows.
    double prev = std::numeric_limits<double>::infinity();
    for (double L : {4.0, 6.0, 8.0}) {
        const int n = static_cast<int>(2.0 * L / 0.02) + 1;
        const Discretization d = line_grid(L, n);
        DiscreteOperator op = make_laplace_op(d);
        Eigen::VectorXd diag(op.mass.size());
        for (int a = 0; a < op.mass.size(); ++a) {
            const double x = d.coords(op.active_nodes[static_cast<std::size_t>(a)], 0);
            diag[a] = op.mass[a] * x * x;
        }
        Eigen::SparseMatrix<double> dm(op.mass.size(), op.mass.size());
        std::vector<Eigen::Triplet<double>> trips;
        for (int a = 0; a < op.mass.size(); ++a) trips.emplace_back(a, a, diag[a]);
        dm.setFromTriplets(trips.begin(), trips.end());
        op.matrix = (op.matrix + dm).eval();
        const double lambda = smallest_eigenpair(op).lambda0;
        CHECK(lambda <= prev + 1e-12);
        prev = lambda;
    }
    CHECK(prev == doctest::Approx(1.0).epsilon(2e-4));
}
