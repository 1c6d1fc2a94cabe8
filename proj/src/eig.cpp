#include "shrinker/eig.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace shrinker {

namespace {

// Standard-form reduction B = D^{-1/2} A D^{-1/2} with D = diag(mass).
Eigen::SparseMatrix<double> standard_form(const DiscreteOperator& op) {
    for (int i = 0; i < op.mass.size(); ++i)
        require(op.mass[i] > 0, ErrorKind::IndefiniteWeight,
                "mass weight " + std::to_string(i) + " is not positive");
    const Eigen::VectorXd inv_root = op.mass.array().rsqrt();
    Eigen::SparseMatrix<double> b = op.matrix;
    for (int col = 0; col < b.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(b, col); it; ++it)
            it.valueRef() *= inv_root[it.row()] * inv_root[col];
    return b;
}

struct Gershgorin {
    double lo = 0, hi = 0;
};

Gershgorin gershgorin_bounds(const Eigen::SparseMatrix<double>& b) {
    Eigen::VectorXd diag = b.diagonal();
    Eigen::VectorXd radius = Eigen::VectorXd::Zero(b.rows());
    for (int col = 0; col < b.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(b, col); it; ++it)
            if (it.row() != col) radius[it.row()] += std::abs(it.value());
    Gershgorin g;
    g.lo = (diag - radius).minCoeff();
    g.hi = (diag + radius).maxCoeff();
    return g;
}

double pencil_residual(const Eigen::VectorXd& mass_root, const Eigen::VectorXd& r,
                       const Eigen::VectorXd& x) {
    // ||A v - lambda W v|| / ||W v|| for v = D^{-1/2} x equals
    // ||D^{1/2}(Bx - rho x)|| / ||D^{1/2} x||.
    return (mass_root.array() * r.array()).matrix().norm() /
           (mass_root.array() * x.array()).matrix().norm();
}

SpectralResult package(const DiscreteOperator& op, const Eigen::VectorXd& x, double rho,
                       double residual, int iterations, std::string method,
                       std::vector<double> history, double tol_used, std::uint64_t seed) {
    SpectralResult res;
    res.lambda0 = rho;
    const Eigen::VectorXd v = (op.mass.array().rsqrt() * x.array()).matrix();
    res.eigenvector = op.extend_nodes(v); // v' W v = x' x = 1
    res.residual = residual;
    res.iterations = iterations;
    res.method = std::move(method);
    res.rayleigh_history = std::move(history);
    res.tolerance_used = tol_used;
    res.seed = seed;
    return res;
}

Eigen::VectorXd random_unit(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = dist(rng);
    x.normalize();
    return x;
}

} // namespace

SpectralResult smallest_eigenpair(const DiscreteOperator& op, const EigOptions& opts) {
    require(opts.tol > 0, ErrorKind::Parameter, "tolerance must be positive");
    const int n = op.size();
    require(n >= 1, ErrorKind::Parameter, "empty operator");

    const Eigen::SparseMatrix<double> b = standard_form(op);
    const Eigen::VectorXd mass_root = op.mass.array().sqrt();
    const Gershgorin gersh = gershgorin_bounds(b);
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                         std::max({1.0, std::abs(gersh.lo), std::abs(gersh.hi)});
    const double tol_eff = std::max(opts.tol, floor);
    auto converged = [&](double res, double rho) { return res <= tol_eff * std::max(1.0, std::abs(rho)); };

    std::mt19937_64 rng(opts.seed);
    std::vector<double> history;

    if (n <= 2) {
        const Eigen::MatrixXd dense_b(b);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_b);
        const Eigen::VectorXd x = es.eigenvectors().col(0);
        const double rho = es.eigenvalues()[0];
        const Eigen::VectorXd r = b * x - rho * x;
        return package(op, x, rho, pencil_residual(mass_root, r, x), 1, "dense", {rho}, tol_eff,
                       opts.seed);
    }

    // Jacobi preconditioner shifted to stay positive.
    const double shift = gersh.lo - 1e-12 * (std::abs(gersh.lo) + 1.0) -
                         1e-8 * (gersh.hi - gersh.lo);
    const Eigen::VectorXd precond =
        (b.diagonal().array() - shift).inverse().matrix();

    // Locally optimal preconditioned CG on the Rayleigh quotient.
    Eigen::VectorXd x = random_unit(n, rng);
    Eigen::VectorXd bx = b * x;
    Eigen::VectorXd p;
    int it_count = 0;
    double rho = x.dot(bx);
    double best_res = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x = x;
    double best_rho = rho;

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        ++it_count;
        rho = x.dot(bx);
        history.push_back(rho);
        const Eigen::VectorXd r = bx - rho * x;
        const double res = pencil_residual(mass_root, r, x);
        if (res < best_res) {
            best_res = res;
            best_x = x;
            best_rho = rho;
        }
        if (converged(res, rho)) {
            return package(op, x, rho, res, it_count, "lobpcg", std::move(history), tol_eff,
                           opts.seed);
        }

        Eigen::VectorXd w = (precond.array() * r.array()).matrix();

        // Orthonormal basis [x, w, p] by modified Gram-Schmidt.
        std::vector<Eigen::VectorXd> basis;
        basis.push_back(x);
        for (const Eigen::VectorXd* cand : {&w, &p}) {
            if (cand->size() == 0) continue;
            Eigen::VectorXd u = *cand;
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& q : basis) u -= q.dot(u) * q;
            const double norm = u.norm();
            if (norm > 1e-10) basis.push_back(u / norm);
        }
        const int m = static_cast<int>(basis.size());
        if (m == 1) break; // stagnated; hand over to Lanczos

        Eigen::MatrixXd bs(n, m);
        for (int j = 0; j < m; ++j) bs.col(j) = b * basis[j];
        Eigen::MatrixXd g(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) g(i, j) = basis[static_cast<std::size_t>(i)].dot(bs.col(j));
        g = 0.5 * (g + g.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(g);
        const Eigen::VectorXd y = small.eigenvectors().col(0);

        Eigen::VectorXd x_new = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd bx_new = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd p_new = Eigen::VectorXd::Zero(n);
        for (int j = 0; j < m; ++j) {
            x_new += y[j] * basis[static_cast<std::size_t>(j)];
            bx_new += y[j] * bs.col(j);
            if (j > 0) p_new += y[j] * basis[static_cast<std::size_t>(j)];
        }
        const double nx = x_new.norm();
        x = x_new / nx;
        bx = bx_new / nx;
        p = p_new;
    }

    // Shift-free Lanczos with full reorthogonalization.
    {
        const int m_max = std::min(n, opts.lanczos_subspace);
        Eigen::VectorXd v = best_x;
        for (int restart = 0; restart < 8 && it_count < opts.max_iter; ++restart) {
            Eigen::MatrixXd V(n, m_max);
            Eigen::VectorXd alpha(m_max), beta(m_max);
            v.normalize();
            V.col(0) = v;
            int m = 0;
            for (int j = 0; j < m_max && it_count < opts.max_iter; ++j, ++it_count) {
                Eigen::VectorXd w = b * V.col(j);
                if (j > 0) w -= beta[j - 1] * V.col(j - 1);
                alpha[j] = V.col(j).dot(w);
                w -= alpha[j] * V.col(j);
                for (int pass = 0; pass < 2; ++pass)
                    w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
                m = j + 1;
                beta[j] = w.norm();
                if (beta[j] < 1e-14 * std::max(1.0, std::abs(gersh.hi))) break;
                if (j + 1 < m_max) V.col(j + 1) = w / beta[j];
            }
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                t(i, i) = alpha[i];
                if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
            Eigen::VectorXd x_ritz = V.leftCols(m) * es.eigenvectors().col(0);
            x_ritz.normalize();
            const double rho_ritz = x_ritz.dot(b * x_ritz);
            const Eigen::VectorXd r = b * x_ritz - rho_ritz * x_ritz;
            const double res = pencil_residual(mass_root, r, x_ritz);
            history.push_back(rho_ritz);
            if (res < best_res) {
                best_res = res;
                best_x = x_ritz;
                best_rho = rho_ritz;
            }
            if (converged(res, rho_ritz))
                return package(op, x_ritz, rho_ritz, res, it_count, "lanczos",
                               std::move(history), tol_eff, opts.seed);
            v = x_ritz;
        }
    }

    if (n <= opts.dense_cap) {
        const Eigen::MatrixXd dense_b(b);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_b);
        const Eigen::VectorXd x_d = es.eigenvectors().col(0);
        const double rho_d = es.eigenvalues()[0];
        const Eigen::VectorXd r = b * x_d - rho_d * x_d;
        const double res = pencil_residual(mass_root, r, x_d);
        history.push_back(rho_d);
        if (converged(res, rho_d))
            return package(op, x_d, rho_d, res, it_count + 1, "dense", std::move(history),
                           tol_eff, opts.seed);
    }

    throw ConvergenceError(
        "eigensolver failed to certify residual " + std::to_string(best_res) + " <= " +
            std::to_string(tol_eff) + " within " + std::to_string(opts.max_iter) + " iterations",
        package(op, best_x, best_rho, best_res, it_count, "lobpcg", std::move(history), tol_eff,
                opts.seed));
}

Eigen::VectorXd dense_reference(const DiscreteOperator& op, int cap) {
    require(op.size() <= cap, ErrorKind::Resource,
            "dense reference capped at " + std::to_string(cap) + " unknowns, operator has " +
                std::to_string(op.size()));
    const Eigen::MatrixXd dense_b(standard_form(op));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_b, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double rayleigh(const DiscreteOperator& op, const Eigen::VectorXd& trial) {
    const Eigen::VectorXd v = op.restrict_nodes(trial);
    const double denom = v.dot((op.mass.array() * v.array()).matrix());
    require(denom > 0, ErrorKind::Parameter, "trial vector vanishes on the active nodes");
    return v.dot(op.matrix * v) / denom;
}

} // namespace shrinker
