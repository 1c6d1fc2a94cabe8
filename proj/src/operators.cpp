#include "shrinker/operators.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "shrinker/errors.hpp"

namespace shrinker {

namespace {

std::vector<int> active_set(const Discretization& disc) {
    std::vector<int> active;
    active.reserve(disc.interior.size());
    for (int i = 0; i < disc.n_nodes(); ++i)
        if (disc.interior[static_cast<std::size_t>(i)]) active.push_back(i);
    return active;
}

// Restriction of a full-node sparse matrix to the active set.
Eigen::SparseMatrix<double> restrict_matrix(const Eigen::SparseMatrix<double>& m,
                                            const std::vector<int>& active, int n_nodes) {
    std::vector<int> pos(static_cast<std::size_t>(n_nodes), -1);
    for (std::size_t a = 0; a < active.size(); ++a) pos[static_cast<std::size_t>(active[a])] =
        static_cast<int>(a);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(m.nonZeros()));
    for (int col = 0; col < m.outerSize(); ++col) {
        const int jc = pos[static_cast<std::size_t>(col)];
        if (jc < 0) continue;
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it) {
            const int ir = pos[static_cast<std::size_t>(it.row())];
            if (ir >= 0) trips.emplace_back(ir, jc, it.value());
        }
    }
    Eigen::SparseMatrix<double> out(static_cast<int>(active.size()),
                                    static_cast<int>(active.size()));
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

void add_diagonal(Eigen::SparseMatrix<double>& m, const Eigen::VectorXd& d) {
    Eigen::SparseMatrix<double> diag(static_cast<int>(d.size()), static_cast<int>(d.size()));
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(d.size()));
    for (int i = 0; i < d.size(); ++i) trips.emplace_back(i, i, d[i]);
    diag.setFromTriplets(trips.begin(), trips.end());
    m = (m + diag).eval();
}

} // namespace

Eigen::VectorXd DiscreteOperator::restrict_nodes(const Eigen::VectorXd& full) const {
    require(full.size() == node_count, ErrorKind::Parameter, "node vector length mismatch");
    Eigen::VectorXd v(size());
    for (int a = 0; a < size(); ++a) v[a] = full[active_nodes[static_cast<std::size_t>(a)]];
    return v;
}

Eigen::VectorXd DiscreteOperator::extend_nodes(const Eigen::VectorXd& active) const {
    require(active.size() == size(), ErrorKind::Parameter, "active vector length mismatch");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(node_count);
    for (int a = 0; a < size(); ++a) v[active_nodes[static_cast<std::size_t>(a)]] = active[a];
    return v;
}

void check_compatible(const Discretization& disc, const ModelShrinker& model) {
    switch (model.kind()) {
        case ModelKind::Gaussian:
            require(disc.sphere_cols == 0 && disc.euclid_cols == model.euclid_dim(),
                    ErrorKind::Parameter,
                    "grid " + disc.digest() + " does not realize " + model.digest());
            return;
        case ModelKind::Sphere:
            require(model.sphere_dim() == 2, ErrorKind::Capability,
                    "only S^2 spheres are meshed; " + model.digest() + " is closed-form only");
            require(disc.kind == GridKind::Sphere && disc.euclid_cols == 0, ErrorKind::Parameter,
                    "grid " + disc.digest() + " does not realize " + model.digest());
            break;
        case ModelKind::Cylinder:
            require(model.sphere_dim() == 2, ErrorKind::Capability,
                    "only S^2 x R^k cylinders are meshed");
            require(disc.sphere_cols == 3 && disc.euclid_cols == model.euclid_dim(),
                    ErrorKind::Parameter,
                    "grid " + disc.digest() + " does not realize " + model.digest());
            break;
    }
    require(std::abs(disc.sphere_radius - model.sphere_radius()) <=
                1e-12 * std::max(1.0, model.sphere_radius()),
            ErrorKind::Parameter, "mesh radius does not match the model shrinker");
}

GeometrySamples sample_geometry(const Discretization& disc, const ModelShrinker& model) {
    check_compatible(disc, model);
    const int n = disc.n_nodes();
    GeometrySamples g;
    g.f.resize(n);
    g.grad_f_sq.resize(n);
    g.laplacian_f.resize(n);
    g.scalar_curvature.resize(n);
    g.weighted_curvature.resize(n);
    g.density.resize(n);
    for (int i = 0; i < n; ++i) {
        const GeometryValues v = model.geometry(disc.point(i));
        g.f[i] = v.f;
        g.grad_f_sq[i] = v.grad_f_sq;
        g.laplacian_f[i] = v.laplacian_f;
        g.scalar_curvature[i] = v.scalar_curvature;
        g.weighted_curvature[i] = v.scalar_curvature + 2.0 * v.laplacian_f - v.grad_f_sq;
        g.density[i] = std::exp(-0.5 * model.dim() * std::log(4.0 * M_PI * model.tau()) - v.f);
    }
    return g;
}

DiscreteOperator assemble_schrodinger(const Discretization& disc, const ModelShrinker& model,
                                      const Potential& potential) {
    check_compatible(disc, model);
    if (!disc.closed) {
        require(potential.confining(), ErrorKind::Refusal,
                "potential " + potential.digest() +
                    " is not confining; the Dirichlet-truncated bound is not reliable");
    }
    const Eigen::VectorXd v = potential.sample(disc);
    const double quarter_R = 0.25 * model.scalar_curvature();

    DiscreteOperator op;
    op.active_nodes = active_set(disc);
    op.node_count = disc.n_nodes();
    op.name = "schrodinger";
    op.geometry_digest = disc.digest();
    op.potential_digest = potential.digest();
    op.matrix = restrict_matrix(disc.stiffness, op.active_nodes, disc.n_nodes());
    op.mass.resize(static_cast<int>(op.active_nodes.size()));
    Eigen::VectorXd diag(op.mass.size());
    for (int a = 0; a < op.size(); ++a) {
        const int i = op.active_nodes[static_cast<std::size_t>(a)];
        op.mass[a] = disc.weights[i];
        diag[a] = disc.weights[i] * (quarter_R + v[i]);
    }
    add_diagonal(op.matrix, diag);
    return op;
}

DriftedAssembly assemble_drifted(const Discretization& disc, const ModelShrinker& model,
                                 const Potential& potential) {
    check_compatible(disc, model);
    if (!disc.closed) {
        // Affine potentials are admissible: the conjugated effective potential
        // V + f/(4 tau) - (n + mu_s)/(4 tau) is confining whenever f dominates,
        // which holds on every model with flat directions.
        const bool admissible = potential.confining() ||
                                (potential.growth_degree() >= 0 && potential.growth_degree() <= 1);
        require(admissible, ErrorKind::Refusal,
                "potential " + potential.digest() +
                    " has no confining conjugated form on a truncated grid");
    }

    const Eigen::VectorXd v = potential.sample(disc);
    const GeometrySamples geo = sample_geometry(disc, model);
    const Eigen::VectorXd droot = geo.density.array().sqrt();

    const int n = disc.n_nodes();
    const auto active = active_set(disc);

    // Weighted-measure stiffness: geometric-mean edge conductances
    // -S_ij d_i d_j with row sums zero, so constants stay in the kernel.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(disc.stiffness.nonZeros()));
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(n);
    for (int col = 0; col < disc.stiffness.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(disc.stiffness, col); it; ++it) {
            if (it.row() == col) continue;
            const double val = it.value() * droot[it.row()] * droot[col];
            trips.emplace_back(static_cast<int>(it.row()), col, val);
            rowsum[it.row()] += val;
        }
    }
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, -rowsum[i]);
    Eigen::SparseMatrix<double> weighted_stiffness(n, n);
    weighted_stiffness.setFromTriplets(trips.begin(), trips.end());

    DriftedAssembly out;
    out.weighted.active_nodes = active;
    out.weighted.node_count = n;
    out.weighted.weighted_measure = true;
    out.weighted.name = "drifted-weighted";
    out.weighted.geometry_digest = disc.digest();
    out.weighted.potential_digest = potential.digest();
    out.weighted.matrix = restrict_matrix(weighted_stiffness, active, n);
    out.weighted.mass.resize(static_cast<int>(active.size()));
    Eigen::VectorXd diag_w(out.weighted.mass.size());
    for (int a = 0; a < out.weighted.size(); ++a) {
        const int i = active[static_cast<std::size_t>(a)];
        const double wm = disc.weights[i] * geo.density[i];
        out.weighted.mass[a] = wm;
        diag_w[a] = wm * v[i];
    }
    add_diagonal(out.weighted.matrix, diag_w);

    // Exact diagonal conjugate: entries of the weighted pencil divided by
    // d_i d_j, masses by d_i^2. Discretizes -Laplace + R/4 + (V - R_f/4).
    out.conjugated = out.weighted;
    out.conjugated.weighted_measure = false;
    out.conjugated.name = "drifted-conjugated";
    for (int col = 0; col < out.conjugated.matrix.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(out.conjugated.matrix, col); it; ++it) {
            const int gi = active[static_cast<std::size_t>(it.row())];
            const int gj = active[static_cast<std::size_t>(col)];
            it.valueRef() /= droot[gi] * droot[gj];
        }
    }
    for (int a = 0; a < out.conjugated.size(); ++a) {
        const int i = active[static_cast<std::size_t>(a)];
        out.conjugated.mass[a] = disc.weights[i];
    }
    return out;
}

double integrate(const Discretization& disc, const Eigen::VectorXd& samples) {
    require(samples.size() == disc.n_nodes(), ErrorKind::Parameter,
            "sample vector does not match node count");
    return disc.weights.dot(samples);
}

double integrate_weighted(const Discretization& disc, const ModelShrinker& model,
                          const Eigen::VectorXd& samples) {
    require(samples.size() == disc.n_nodes(), ErrorKind::Parameter,
            "sample vector does not match node count");
    const GeometrySamples geo = sample_geometry(disc, model);
    return (disc.weights.array() * geo.density.array() * samples.array()).sum();
}

namespace {

double log_sum_exp(const Eigen::VectorXd& log_weights, const Eigen::VectorXd& exponents) {
    const double shift = exponents.maxCoeff();
    require(std::isfinite(shift), ErrorKind::Parameter, "non-finite exponent in quadrature");
    double acc = 0;
    for (int i = 0; i < exponents.size(); ++i)
        acc += std::exp(log_weights[i] + exponents[i] - shift);
    require(acc > 0, ErrorKind::Parameter, "quadrature of exponential vanished");
    return shift + std::log(acc);
}

} // namespace

double log_integral_exp(const Discretization& disc, const Eigen::VectorXd& exponents) {
    require(exponents.size() == disc.n_nodes(), ErrorKind::Parameter,
            "sample vector does not match node count");
    return log_sum_exp(disc.weights.array().log(), exponents);
}

double log_integral_exp_weighted(const Discretization& disc, const ModelShrinker& model,
                                 const Eigen::VectorXd& exponents) {
    require(exponents.size() == disc.n_nodes(), ErrorKind::Parameter,
            "sample vector does not match node count");
    const GeometrySamples geo = sample_geometry(disc, model);
    return log_sum_exp((disc.weights.array() * geo.density.array()).log(), exponents);
}

void write_matrix_market(const std::string& path, const Eigen::SparseMatrix<double>& m) {
    std::ofstream out(path);
    require(out.good(), ErrorKind::Io, "cannot open " + path);
    long nnz_lower = 0;
    for (int col = 0; col < m.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it)
            if (it.row() >= col) ++nnz_lower;
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << m.rows() << " " << m.cols() << " " << nnz_lower << "\n";
    char buf[96];
    for (int col = 0; col < m.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it) {
            if (it.row() < col) continue;
            std::snprintf(buf, sizeof buf, "%ld %d %.17g\n", static_cast<long>(it.row()) + 1,
                          col + 1, it.value());
            out << buf;
        }
    }
    require(out.good(), ErrorKind::Io, "write failed for " + path);
}

void write_nodes_csv(const std::string& path, const Discretization& disc) {
    std::ofstream out(path);
    require(out.good(), ErrorKind::Io, "cannot open " + path);
    const int cols = static_cast<int>(disc.coords.cols());
    out << "node_id";
    for (int c = 0; c < cols; ++c) out << ",x" << (c + 1);
    out << "\n";
    char buf[64];
    for (int i = 0; i < disc.n_nodes(); ++i) {
        out << i;
        for (int c = 0; c < cols; ++c) {
            std::snprintf(buf, sizeof buf, ",%.17g", disc.coords(i, c));
            out << buf;
        }
        out << "\n";
    }
    require(out.good(), ErrorKind::Io, "write failed for " + path);
}

} // namespace shrinker
