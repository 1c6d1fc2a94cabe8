#include "shrinker/entropy.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "shrinker/errors.hpp"
#include "shrinker/operators.hpp"

namespace shrinker {

namespace {

constexpr double kPi = std::numbers::pi;

double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; } // 0 ln 0 = 0

} // namespace

double shrinker_entropy(const ModelShrinker& model) {
    switch (model.kind()) {
        case ModelKind::Gaussian: return 0.0;
        case ModelKind::Sphere: {
            const int n = model.dim();
            const double R = model.scalar_curvature();
            const double vol = sphere_volume(n, model.sphere_radius());
            return std::log(vol) - 0.5 * n * (1.0 + std::log(2.0 * kPi * n / R));
        }
        case ModelKind::Cylinder: {
            const int m = model.sphere_dim();
            return std::log(unit_sphere_area(m)) -
                   0.5 * m * (std::log(2.0 * kPi / (m - 1)) + 1.0);
        }
    }
    return 0.0;
}

FunctionalReport w_functional(const Discretization& disc, const ModelShrinker& model,
                              const Eigen::VectorXd& f_samples, double tau, double norm_tol) {
    check_compatible(disc, model);
    require(tau > 0, ErrorKind::Parameter, "tau must be positive");
    require(f_samples.size() == disc.n_nodes(), ErrorKind::Parameter,
            "f sample vector does not match node count");
    const int n = model.dim();
    const double log_norm = -0.5 * n * std::log(4.0 * kPi * tau);
    const Eigen::VectorXd density = (f_samples.array() * -1.0 + log_norm).exp();

    const double total = integrate(disc, density);
    require(std::abs(total - 1.0) <= norm_tol, ErrorKind::Constraint,
            "weighted volume of f is " + std::to_string(total) + ", not 1");

    const Eigen::MatrixXd grad = node_gradients(disc, f_samples);
    const Eigen::VectorXd grad_sq = grad.rowwise().squaredNorm();
    const double R = model.scalar_curvature();

    FunctionalReport rep;
    rep.name = "w_functional";
    double dirichlet = 0, curvature = 0, potential = 0, constant = 0;
    for (int i = 0; i < disc.n_nodes(); ++i) {
        const double dm = disc.weights[i] * density[i];
        dirichlet += dm * tau * grad_sq[i];
        curvature += dm * tau * R;
        potential += dm * f_samples[i];
        constant -= dm * n;
    }
    rep.terms = {{"dirichlet", dirichlet},
                 {"curvature", curvature},
                 {"potential", potential},
                 {"constant", constant}};
    rep.value = dirichlet + curvature + potential + constant;
    std::ostringstream os;
    os << model.digest() << "|" << disc.digest() << "|tau=" << tau;
    rep.inputs_digest = os.str();
    return rep;
}

FunctionalReport k_functional(const Discretization& disc, const ModelShrinker& model,
                              const Eigen::VectorXd& phi_samples, double tau, double norm_tol) {
    check_compatible(disc, model);
    require(tau > 0, ErrorKind::Parameter, "tau must be positive");
    require(phi_samples.size() == disc.n_nodes(), ErrorKind::Parameter,
            "phi sample vector does not match node count");
    const int n = model.dim();
    require(phi_samples.minCoeff() >= 0.0, ErrorKind::Constraint, "phi must be nonnegative");

    const Eigen::VectorXd phi_sq = phi_samples.array().square();
    const double total = integrate(disc, phi_sq);
    require(std::abs(total - 1.0) <= norm_tol, ErrorKind::Constraint,
            "L2 norm of phi is " + std::to_string(total) + ", not 1");

    // Dirichlet energy through the logarithmic gradient when phi is strictly
    // positive, which makes the potential-form identity exact on the grid;
    // densities with zeros fall back to the direct gradient.
    const bool positive = phi_samples.minCoeff() > 0.0;
    Eigen::VectorXd dirichlet_density(disc.n_nodes());
    if (positive) {
        const Eigen::VectorXd log_phi_sq = phi_sq.array().log();
        const Eigen::MatrixXd grad = node_gradients(disc, log_phi_sq);
        dirichlet_density = tau * grad.rowwise().squaredNorm().array() * phi_sq.array();
    } else {
        const Eigen::MatrixXd grad = node_gradients(disc, phi_samples);
        dirichlet_density = 4.0 * tau * grad.rowwise().squaredNorm().array();
    }

    const double R = model.scalar_curvature();
    const double norm_const = n * (1.0 + 0.5 * std::log(4.0 * kPi * tau));

    FunctionalReport rep;
    rep.name = "k_functional";
    double dirichlet = 0, curvature = 0, entropy_term = 0, constant = 0;
    for (int i = 0; i < disc.n_nodes(); ++i) {
        const double w = disc.weights[i];
        dirichlet += w * dirichlet_density[i];
        curvature += w * tau * R * phi_sq[i];
        entropy_term -= w * xlogx(phi_sq[i]);
        constant -= w * norm_const * phi_sq[i];
    }
    rep.terms = {{"dirichlet", dirichlet},
                 {"curvature", curvature},
                 {"entropy", entropy_term},
                 {"constant", constant}};
    rep.value = dirichlet + curvature + entropy_term + constant;
    std::ostringstream os;
    os << model.digest() << "|" << disc.digest() << "|tau=" << tau;
    rep.inputs_digest = os.str();
    return rep;
}

GibbsResult gibbs_value(const Eigen::VectorXd& mu_weights, const Eigen::VectorXd& H, double t) {
    require(t > 0, ErrorKind::Parameter, "Gibbs temperature parameter must be positive");
    require(mu_weights.size() == H.size(), ErrorKind::Parameter,
            "measure and energy vectors differ in length");
    require(mu_weights.size() > 0, ErrorKind::Parameter, "empty measure");
    require(mu_weights.minCoeff() >= 0, ErrorKind::Parameter, "measure weights must be >= 0");
    require(mu_weights.maxCoeff() > 0, ErrorKind::Parameter, "measure must not vanish");

    // ln sum mu_i e^{-t H_i}, max-shifted.
    const Eigen::ArrayXd exponent = -t * H.array();
    double shift = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < H.size(); ++i)
        if (mu_weights[i] > 0) shift = std::max(shift, exponent[i]);
    double acc = 0;
    for (int i = 0; i < H.size(); ++i)
        if (mu_weights[i] > 0) acc += mu_weights[i] * std::exp(exponent[i] - shift);
    require(std::isfinite(shift) && acc > 0 && std::isfinite(acc), ErrorKind::Parameter,
            "partition sum is not finite and positive");
    const double lse = shift + std::log(acc);

    GibbsResult out;
    out.value = -lse;
    out.density = (exponent - lse).exp();
    return out;
}

double log_sobolev_deficit(const Discretization& disc, const ModelShrinker& model,
                           const Eigen::VectorXd& u_samples, double norm_tol) {
    check_compatible(disc, model);
    require(u_samples.size() == disc.n_nodes(), ErrorKind::Parameter,
            "u sample vector does not match node count");
    const double tau = model.tau();
    const GeometrySamples geo = sample_geometry(disc, model);
    const Eigen::VectorXd u_sq = u_samples.array().square();
    const Eigen::ArrayXd dmu = disc.weights.array() * geo.density.array();

    const double total = (dmu * u_sq.array()).sum();
    require(std::abs(total - 1.0) <= norm_tol, ErrorKind::Constraint,
            "weighted L2 norm of u is " + std::to_string(total) + ", not 1");

    const bool positive = u_samples.minCoeff() > 0.0 || u_samples.maxCoeff() < 0.0;
    double dirichlet = 0;
    if (positive) {
        const Eigen::VectorXd log_u_sq = u_sq.array().log();
        const Eigen::MatrixXd grad = node_gradients(disc, log_u_sq);
        dirichlet = tau * (dmu * grad.rowwise().squaredNorm().array() * u_sq.array()).sum();
    } else {
        const Eigen::MatrixXd grad = node_gradients(disc, u_samples);
        dirichlet = 4.0 * tau * (dmu * grad.rowwise().squaredNorm().array()).sum();
    }
    double entropy_term = 0;
    for (int i = 0; i < disc.n_nodes(); ++i) entropy_term += dmu[i] * xlogx(u_sq[i]);
    return dirichlet - entropy_term;
}

double euler_lagrange_residual(const Discretization& disc, const ModelShrinker& model,
                               const Eigen::VectorXd& f_samples, double tau) {
    check_compatible(disc, model);
    require(tau > 0, ErrorKind::Parameter, "tau must be positive");
    require(f_samples.size() == disc.n_nodes(), ErrorKind::Parameter,
            "f sample vector does not match node count");
    const double R = model.scalar_curvature();
    const Eigen::VectorXd lap = node_laplacian(disc, f_samples);
    const Eigen::VectorXd grad_sq = node_gradients(disc, f_samples).rowwise().squaredNorm();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < disc.n_nodes(); ++i) {
        if (!disc.interior[static_cast<std::size_t>(i)]) continue;
        const double v = tau * (R + 2.0 * lap[i] - grad_sq[i]) + f_samples[i] - model.dim();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    require(hi >= lo, ErrorKind::Parameter, "grid has no interior nodes");
    return hi - lo;
}

} // namespace shrinker
