#include "shrinker/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "shrinker/errors.hpp"

namespace shrinker {

namespace {

constexpr double kPi = std::numbers::pi;

double log_unit_sphere_area(int m) {
    // ln(2 pi^{(m+1)/2} / Gamma((m+1)/2))
    return std::log(2.0) + 0.5 * (m + 1) * std::log(kPi) - std::lgamma(0.5 * (m + 1));
}

} // namespace

double unit_sphere_area(int m) {
    require(m >= 1, ErrorKind::Parameter, "sphere dimension must be >= 1");
    return std::exp(log_unit_sphere_area(m));
}

double sphere_volume(int m, double r) { return unit_sphere_area(m) * std::pow(r, m); }

ModelShrinker ModelShrinker::gaussian(int n, double tau) {
    require(n >= 1, ErrorKind::Parameter, "gaussian model needs n >= 1");
    require(tau > 0, ErrorKind::Parameter, "tau must be positive");
    ModelShrinker s;
    s.kind_ = ModelKind::Gaussian;
    s.n_ = n;
    s.k_ = n;
    s.tau_ = tau;
    s.R_ = 0;
    // The Gaussian weight (4 pi tau)^{-n/2} e^{-|x|^2/4tau} already integrates
    // to one, so no offset is needed; mu_s = 0.
    s.f_offset_ = 0;
    s.mu_s_ = 0;
    return s;
}

ModelShrinker ModelShrinker::sphere(int n, double tau) {
    require(n >= 2, ErrorKind::Parameter, "sphere model needs n >= 2");
    require(tau > 0, ErrorKind::Parameter, "tau must be positive");
    ModelShrinker s;
    s.kind_ = ModelKind::Sphere;
    s.n_ = n;
    s.m_ = n;
    s.tau_ = tau;
    s.radius_ = std::sqrt(2.0 * (n - 1) * tau);
    s.R_ = n / (2.0 * tau); // = n(n-1)/r^2
    // Unit weighted volume: e^{-f_offset} (4 pi tau)^{-n/2} Vol(S^n(r)) = 1.
    const double log_vol = log_unit_sphere_area(n) + n * std::log(s.radius_);
    s.f_offset_ = log_vol - 0.5 * n * std::log(4.0 * kPi * tau);
    s.mu_s_ = s.f_offset_ - tau * s.R_; // f - tau(R + |grad f|^2) with f constant
    return s;
}

ModelShrinker ModelShrinker::cylinder(int m, int k, double tau) {
    require(m >= 2, ErrorKind::Parameter, "cylinder sphere factor needs m >= 2");
    require(k >= 1, ErrorKind::Parameter, "cylinder flat factor needs k >= 1");
    require(tau > 0, ErrorKind::Parameter, "tau must be positive");
    ModelShrinker s;
    s.kind_ = ModelKind::Cylinder;
    s.n_ = m + k;
    s.m_ = m;
    s.k_ = k;
    s.tau_ = tau;
    s.radius_ = std::sqrt(2.0 * (m - 1) * tau);
    s.R_ = m / (2.0 * tau);
    // The R^k Gaussian factor integrates to (4 pi tau)^{k/2}; the offset
    // absorbs the sphere factor.
    const double log_vol_sphere = log_unit_sphere_area(m) + m * std::log(s.radius_);
    s.f_offset_ = log_vol_sphere - 0.5 * m * std::log(4.0 * kPi * tau);
    s.mu_s_ = s.f_offset_ - 0.5 * m; // evaluate f - tau(R + |grad f|^2) at y = 0
    return s;
}

void ModelShrinker::check_point(const ModelPoint& p) const {
    const int want_euclid = k_;
    const int want_sphere = (m_ > 0) ? m_ + 1 : 0;
    require(p.euclid.size() == want_euclid, ErrorKind::Domain,
            digest() + ": point has " + std::to_string(p.euclid.size()) +
                " euclidean coordinates, chart needs " + std::to_string(want_euclid));
    require(p.sphere_dir.size() == want_sphere, ErrorKind::Domain,
            digest() + ": point has " + std::to_string(p.sphere_dir.size()) +
                " sphere components, chart needs " + std::to_string(want_sphere));
    if (want_sphere > 0) {
        require(std::abs(p.sphere_dir.norm() - 1.0) < 1e-8, ErrorKind::Domain,
                digest() + ": sphere direction is not a unit vector");
    }
}

GeometryValues ModelShrinker::geometry(const ModelPoint& p) const {
    check_point(p);
    GeometryValues g;
    g.scalar_curvature = R_;
    if (k_ > 0) {
        const double y2 = p.euclid.squaredNorm();
        g.f = y2 / (4.0 * tau_) + f_offset_;
        g.grad_f_sq = y2 / (4.0 * tau_ * tau_);
        g.laplacian_f = k_ / (2.0 * tau_);
    } else {
        g.f = f_offset_;
        g.grad_f_sq = 0;
        g.laplacian_f = 0;
    }
    return g;
}

double ModelShrinker::weighted_scalar_curvature(const ModelPoint& p) const {
    const GeometryValues g = geometry(p);
    return g.scalar_curvature + 2.0 * g.laplacian_f - g.grad_f_sq;
}

double ModelShrinker::measure_density(const ModelPoint& p) const {
    const GeometryValues g = geometry(p);
    return std::exp(-0.5 * n_ * std::log(4.0 * kPi * tau_) - g.f);
}

std::string ModelShrinker::digest() const {
    std::ostringstream os;
    switch (kind_) {
        case ModelKind::Gaussian: os << "gaussian(n=" << n_; break;
        case ModelKind::Sphere: os << "sphere(n=" << n_; break;
        case ModelKind::Cylinder: os << "cylinder(m=" << m_ << ",k=" << k_; break;
    }
    os << ",tau=" << tau_ << ")";
    return os.str();
}

} // namespace shrinker
