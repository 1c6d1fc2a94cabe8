#pragma once

#include <Eigen/Core>
#include <string>

namespace shrinker {

enum class ModelKind { Gaussian, Sphere, Cylinder };

// A point in a model chart. Gaussian points carry only Euclidean coordinates,
// sphere points a unit vector in R^{n+1}, cylinder points both.
struct ModelPoint {
    Eigen::VectorXd sphere_dir; // empty unless the model has a sphere factor
    Eigen::VectorXd euclid;     // empty unless the model has flat directions

    static ModelPoint at_euclid(Eigen::VectorXd x) { return {Eigen::VectorXd(), std::move(x)}; }
    static ModelPoint on_sphere(Eigen::VectorXd dir) { return {std::move(dir), Eigen::VectorXd()}; }
};

struct GeometryValues {
    double f = 0;                // potential function
    double grad_f_sq = 0;        // |grad f|^2
    double laplacian_f = 0;      // Laplace-Beltrami of f
    double scalar_curvature = 0; // R
};

// Closed-form model geometries: Gaussian R^n, round sphere S^n, and the
// cylinder S^m(r) x R^k. The potential offset is chosen analytically so that
// (4 pi tau)^{-n/2} e^{-f} dv is a probability measure.
class ModelShrinker {
public:
    static ModelShrinker gaussian(int n, double tau);
    static ModelShrinker sphere(int n, double tau);
    static ModelShrinker cylinder(int m, int k, double tau);

    ModelKind kind() const { return kind_; }
    int dim() const { return n_; }           // total dimension n
    int sphere_dim() const { return m_; }    // m (0 for Gaussian)
    int euclid_dim() const { return k_; }    // flat directions (0 for spheres)
    double tau() const { return tau_; }
    double sphere_radius() const { return radius_; } // sqrt(2(m-1) tau)
    double f_offset() const { return f_offset_; }
    bool compact() const { return kind_ == ModelKind::Sphere; }

    // Shrinker entropy from the normalized potential, f - tau (R + |grad f|^2).
    double entropy() const { return mu_s_; }
    // tau (R + |grad f|^2) - f, constant over the model.
    double hamilton_constant() const { return -f_offset_ + tau_ * scalar_curvature(); }

    double scalar_curvature() const { return R_; } // constant on all three families

    GeometryValues geometry(const ModelPoint& p) const;
    // R_f = R + 2 lap f - |grad f|^2 at a point.
    double weighted_scalar_curvature(const ModelPoint& p) const;
    // (4 pi tau)^{-n/2} e^{-f(p)}
    double measure_density(const ModelPoint& p) const;

    std::string digest() const;

private:
    ModelShrinker() = default;
    void check_point(const ModelPoint& p) const;

    ModelKind kind_ = ModelKind::Gaussian;
    int n_ = 0, m_ = 0, k_ = 0;
    double tau_ = 0, radius_ = 0, R_ = 0, f_offset_ = 0, mu_s_ = 0;
};

// Area of the unit m-sphere, 2 pi^{(m+1)/2} / Gamma((m+1)/2).
double unit_sphere_area(int m);

// Volume of the round m-sphere of radius r.
double sphere_volume(int m, double r);

} // namespace shrinker
