#include "shrinker/potential.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "shrinker/errors.hpp"

namespace shrinker {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int poly_degree(const std::vector<double>& c) {
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
        if (c[i] != 0.0) return i;
    return 0;
}

double poly_eval(const std::vector<double>& c, double x) {
    double v = 0;
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) v = v * x + c[i];
    return v;
}

// Global minimum of a bounded-below polynomial: evaluate at the real critical
// points (companion-matrix roots of the derivative).
double poly_lower_bound(const std::vector<double>& c) {
    const int d = poly_degree(c);
    if (d == 0) return c[0];
    if (d % 2 == 1 || c[d] < 0) return -kInf;
    std::vector<double> dc(d);
    for (int i = 1; i <= d; ++i) dc[i - 1] = i * c[i];
    const int dd = poly_degree(dc);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(dd, dd);
    for (int i = 0; i < dd - 1; ++i) companion(i + 1, i) = 1.0;
    for (int i = 0; i < dd; ++i) companion(i, dd - 1) = -dc[i] / dc[dd];
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
    double best = kInf;
    for (int i = 0; i < dd; ++i) {
        const auto z = es.eigenvalues()[i];
        if (std::abs(z.imag()) <= 1e-8 * (1.0 + std::abs(z.real())))
            best = std::min(best, poly_eval(c, z.real()));
    }
    return best - 1e-9 * (1.0 + std::abs(best));
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// Divergence probe along coordinate rays; a practical stand-in for the
// confinement limit when no symbolic form is available.
bool probed_confining(const Expr& e, int dims) {
    const double radii[] = {1, 4, 16, 64, 256, 1024};
    std::vector<double> coords(static_cast<std::size_t>(std::max(dims, 1)), 0.0);
    const double v0 = eval_expression(e, coords);
    for (int axis = 0; axis < std::max(dims, 1); ++axis) {
        for (double sign : {1.0, -1.0}) {
            double prev = -kInf;
            double last = 0;
            bool overflowed = false;
            for (double r : radii) {
                std::fill(coords.begin(), coords.end(), 0.0);
                coords[static_cast<std::size_t>(axis)] = sign * r;
                last = eval_expression(e, coords);
                if (std::isnan(last) || last == -kInf) return false;
                if (last == kInf) { // overflow counts as divergence
                    overflowed = true;
                    break;
                }
                if (r >= 16 && last <= prev) return false;
                prev = last;
            }
            if (!overflowed && last < v0 + 10.0) return false;
        }
    }
    return true;
}

} // namespace

Potential Potential::constant(double c) {
    Potential p;
    p.family_ = PotentialFamily::Constant;
    p.constant_ = c;
    p.confining_ = false;
    p.lower_bound_ = c;
    p.growth_degree_ = 0;
    p.digest_ = "const(" + fmt(c) + ")";
    return p;
}

Potential Potential::affine(Eigen::VectorXd slope, double c) {
    if (slope.size() == 0 || slope.isZero(0.0)) return constant(c);
    Potential p;
    p.family_ = PotentialFamily::Affine;
    p.slope_ = std::move(slope);
    p.constant_ = c;
    p.confining_ = false;
    p.lower_bound_ = -kInf;
    p.growth_degree_ = 1;
    std::ostringstream os;
    os << "affine([" << p.slope_.transpose() << "]," << c << ")";
    p.digest_ = os.str();
    return p;
}

Potential Potential::harmonic(Eigen::VectorXd center, double stiffness, double offset) {
    require(center.size() >= 1, ErrorKind::Parameter, "harmonic potential needs a center");
    if (stiffness == 0.0) return constant(offset);
    Potential p;
    p.family_ = PotentialFamily::Harmonic;
    p.center_ = std::move(center);
    p.stiffness_ = stiffness;
    p.constant_ = offset;
    p.confining_ = stiffness > 0;
    p.lower_bound_ = stiffness > 0 ? offset : -kInf;
    p.growth_degree_ = 2;
    std::ostringstream os;
    os << "harmonic(b=[" << p.center_.transpose() << "],k=" << stiffness << ",c=" << offset << ")";
    p.digest_ = os.str();
    return p;
}

Potential Potential::polynomial(std::vector<double> coeffs) {
    require(!coeffs.empty(), ErrorKind::Parameter, "polynomial potential needs coefficients");
    const int d = poly_degree(coeffs);
    if (d == 0) return constant(coeffs[0]);
    if (d == 1) return affine(Eigen::VectorXd::Constant(1, coeffs[1]), coeffs[0]);
    if (d == 2) {
        const double k = coeffs[2];
        const double b = coeffs[1] == 0.0 ? 0.0 : -coeffs[1] / (2.0 * k);
        const double c = coeffs[0] - coeffs[1] * coeffs[1] / (4.0 * k);
        return harmonic(Eigen::VectorXd::Constant(1, b), k, c);
    }
    Potential p;
    p.family_ = PotentialFamily::Polynomial;
    coeffs.resize(static_cast<std::size_t>(d) + 1);
    p.coeffs_ = std::move(coeffs);
    p.finish_polynomial();
    return p;
}

void Potential::finish_polynomial() {
    const int d = poly_degree(coeffs_);
    growth_degree_ = d;
    confining_ = (d >= 2) && (d % 2 == 0) && (coeffs_[static_cast<std::size_t>(d)] > 0);
    lower_bound_ = poly_lower_bound(coeffs_);
    std::ostringstream os;
    os << "poly([";
    for (std::size_t i = 0; i < coeffs_.size(); ++i) os << (i ? "," : "") << coeffs_[i];
    os << "])";
    digest_ = os.str();
}

Potential Potential::tabulated(Eigen::VectorXd node_values, bool confining) {
    require(node_values.size() > 0, ErrorKind::Parameter, "tabulated potential needs samples");
    Potential p;
    p.family_ = PotentialFamily::Tabulated;
    p.confining_ = confining;
    p.lower_bound_ = node_values.minCoeff();
    p.growth_degree_ = -1;
    p.digest_ = "tab(N=" + std::to_string(node_values.size()) + ")";
    p.table_ = std::move(node_values);
    return p;
}

Potential Potential::expression(const std::string& source) {
    ExprPtr ast = parse_expression(source);
    if (auto coeffs = extract_polynomial(*ast)) {
        Potential p = polynomial(*coeffs);
        p.source_ = source;
        return p;
    }
    Potential p;
    p.family_ = PotentialFamily::Expression;
    p.expr_ = ast;
    p.source_ = source;
    p.confining_ = probed_confining(*ast, coordinate_count(*ast));
    p.lower_bound_ = -kInf;
    p.growth_degree_ = -1;
    p.digest_ = "expr(" + source + ")";
    return p;
}

double Potential::value(const ModelPoint& p) const {
    switch (family_) {
        case PotentialFamily::Constant: return constant_;
        case PotentialFamily::Affine: {
            require(p.euclid.size() == slope_.size(), ErrorKind::Parameter,
                    "affine potential dimension mismatch");
            return slope_.dot(p.euclid) + constant_;
        }
        case PotentialFamily::Harmonic: {
            require(p.euclid.size() == center_.size(), ErrorKind::Parameter,
                    "harmonic potential dimension mismatch");
            return stiffness_ * (p.euclid - center_).squaredNorm() + constant_;
        }
        case PotentialFamily::Polynomial: {
            require(p.euclid.size() == 1, ErrorKind::Parameter,
                    "polynomial potentials act on one flat coordinate");
            return poly_eval(coeffs_, p.euclid[0]);
        }
        case PotentialFamily::Expression: {
            std::vector<double> coords(p.euclid.data(), p.euclid.data() + p.euclid.size());
            return eval_expression(*expr_, coords);
        }
        case PotentialFamily::Tabulated:
            fail(ErrorKind::Lookup, "tabulated potentials are indexed by grid node, not point");
    }
    return 0;
}

Eigen::VectorXd Potential::sample(const Discretization& disc) const {
    const int n = disc.n_nodes();
    if (family_ == PotentialFamily::Tabulated) {
        require(table_.size() == n, ErrorKind::Lookup,
                "tabulated potential has " + std::to_string(table_.size()) +
                    " samples, grid has " + std::to_string(n) + " nodes");
        return table_;
    }
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = value(disc.point(i));
    return v;
}

Potential Potential::shifted(double c) const {
    if (c == 0.0) return *this;
    switch (family_) {
        case PotentialFamily::Constant: return constant(constant_ + c);
        case PotentialFamily::Affine: return affine(slope_, constant_ + c);
        case PotentialFamily::Harmonic: return harmonic(center_, stiffness_, constant_ + c);
        case PotentialFamily::Polynomial: {
            std::vector<double> cs = coeffs_;
            cs[0] += c;
            return polynomial(std::move(cs));
        }
        case PotentialFamily::Tabulated: {
            Potential p = tabulated(table_.array() + c, confining_);
            return p;
        }
        case PotentialFamily::Expression: {
            std::ostringstream os;
            os << "(" << source_ << ")+(" << c << ")";
            return expression(os.str());
        }
    }
    return *this;
}

Potential Potential::blend(const Potential& a, const Potential& b, double t) {
    auto coeffs_of = [](const Potential& p) -> std::optional<std::vector<double>> {
        switch (p.family_) {
            case PotentialFamily::Constant: return std::vector<double>{p.constant_};
            case PotentialFamily::Affine:
                if (p.slope_.size() != 1) return std::nullopt;
                return std::vector<double>{p.constant_, p.slope_[0]};
            case PotentialFamily::Harmonic:
                if (p.center_.size() != 1) return std::nullopt;
                return std::vector<double>{
                    p.constant_ + p.stiffness_ * p.center_[0] * p.center_[0],
                    -2.0 * p.stiffness_ * p.center_[0], p.stiffness_};
            case PotentialFamily::Polynomial: return p.coeffs_;
            default: return std::nullopt;
        }
    };
    if (auto ca = coeffs_of(a)) {
        if (auto cb = coeffs_of(b)) {
            std::vector<double> c(std::max(ca->size(), cb->size()), 0.0);
            for (std::size_t i = 0; i < ca->size(); ++i) c[i] += (1.0 - t) * (*ca)[i];
            for (std::size_t i = 0; i < cb->size(); ++i) c[i] += t * (*cb)[i];
            return polynomial(std::move(c));
        }
    }
    if (a.family_ == PotentialFamily::Tabulated && b.family_ == PotentialFamily::Tabulated) {
        require(a.table_.size() == b.table_.size(), ErrorKind::Parameter,
                "tabulated blend needs matching grids");
        return tabulated((1.0 - t) * a.table_ + t * b.table_, a.confining_ && b.confining_);
    }
    if (!a.source_.empty() && !b.source_.empty()) {
        std::ostringstream os;
        os << "(" << 1.0 - t << ")*(" << a.source_ << ")+(" << t << ")*(" << b.source_ << ")";
        return expression(os.str());
    }
    fail(ErrorKind::Parameter,
         "cannot blend potentials " + a.digest() + " and " + b.digest());
}

} // namespace shrinker
