#include "shrinker/grid.hpp"

#include <Eigen/Geometry>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "shrinker/errors.hpp"

namespace shrinker {

namespace {

// Leaf axes of a (possibly nested) product in node-index order.
struct FlatAxis {
    const Discretization* leaf;
    int stride;
    int count;
    int col0; // first coords column of this leaf
};

void flatten_axes(const Discretization& disc, int stride, int col0, std::vector<FlatAxis>& out) {
    if (disc.kind == GridKind::Product) {
        const auto& a = *disc.factor_a;
        const auto& b = *disc.factor_b;
        flatten_axes(a, stride * b.n_nodes(), col0, out);
        flatten_axes(b, stride, col0 + static_cast<int>(a.coords.cols()), out);
        return;
    }
    out.push_back({&disc, stride, disc.n_nodes(), col0});
}

std::vector<FlatAxis> flatten_axes(const Discretization& disc) {
    std::vector<FlatAxis> axes;
    flatten_axes(disc, 1, 0, axes);
    return axes;
}

// Visits every 1-D slice along an axis: base node ids with axis index zero.
template <typename F>
void for_each_slice(int n_nodes, const FlatAxis& ax, F&& fn) {
    const int block = ax.stride * ax.count;
    for (int outer = 0; outer < n_nodes / block; ++outer)
        for (int inner = 0; inner < ax.stride; ++inner) fn(outer * block + inner);
}

void line_slice_gradient(const Eigen::VectorXd& v, int base, int stride, int count, double h,
                         Eigen::MatrixXd& out, int col) {
    auto at = [&](int j) { return v[base + j * stride]; };
    out(base, col) = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    for (int j = 1; j + 1 < count; ++j)
        out(base + j * stride, col) = (at(j + 1) - at(j - 1)) / (2.0 * h);
    out(base + (count - 1) * stride, col) =
        (3.0 * at(count - 1) - 4.0 * at(count - 2) + at(count - 3)) / (2.0 * h);
}

// Per-vertex gradient on a triangle mesh: area-weighted average of the
// piecewise-linear face gradients.
void sphere_slice_gradient(const Discretization& leaf, const Eigen::VectorXd& v, int base,
                           int stride, Eigen::MatrixXd& out, int col) {
    const int nv = leaf.n_nodes();
    const double r = leaf.sphere_radius;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(nv, 3);
    Eigen::VectorXd area_sum = Eigen::VectorXd::Zero(nv);
    for (int fidx = 0; fidx < leaf.faces.rows(); ++fidx) {
        const int i0 = leaf.faces(fidx, 0), i1 = leaf.faces(fidx, 1), i2 = leaf.faces(fidx, 2);
        const Eigen::Vector3d p0 = r * leaf.coords.row(i0).head<3>().transpose();
        const Eigen::Vector3d p1 = r * leaf.coords.row(i1).head<3>().transpose();
        const Eigen::Vector3d p2 = r * leaf.coords.row(i2).head<3>().transpose();
        const Eigen::Vector3d nvec = (p1 - p0).cross(p2 - p0);
        const double two_area = nvec.norm();
        const Eigen::Vector3d nhat = nvec / two_area;
        const double v0 = v[base + i0 * stride], v1 = v[base + i1 * stride],
                     v2 = v[base + i2 * stride];
        // grad = sum_i v_i (nhat x e_i) / (2A), e_i the edge opposite vertex i
        const Eigen::Vector3d g =
            (v0 * nhat.cross(p2 - p1) + v1 * nhat.cross(p0 - p2) + v2 * nhat.cross(p1 - p0)) /
            two_area;
        const double area = 0.5 * two_area;
        for (int i : {i0, i1, i2}) {
            acc.row(i) += area * g.transpose();
            area_sum[i] += area;
        }
    }
    for (int i = 0; i < nv; ++i)
        out.row(base + i * stride).segment(col, 3) = acc.row(i) / area_sum[i];
}

int gradient_cols(const std::vector<FlatAxis>& axes) {
    int c = 0;
    for (const auto& ax : axes) c += (ax.leaf->kind == GridKind::Sphere) ? 3 : 1;
    return c;
}

} // namespace

ModelPoint Discretization::point(int node) const {
    require(node >= 0 && node < n_nodes(), ErrorKind::Parameter, "node id out of range");
    ModelPoint p;
    if (sphere_cols > 0) p.sphere_dir = coords.row(node).head(sphere_cols).transpose();
    if (euclid_cols > 0) p.euclid = coords.row(node).tail(euclid_cols).transpose();
    return p;
}

std::string Discretization::digest() const {
    std::ostringstream os;
    switch (kind) {
        case GridKind::Line:
            os << "line(L=" << half_length << ",N=" << n_nodes() << ")";
            break;
        case GridKind::Sphere:
            os << "icosphere(level=" << subdiv_level << ",r=" << sphere_radius << ")";
            break;
        case GridKind::Product:
            os << "product(" << factor_a->digest() << " x " << factor_b->digest() << ")";
            break;
    }
    return os.str();
}

Discretization line_grid(double L, int N) {
    require(L > 0, ErrorKind::Parameter, "line grid needs L > 0");
    require(N >= 3, ErrorKind::Parameter, "line grid needs N >= 3");
    Discretization d;
    d.kind = GridKind::Line;
    d.euclid_cols = 1;
    d.closed = false;
    d.half_length = L;
    const double h = 2.0 * L / (N - 1);
    d.mesh_h = h;
    d.coords.resize(N, 1);
    for (int i = 0; i < N; ++i) d.coords(i, 0) = -L + i * h;
    d.weights = Eigen::VectorXd::Constant(N, h);
    d.weights[0] = d.weights[N - 1] = 0.5 * h;
    d.interior.assign(N, 1);
    d.interior.front() = d.interior.back() = 0;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(3 * N);
    const double c = 1.0 / h;
    for (int i = 0; i + 1 < N; ++i) {
        trips.emplace_back(i, i, c);
        trips.emplace_back(i + 1, i + 1, c);
        trips.emplace_back(i, i + 1, -c);
        trips.emplace_back(i + 1, i, -c);
    }
    d.stiffness.resize(N, N);
    d.stiffness.setFromTriplets(trips.begin(), trips.end());
    return d;
}

Discretization sphere_mesh(int subdiv_level) {
    require(subdiv_level >= 0, ErrorKind::Parameter, "subdivision level must be >= 0");
    // Icosahedron.
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : verts) v.normalize();
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
        {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

    for (int level = 0; level < subdiv_level; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Eigen::Vector3d m = (verts[a] + verts[b]).normalized();
            verts.push_back(m);
            const int id = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(4 * faces.size());
        for (const auto& f : faces) {
            const int a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
            next.push_back({f[0], a, c});
            next.push_back({f[1], b, a});
            next.push_back({f[2], c, b});
            next.push_back({a, b, c});
        }
        faces = std::move(next);
    }

    Discretization d;
    d.kind = GridKind::Sphere;
    d.sphere_cols = 3;
    d.closed = true;
    d.subdiv_level = subdiv_level;
    d.sphere_radius = 1.0;
    const int nv = static_cast<int>(verts.size());
    d.coords.resize(nv, 3);
    for (int i = 0; i < nv; ++i) d.coords.row(i) = verts[i].transpose();
    d.faces.resize(static_cast<int>(faces.size()), 3);
    for (int f = 0; f < d.faces.rows(); ++f)
        d.faces.row(f) << faces[f][0], faces[f][1], faces[f][2];
    d.interior.assign(nv, 1);

    d.weights = Eigen::VectorXd::Zero(nv);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(12 * faces.size());
    double edge_sum = 0;
    for (const auto& f : faces) {
        const Eigen::Vector3d p0 = verts[f[0]], p1 = verts[f[1]], p2 = verts[f[2]];
        const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
        for (int i : {0, 1, 2}) d.weights[f[i]] += area / 3.0;
        // Cotangent weights: the angle at each vertex weighs the opposite edge.
        const int idx[3] = {f[0], f[1], f[2]};
        const Eigen::Vector3d p[3] = {p0, p1, p2};
        for (int i = 0; i < 3; ++i) {
            const int j = (i + 1) % 3, k = (i + 2) % 3;
            const Eigen::Vector3d u = p[j] - p[i], w = p[k] - p[i];
            const double cot = u.dot(w) / u.cross(w).norm();
            trips.emplace_back(idx[j], idx[k], -0.5 * cot);
            trips.emplace_back(idx[k], idx[j], -0.5 * cot);
            trips.emplace_back(idx[j], idx[j], 0.5 * cot);
            trips.emplace_back(idx[k], idx[k], 0.5 * cot);
        }
        edge_sum += ((p1 - p0).norm() + (p2 - p1).norm() + (p0 - p2).norm()) / 3.0;
    }
    d.stiffness.resize(nv, nv);
    d.stiffness.setFromTriplets(trips.begin(), trips.end());
    d.mesh_h = edge_sum / static_cast<double>(faces.size());
    return d;
}

Discretization rescale_sphere(const Discretization& disc, double r) {
    require(disc.kind == GridKind::Sphere, ErrorKind::Parameter,
            "rescale_sphere needs a sphere mesh");
    require(r > 0, ErrorKind::Parameter, "radius must be positive");
    Discretization d = disc;
    const double rel = r / disc.sphere_radius;
    // Dirichlet energy is scale invariant on surfaces, so only areas change.
    d.weights *= rel * rel;
    d.sphere_radius = r;
    d.mesh_h *= rel;
    return d;
}

Discretization product_grid(const Discretization& a, const Discretization& b, long max_nodes) {
    const long total = static_cast<long>(a.n_nodes()) * b.n_nodes();
    require(total <= max_nodes, ErrorKind::Resource,
            "product grid has " + std::to_string(total) + " nodes, cap is " +
                std::to_string(max_nodes));
    require(a.sphere_cols == 0 || b.sphere_cols == 0, ErrorKind::Parameter,
            "at most one sphere factor is supported");

    Discretization d;
    d.kind = GridKind::Product;
    d.factor_a = std::make_shared<Discretization>(a);
    d.factor_b = std::make_shared<Discretization>(b);
    d.sphere_cols = a.sphere_cols + b.sphere_cols;
    d.euclid_cols = a.euclid_cols + b.euclid_cols;
    d.sphere_radius = (a.sphere_cols > 0) ? a.sphere_radius : b.sphere_radius;
    d.closed = a.closed && b.closed;
    d.mesh_h = std::max(a.mesh_h, b.mesh_h);
    d.half_length = std::max(a.half_length, b.half_length);

    const int na = a.n_nodes(), nb = b.n_nodes(), cols_a = static_cast<int>(a.coords.cols()),
              cols_b = static_cast<int>(b.coords.cols());
    d.coords.resize(total, cols_a + cols_b);
    d.weights.resize(total);
    d.interior.assign(static_cast<std::size_t>(total), 0);
    for (int ia = 0; ia < na; ++ia) {
        for (int ib = 0; ib < nb; ++ib) {
            const int idx = ia * nb + ib;
            d.coords.row(idx).head(cols_a) = a.coords.row(ia);
            d.coords.row(idx).tail(cols_b) = b.coords.row(ib);
            d.weights[idx] = a.weights[ia] * b.weights[ib];
            d.interior[static_cast<std::size_t>(idx)] = a.interior[ia] && b.interior[ib];
        }
    }

    Eigen::SparseMatrix<double> wa(na, na), wb(nb, nb);
    wa = a.weights.asDiagonal().toDenseMatrix().sparseView();
    wb = b.weights.asDiagonal().toDenseMatrix().sparseView();
    Eigen::SparseMatrix<double> s =
        Eigen::kroneckerProduct(a.stiffness, wb).eval() +
        Eigen::kroneckerProduct(wa, b.stiffness).eval();
    d.stiffness = std::move(s);
    return d;
}

Eigen::MatrixXd node_gradients(const Discretization& disc, const Eigen::VectorXd& samples) {
    require(samples.size() == disc.n_nodes(), ErrorKind::Parameter,
            "sample vector does not match node count");
    const auto axes = flatten_axes(disc);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(disc.n_nodes(), gradient_cols(axes));
    int col = 0;
    for (const auto& ax : axes) {
        if (ax.leaf->kind == GridKind::Sphere) {
            for_each_slice(disc.n_nodes(), ax, [&](int base) {
                sphere_slice_gradient(*ax.leaf, samples, base, ax.stride, out, col);
            });
            col += 3;
        } else {
            for_each_slice(disc.n_nodes(), ax, [&](int base) {
                line_slice_gradient(samples, base, ax.stride, ax.count, ax.leaf->mesh_h, out, col);
            });
            col += 1;
        }
    }
    return out;
}

Eigen::VectorXd node_laplacian(const Discretization& disc, const Eigen::VectorXd& samples) {
    require(samples.size() == disc.n_nodes(), ErrorKind::Parameter,
            "sample vector does not match node count");
    Eigen::VectorXd sv = disc.stiffness * samples;
    return (-sv.array() / disc.weights.array()).matrix();
}

double fd_hessian_norm(const Discretization& disc, const Eigen::VectorXd& samples) {
    require(samples.size() == disc.n_nodes(), ErrorKind::Parameter,
            "sample vector does not match node count");
    const auto axes = flatten_axes(disc);
    const int n = disc.n_nodes();

    // Sphere factors: only fiber-constant functions have a well-defined
    // (vanishing) intrinsic Hessian here.
    const double scale = 1.0 + samples.cwiseAbs().maxCoeff();
    for (const auto& ax : axes) {
        if (ax.leaf->kind != GridKind::Sphere) continue;
        for_each_slice(n, ax, [&](int base) {
            double lo = samples[base], hi = samples[base];
            for (int j = 1; j < ax.count; ++j) {
                const double v = samples[base + j * ax.stride];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            require(hi - lo <= 1e-9 * scale, ErrorKind::Capability,
                    "fd_hessian_norm: samples vary over a sphere fiber");
        });
    }

    std::vector<FlatAxis> lines;
    for (const auto& ax : axes)
        if (ax.leaf->kind == GridKind::Line) lines.push_back(ax);
    if (lines.empty()) return 0.0;

    auto axis_index = [](const FlatAxis& ax, int node) { return (node / ax.stride) % ax.count; };

    double worst = 0;
    for (int node = 0; node < n; ++node) {
        bool ok = true;
        for (const auto& ax : lines) {
            const int j = axis_index(ax, node);
            if (j == 0 || j == ax.count - 1) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        double frob2 = 0;
        for (std::size_t a = 0; a < lines.size(); ++a) {
            const auto& A = lines[a];
            const double ha = A.leaf->mesh_h;
            const double daa = (samples[node + A.stride] - 2.0 * samples[node] +
                                samples[node - A.stride]) /
                               (ha * ha);
            frob2 += daa * daa;
            for (std::size_t b = a + 1; b < lines.size(); ++b) {
                const auto& B = lines[b];
                const double hb = B.leaf->mesh_h;
                const double dab = (samples[node + A.stride + B.stride] -
                                    samples[node + A.stride - B.stride] -
                                    samples[node - A.stride + B.stride] +
                                    samples[node - A.stride - B.stride]) /
                                   (4.0 * ha * hb);
                frob2 += 2.0 * dab * dab;
            }
        }
        worst = std::max(worst, std::sqrt(frob2));
    }
    return worst;
}

} // namespace shrinker
