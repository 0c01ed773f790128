#include "stvem/element_ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stvem {

namespace {

/// One Gauss-Legendre point on a local edge with the DOFs carrying the trace there.
struct EdgePoint {
    Point x;
    Real weight;              ///< includes the edge length
    Vector lagrange;          ///< k+1 trace basis values
    std::vector<int> dofs;    ///< local DOF of each trace node
};

std::vector<int> edge_trace_dofs(const DofLayout& layout, int e)
{
    std::vector<int> dofs;
    dofs.push_back(layout.vertex_dof(e));
    for (int j = 0; j < layout.edge_points(); ++j) dofs.push_back(layout.edge_dof(e, j));
    dofs.push_back(layout.vertex_dof((e + 1) % layout.n_vertices));
    return dofs;
}

std::vector<std::vector<EdgePoint>> edge_points(const ElementGeometry& geom, const DofLayout& layout)
{
    const auto nodes = gauss_lobatto_nodes(layout.k);
    const GaussRule rule = gauss_legendre(layout.k + 2);
    std::vector<std::vector<EdgePoint>> out(static_cast<std::size_t>(geom.num_vertices()));
    for (int e = 0; e < geom.num_vertices(); ++e) {
        const Point& a = geom.vertices[static_cast<std::size_t>(e)];
        const Point& b = geom.vertices[static_cast<std::size_t>((e + 1) % geom.num_vertices())];
        const auto dofs = edge_trace_dofs(layout, e);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Real s = rule.points[q];
            out[static_cast<std::size_t>(e)].push_back(
                {a + s * (b - a), rule.weights[q] * geom.edge_lengths[static_cast<std::size_t>(e)], edge_lagrange(nodes, s), dofs});
        }
    }
    return out;
}

Matrix solve_checked(const Matrix& lhs, const Matrix& rhs, const ElementGeometry& geom, const char* what)
{
    Eigen::FullPivLU<Matrix> lu(lhs);
    if (lu.rank() < lhs.rows()) {
        std::ostringstream os;
        os << what << " is rank deficient on cell " << geom.cell_id << " (rank " << lu.rank() << " of " << lhs.rows() << ")";
        throw ElementError(os.str());
    }
    return lu.solve(rhs);
}

Real condition_estimate(const Matrix& m)
{
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    return s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : std::numeric_limits<Real>::infinity();
}

}  // namespace

Vector edge_lagrange(const std::vector<Real>& nodes, Real s)
{
    const auto n = static_cast<Eigen::Index>(nodes.size());
    Vector l = Vector::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j)
                l(i) *= (s - nodes[static_cast<std::size_t>(j)]) / (nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)]);
    return l;
}

std::vector<Point> nodal_points(const ElementGeometry& geom, const DofLayout& layout)
{
    std::vector<Point> pts(geom.vertices);
    const auto nodes = gauss_lobatto_nodes(layout.k);
    for (int e = 0; e < geom.num_vertices(); ++e) {
        const Point& a = geom.vertices[static_cast<std::size_t>(e)];
        const Point& b = geom.vertices[static_cast<std::size_t>((e + 1) % geom.num_vertices())];
        for (int j = 0; j < layout.edge_points(); ++j) pts.push_back(a + nodes[static_cast<std::size_t>(j + 1)] * (b - a));
    }
    return pts;
}

Vector interpolate_dofs(const ElementGeometry& geom, const DofLayout& layout, const PolygonQuadrature<Real>& quad,
                        const MonomialBasis<Real>& basis, const std::function<Real(const Point&)>& f)
{
    Vector dofs = Vector::Zero(layout.size());
    const auto pts = nodal_points(geom, layout);
    for (std::size_t i = 0; i < pts.size(); ++i) dofs(static_cast<Eigen::Index>(i)) = f(pts[i]);
    const int ni = layout.n_internal();
    if (ni > 0) {
        Vector moments = Vector::Zero(ni);
        for (std::size_t q = 0; q < quad.size(); ++q)
            moments += quad.weights[q] * f(quad.points[q]) * basis.values_upto(quad.points[q], layout.k - 2);
        dofs.tail(ni) = moments / geom.area;
    }
    return dofs;
}

Matrix dof_matrix(const ElementGeometry& geom, const DofLayout& layout, const MonomialBasis<Real>& basis,
                  const Matrix& mass, int degree)
{
    const int n = polynomial_dimension(degree);
    Matrix d = Matrix::Zero(layout.size(), n);
    const auto pts = nodal_points(geom, layout);
    for (std::size_t i = 0; i < pts.size(); ++i)
        d.row(static_cast<Eigen::Index>(i)) = basis.values_upto(pts[i], degree).transpose();
    const int ni = layout.n_internal();
    if (ni > 0) d.bottomRows(ni) = mass.topLeftCorner(ni, n) / geom.area;
    return d;
}

Matrix energy_rhs(const ElementGeometry& geom, const DofLayout& layout, const MonomialBasis<Real>& basis, int degree)
{
    const int n = polynomial_dimension(degree);
    Matrix B = Matrix::Zero(n, layout.size());
    const Matrix lap = basis.laplacian_matrix();
    const Real perimeter = geom.perimeter();

    // -int (Lap m_alpha) w, read from the internal moments.
    for (int a = 1; a < n; ++a)
        for (int b = 0; b < layout.n_internal(); ++b) B(a, layout.internal_dof(b)) -= lap(b, a) * geom.area;

    // Row 0 holds the boundary mean; the others the normal-derivative boundary term.
    const auto edges = edge_points(geom, layout);
    for (int e = 0; e < geom.num_vertices(); ++e) {
        const Point& normal = geom.edge_normals[static_cast<std::size_t>(e)];
        for (const auto& ep : edges[static_cast<std::size_t>(e)]) {
            const Matrix grad = basis.gradients(ep.x);
            for (std::size_t i = 0; i < ep.dofs.size(); ++i) {
                const Real trace = ep.weight * ep.lagrange(static_cast<Eigen::Index>(i));
                B(0, ep.dofs[i]) += trace / perimeter;
                for (int a = 1; a < n; ++a) B(a, ep.dofs[i]) += trace * grad.row(a).dot(normal);
            }
        }
    }
    return B;
}

Matrix build_pi_nabla_degree(const ElementGeometry& geom, const DofLayout& layout, const MonomialBasis<Real>& basis,
                             const Matrix& D, int degree)
{
    const Matrix B = energy_rhs(geom, layout, basis, degree);
    const Matrix G = B * D.leftCols(B.rows());
    return solve_checked(G, B, geom, "energy projection matrix G");
}

Matrix build_pi_nabla(const ElementGeometry& geom, const DofLayout& layout, const MonomialBasis<Real>& basis,
                      const Matrix& D, Matrix* B_out, Matrix* G_out)
{
    const Matrix B = energy_rhs(geom, layout, basis, layout.k);
    const Matrix G = B * D.leftCols(B.rows());
    if (B_out) *B_out = B;
    if (G_out) *G_out = G;
    return solve_checked(G, B, geom, "energy projection matrix G");
}

Matrix build_pi_zero(const ElementGeometry& geom, const DofLayout& layout, const Matrix& H, const Matrix& pi_nabla,
                     Matrix* C_out)
{
    const int ni = layout.n_internal();
    Matrix C = H * pi_nabla;
    C.topRows(ni).setZero();
    for (int a = 0; a < ni; ++a) C(a, layout.internal_dof(a)) = geom.area;
    if (C_out) *C_out = C;
    return H.ldlt().solve(C);
}

Matrix build_pi_grad(const ElementGeometry& geom, const DofLayout& layout, const MonomialBasis<Real>& basis,
                     const Matrix& H, const Matrix& C, int dir, int degree)
{
    const int n = polynomial_dimension(degree);
    const int nm = polynomial_dimension(degree - 1);
    Matrix E = Matrix::Zero(n, layout.size());
    if (nm > 0) {
        const Matrix dm = basis.derivative_matrix(dir);
        E -= dm.topLeftCorner(nm, n).transpose() * C.topRows(nm);
    }
    const auto edges = edge_points(geom, layout);
    for (int e = 0; e < geom.num_vertices(); ++e) {
        const Real nd = geom.edge_normals[static_cast<std::size_t>(e)](dir);
        if (nd == 0) continue;
        for (const auto& ep : edges[static_cast<std::size_t>(e)]) {
            const Vector m = basis.values_upto(ep.x, degree);
            for (std::size_t i = 0; i < ep.dofs.size(); ++i)
                E.col(ep.dofs[i]) += (ep.weight * ep.lagrange(static_cast<Eigen::Index>(i)) * nd) * m;
        }
    }
    return H.topLeftCorner(n, n).ldlt().solve(E);
}

Matrix build_stabilizer(const Matrix& D, const Matrix& pi)
{
    const Matrix r = Matrix::Identity(D.rows(), D.rows()) - D.leftCols(pi.rows()) * pi;
    const Matrix s = r.transpose() * r;
    return 0.5 * (s + s.transpose());
}

FluctuationOps build_fluctuation(const std::array<Matrix, 2>& pi_grad_k, const std::array<Matrix, 2>& pi_grad_km1)
{
    FluctuationOps f;
    for (int d = 0; d < 2; ++d) {
        f.grad[static_cast<std::size_t>(d)] = pi_grad_k[static_cast<std::size_t>(d)];
        const auto& low = pi_grad_km1[static_cast<std::size_t>(d)];
        f.grad[static_cast<std::size_t>(d)].topRows(low.rows()) -= low;
    }
    const auto N = f.grad[0].cols();
    f.div.resize(f.grad[0].rows(), 2 * N);
    f.div << f.grad[0], f.grad[1];
    return f;
}

ElementOps build_element_ops(const ElementGeometry& geom, int k, int quad_degree)
{
    if (k < 1 || k > 3) throw ConfigError("polynomial order must be 1, 2 or 3");
    ElementOps ops;
    ops.k = k;
    ops.geom = geom;
    ops.layout = DofLayout(k, geom.num_vertices());
    ops.basis = make_basis<Real>(geom, k);
    ops.quad = build_quadrature(geom, quad_degree < 0 ? 2 * k + 2 : std::max(quad_degree, 2 * k));
    ops.H = mass_matrix(ops.basis, ops.quad);
    const Real cond = condition_estimate(ops.H);
    if (cond > 1e12) {
        std::ostringstream os;
        os << "cell " << geom.cell_id << ": mass matrix condition number " << cond;
        ops.warnings.push_back(os.str());
    }
    ops.D = dof_matrix(geom, ops.layout, ops.basis, ops.H, k);
    ops.pi_nabla = build_pi_nabla(geom, ops.layout, ops.basis, ops.D, &ops.B, &ops.G);
    ops.pi_zero = build_pi_zero(geom, ops.layout, ops.H, ops.pi_nabla, &ops.C);
    for (int d = 0; d < 2; ++d) {
        ops.pi_grad[static_cast<std::size_t>(d)] = build_pi_grad(geom, ops.layout, ops.basis, ops.H, ops.C, d, k - 1);
        ops.pi_grad_k[static_cast<std::size_t>(d)] = build_pi_grad(geom, ops.layout, ops.basis, ops.H, ops.C, d, k);
    }
    ops.pi_nabla_km1 = build_pi_nabla_degree(geom, ops.layout, ops.basis, ops.D, k - 1);
    ops.S1 = build_stabilizer(ops.D, ops.pi_nabla);
    ops.S2 = build_stabilizer(ops.D, ops.pi_nabla_km1);
    auto fluct = build_fluctuation(ops.pi_grad_k, ops.pi_grad);
    ops.fluct_grad = fluct.grad;
    ops.fluct_div = fluct.div;
    ops.pi_div.resize(ops.n_km1(), 2 * ops.n_dofs());
    ops.pi_div << ops.pi_grad[0], ops.pi_grad[1];
    return ops;
}

GlobalDofMap::GlobalDofMap(const PolyMesh& mesh, int k) : k_(k)
{
    const int per_edge = k - 1;
    const int n_moments = polynomial_dimension(k - 2);
    const int nv = mesh.num_vertices();
    const int ne = mesh.num_edges();
    first_moment_ = nv + ne * per_edge;
    size_ = first_moment_ + mesh.num_cells() * n_moments;

    const auto nodes = gauss_lobatto_nodes(k);
    position_.assign(static_cast<std::size_t>(size_), Point::Zero());
    for (int v = 0; v < nv; ++v) position_[static_cast<std::size_t>(v)] = mesh.vertices()[static_cast<std::size_t>(v)];
    for (int e = 0; e < ne; ++e) {
        const Edge& edge = mesh.edges()[static_cast<std::size_t>(e)];
        const Point& a = mesh.vertices()[static_cast<std::size_t>(edge.v0)];
        const Point& b = mesh.vertices()[static_cast<std::size_t>(edge.v1)];
        for (int j = 0; j < per_edge; ++j)
            position_[static_cast<std::size_t>(nv + e * per_edge + j)] = a + nodes[static_cast<std::size_t>(j + 1)] * (b - a);
    }

    cell_dofs_.resize(static_cast<std::size_t>(mesh.num_cells()));
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto& loop = mesh.cells()[static_cast<std::size_t>(c)];
        const auto& edges = mesh.cell_edges(c);
        const auto n = loop.size();
        auto& dofs = cell_dofs_[static_cast<std::size_t>(c)];
        dofs.assign(loop.begin(), loop.end());
        for (std::size_t i = 0; i < n; ++i) {
            const int e = edges[i];
            // Local edge i runs from loop[i] to loop[i+1]; the global ordering runs from v0 to v1.
            const bool forward = loop[i] == mesh.edges()[static_cast<std::size_t>(e)].v0;
            for (int j = 0; j < per_edge; ++j) dofs.push_back(nv + e * per_edge + (forward ? j : per_edge - 1 - j));
        }
        const auto geom = mesh.cell_polygon(c);
        for (int a = 0; a < n_moments; ++a) {
            const int id = first_moment_ + c * n_moments + a;
            dofs.push_back(id);
            position_[static_cast<std::size_t>(id)] = polygon_centroid<Real>(geom);
        }
    }

    for (int e = 0; e < ne; ++e) {
        const std::string& marker = mesh.edge_marker(e);
        if (marker.empty()) continue;
        const Edge& edge = mesh.edges()[static_cast<std::size_t>(e)];
        auto& list = boundary_[marker];
        list.push_back(edge.v0);
        list.push_back(edge.v1);
        for (int j = 0; j < per_edge; ++j) list.push_back(nv + e * per_edge + j);
    }
    for (auto& [name, list] : boundary_) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
}

std::vector<int> GlobalDofMap::cell_vector_dofs(int cell) const
{
    const auto& dofs = cell_dofs(cell);
    std::vector<int> out(dofs);
    for (int d : dofs) out.push_back(d + size_);
    return out;
}

std::vector<int> GlobalDofMap::boundary_dofs(const std::string& marker) const
{
    auto it = boundary_.find(marker);
    return it == boundary_.end() ? std::vector<int>{} : it->second;
}

}  // namespace stvem
