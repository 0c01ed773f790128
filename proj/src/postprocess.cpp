#include "stvem/postprocess.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace stvem {

namespace {

std::array<Vector, 2> velocity_components(const Vector& u, const GlobalDofMap& map, int cell)
{
    const auto& sd = map.cell_dofs(cell);
    std::vector<int> yd(sd);
    for (int& d : yd) d += map.size();
    return {gather(u, sd), gather(u, yd)};
}

void check_finite(Real v, const Point& x, const char* what)
{
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "exact " << what << " is not finite at (" << x.x() << ", " << x.y() << ")";
        throw Error(os.str());
    }
}

}  // namespace

ErrorBundle compute_errors(const CoupledState& state, const ExactSolution& exact, const Discretization& disc)
{
    const auto& map = disc.map;
    // Mean values used to shift pressures to zero mean.
    Real area = 0, exact_mean = 0, discrete_mean = 0;
    for (int c = 0; c < static_cast<int>(disc.ops.size()); ++c) {
        const auto& e = disc.ops[static_cast<std::size_t>(c)];
        const Vector pc = e.pi_zero * gather(state.p, map.cell_dofs(c));
        area += e.geom.area;
        discrete_mean += e.H.row(0).dot(pc);
        for (std::size_t q = 0; q < e.quad.size(); ++q) {
            const Real pv = exact.p(e.quad.points[q]);
            check_finite(pv, e.quad.points[q], "pressure");
            exact_mean += e.quad.weights[q] * pv;
        }
    }
    exact_mean /= area;
    discrete_mean /= area;

    Real uh1 = 0, ul2 = 0, pl2 = 0, th1 = 0, tl2 = 0, div = 0;
    for (int c = 0; c < static_cast<int>(disc.ops.size()); ++c) {
        const auto& e = disc.ops[static_cast<std::size_t>(c)];
        const auto uc = velocity_components(state.u, map, c);
        const Vector phic = gather(state.phi, map.cell_dofs(c));
        const std::array<Vector, 2> u_nabla{e.pi_nabla * uc[0], e.pi_nabla * uc[1]};
        const std::array<Vector, 2> u_zero{e.pi_zero * uc[0], e.pi_zero * uc[1]};
        const Vector p_zero = e.pi_zero * gather(state.p, map.cell_dofs(c));
        const Vector phi_nabla = e.pi_nabla * phic;
        const Vector phi_zero = e.pi_zero * phic;
        Vector udiv(2 * e.n_dofs());
        udiv << uc[0], uc[1];
        const Vector div_c = e.pi_div * udiv;
        div += div_c.dot(e.H.topLeftCorner(e.n_km1(), e.n_km1()) * div_c);

        for (std::size_t q = 0; q < e.quad.size(); ++q) {
            const Point& x = e.quad.points[q];
            const Real w = e.quad.weights[q];
            const Vector m = e.basis.values(x);
            const Matrix grad = e.basis.gradients(x);
            const Point ue = exact.u(x);
            const Matrix2 gue = exact.grad_u(x);
            const Real pe = exact.p(x) - exact_mean;
            const Real te = exact.phi(x);
            const Point gte = exact.grad_phi(x);
            check_finite(ue.norm() + gue.norm(), x, "velocity");
            check_finite(te + gte.norm(), x, "temperature");
            for (int d = 0; d < 2; ++d) {
                const Eigen::Matrix<Real, 1, 2> gh = (grad.transpose() * u_nabla[static_cast<std::size_t>(d)]).transpose();
                uh1 += w * (gue.row(d) - gh).squaredNorm();
                ul2 += w * std::pow(ue(d) - m.dot(u_zero[static_cast<std::size_t>(d)]), 2);
            }
            pl2 += w * std::pow(pe - (m.dot(p_zero) - discrete_mean), 2);
            const Point gth = grad.transpose() * phi_nabla;
            th1 += w * (gte - gth).squaredNorm();
            tl2 += w * std::pow(te - m.dot(phi_zero), 2);
        }
    }
    ErrorBundle b;
    b.E_u_H1 = std::sqrt(uh1);
    b.E_u_L2 = std::sqrt(ul2);
    b.E_p_L2 = std::sqrt(pl2);
    b.E_phi_H1 = std::sqrt(th1);
    b.E_phi_L2 = std::sqrt(tl2);
    b.div_violation = std::sqrt(std::max(Real(0), div));
    std::tie(b.phi_min_dev, b.phi_max_dev) = nodal_extremes(state.phi, disc, exact.phi);
    return b;
}

Real divergence_violation(const Vector& u, const Discretization& disc)
{
    Real div = 0;
    for (int c = 0; c < static_cast<int>(disc.ops.size()); ++c) {
        const auto& e = disc.ops[static_cast<std::size_t>(c)];
        const auto uc = velocity_components(u, disc.map, c);
        Vector v(2 * e.n_dofs());
        v << uc[0], uc[1];
        const Vector d = e.pi_div * v;
        div += d.dot(e.H.topLeftCorner(e.n_km1(), e.n_km1()) * d);
    }
    return std::sqrt(std::max(Real(0), div));
}

std::pair<Real, Real> nodal_extremes(const Vector& phi, const Discretization& disc, const ScalarField& reference)
{
    Real lo = std::numeric_limits<Real>::infinity(), hi = -lo;
    for (int i = 0; i < disc.map.num_nodal(); ++i) {
        const Real dev = phi(i) - reference(disc.map.position(i));
        lo = std::min(lo, dev);
        hi = std::max(hi, dev);
    }
    return {lo, hi};
}

Real observed_rate(Real e_coarse, Real e_fine, Real h_coarse, Real h_fine)
{
    if (e_coarse == 0) return std::numeric_limits<Real>::infinity();
    return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

std::vector<std::array<Real, 5>> observed_rates(const std::vector<ConvergenceRecord>& records)
{
    if (records.size() < 2) throw ConfigError("observed_rates needs at least two records");
    std::vector<std::array<Real, 5>> out;
    for (std::size_t i = 0; i + 1 < records.size(); ++i) {
        const auto& a = records[i];
        const auto& b = records[i + 1];
        if (!(b.h < a.h)) throw ConfigError("observed_rates needs strictly decreasing h");
        const std::array<Real, 5> ea{a.errors.E_u_H1, a.errors.E_u_L2, a.errors.E_p_L2, a.errors.E_phi_H1, a.errors.E_phi_L2};
        const std::array<Real, 5> eb{b.errors.E_u_H1, b.errors.E_u_L2, b.errors.E_p_L2, b.errors.E_phi_H1, b.errors.E_phi_L2};
        std::array<Real, 5> r{};
        for (std::size_t n = 0; n < 5; ++n) r[n] = observed_rate(ea[n], eb[n], a.h, b.h);
        out.push_back(r);
    }
    return out;
}

VertexFields vertex_fields(const CoupledState& state, const Discretization& disc)
{
    const auto& mesh = *disc.mesh;
    const auto nv = static_cast<std::size_t>(mesh.num_vertices());
    VertexFields f;
    f.u.assign(nv, Point::Zero());
    f.p.assign(nv, 0);
    f.phi.assign(nv, 0);
    std::vector<int> count(nv, 0);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto& e = disc.ops[static_cast<std::size_t>(c)];
        const auto& sd = disc.map.cell_dofs(c);
        const auto uc = velocity_components(state.u, disc.map, c);
        const Vector u1 = e.pi_nabla * uc[0], u2 = e.pi_nabla * uc[1];
        const Vector pc = e.pi_zero * gather(state.p, sd);
        const Vector tc = e.pi_zero * gather(state.phi, sd);
        const auto& loop = mesh.cells()[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const auto v = static_cast<std::size_t>(loop[i]);
            const Vector m = e.basis.values(mesh.vertices()[v]);
            f.u[v] += Point(m.dot(u1), m.dot(u2));
            f.p[v] += m.dot(pc);
            f.phi[v] += m.dot(tc);
            ++count[v];
        }
    }
    for (std::size_t v = 0; v < nv; ++v) {
        if (count[v] == 0) continue;
        f.u[v] /= count[v];
        f.p[v] /= count[v];
        f.phi[v] /= count[v];
    }
    return f;
}

std::string export_string(const CoupledState& state, const Discretization& disc, ExportFormat format)
{
    const auto& mesh = *disc.mesh;
    const auto f = vertex_fields(state, disc);
    std::ostringstream os;
    os << std::setprecision(12);
    if (format == ExportFormat::csv) {
        os << "x,y,u1,u2,p,phi\n";
        for (int v = 0; v < mesh.num_vertices(); ++v) {
            const auto i = static_cast<std::size_t>(v);
            const Point& x = mesh.vertices()[i];
            os << x.x() << ',' << x.y() << ',' << f.u[i].x() << ',' << f.u[i].y() << ',' << f.p[i] << ',' << f.phi[i] << '\n';
        }
        return os.str();
    }
    std::size_t entries = 0;
    for (const auto& loop : mesh.cells()) entries += loop.size() + 1;
    os << "# vtk DataFile Version 3.0\n";
    os << "stokes-temperature VEM fields\n";
    os << "ASCII\n";
    os << "DATASET POLYDATA\n";
    os << "POINTS " << mesh.num_vertices() << " double\n";
    for (const auto& x : mesh.vertices()) os << x.x() << ' ' << x.y() << " 0\n";
    os << "POLYGONS " << mesh.num_cells() << ' ' << entries << '\n';
    for (const auto& loop : mesh.cells()) {
        os << loop.size();
        for (int v : loop) os << ' ' << v;
        os << '\n';
    }
    os << "POINT_DATA " << mesh.num_vertices() << '\n';
    os << "VECTORS velocity double\n";
    for (const auto& u : f.u) os << u.x() << ' ' << u.y() << " 0\n";
    os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (Real p : f.p) os << p << '\n';
    os << "SCALARS temperature double 1\nLOOKUP_TABLE default\n";
    for (Real t : f.phi) os << t << '\n';
    return os.str();
}

void export_fields(const CoupledState& state, const Discretization& disc, const std::string& path, ExportFormat format)
{
    const std::string text = export_string(state, disc, format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
    if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace stvem
