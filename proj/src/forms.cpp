#include "stvem/forms.hpp"

#include "stvem/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace stvem {

namespace {

using Triplets = std::vector<Eigen::Triplet<Real>>;

void scatter(Triplets& out, const Matrix& local, const std::vector<int>& rows, const std::vector<int>& cols)
{
    for (Eigen::Index i = 0; i < local.rows(); ++i)
        for (Eigen::Index j = 0; j < local.cols(); ++j) {
            const Real v = local(i, j);
            if (v != 0) out.emplace_back(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)], v);
        }
}

SparseMatrix to_sparse(Eigen::Index rows, Eigen::Index cols, const Triplets& t)
{
    SparseMatrix m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

Vector field_at_points(const ElementOps& ops, const Vector& coeffs)
{
    Vector v(static_cast<Eigen::Index>(ops.quad.size()));
    for (std::size_t q = 0; q < ops.quad.size(); ++q)
        v(static_cast<Eigen::Index>(q)) = ops.basis.values(ops.quad.points[q]).dot(coeffs);
    return v;
}

Real checked_coefficient(const Coefficient& coef, Real phi, const ElementOps& ops, const char* name)
{
    const Real value = coef(phi);
    const Real slack = 1e-10 * std::max(std::abs(coef.max), Real(1));
    if (!std::isfinite(value) || (!coef.constant && (value < coef.min - slack || value > coef.max + slack))) {
        std::ostringstream os;
        os << name << " = " << value << " outside its declared bounds [" << coef.min << ", " << coef.max
           << "] on cell " << ops.geom.cell_id << " (temperature " << phi << ")";
        throw ElementError(os.str());
    }
    return value;
}

Vector coefficient_at_points(const Coefficient& coef, const ElementOps& ops, const Vector& phi_coeffs, const char* name)
{
    if (coef.constant) return Vector::Constant(static_cast<Eigen::Index>(ops.quad.size()), coef(0));
    const Vector phi = field_at_points(ops, phi_coeffs);
    Vector out(phi.size());
    for (Eigen::Index q = 0; q < phi.size(); ++q) out(q) = checked_coefficient(coef, phi(q), ops, name);
    return out;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix block_diag(const Matrix& a)
{
    const auto n = a.rows();
    Matrix out = Matrix::Zero(2 * n, 2 * n);
    out.topLeftCorner(n, n) = a;
    out.bottomRightCorner(n, n) = a;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

void ProblemSpec::validate() const
{
    if (k < 1 || k > 3) throw ConfigError("order k must be 1, 2 or 3");
    if (!mu.value) throw ConfigError("viscosity is not set");
    if (!kappa.value) throw ConfigError("conductivity is not set");
    if (!(mu.min > 0) || mu.max < mu.min) throw ConfigError("viscosity bounds must satisfy 0 < mu_min <= mu_max");
    if (!(kappa.min > 0) || kappa.max < kappa.min) throw ConfigError("conductivity bounds must satisfy 0 < kappa_min <= kappa_max");
    if (alpha < 0) throw ConfigError("buoyancy coefficient alpha must be non-negative");
    if (stabilized && !(c1 > 0 && c2 > 0 && c3 > 0)) throw ConfigError("stabilization constants must be positive");
    if (!stabilized && (c1 < 0 || c2 < 0 || c3 < 0)) throw ConfigError("stabilization constants must be non-negative");
    if (alpha > 0 && !buoyancy) throw ConfigError("alpha > 0 requires a buoyancy field f");
    // Sample the declared temperature range and check mu stays inside its bounds.
    if (!mu.constant && std::isfinite(phi_min) && std::isfinite(phi_max) && phi_max < 1e299) {
        for (int i = 0; i <= 200; ++i) {
            const Real xi = phi_min + (phi_max - phi_min) * i / 200.0;
            const Real v = mu(xi);
            if (!(v >= mu.min * (1 - 1e-12) && v <= mu.max * (1 + 1e-12))) {
                std::ostringstream os;
                os << "mu(" << xi << ") = " << v << " violates declared bounds [" << mu.min << ", " << mu.max << "]";
                throw ConfigError(os.str());
            }
        }
    }
}

const BoundaryCondition& ProblemSpec::condition(const std::string& marker) const
{
    auto it = boundary.find(marker);
    if (it != boundary.end()) return it->second;
    it = boundary.find("*");
    if (it != boundary.end()) return it->second;
    throw ConfigError("no boundary condition for marker '" + marker + "'");
}

void ProblemSpec::check_markers(const PolyMesh& mesh) const
{
    const auto markers = mesh.markers();
    const std::set<std::string> present(markers.begin(), markers.end());
    for (const auto& m : markers) (void)condition(m);
    for (const auto& [name, bc] : boundary)
        if (name != "*" && !present.count(name))
            throw ConfigError("boundary condition given for marker '" + name + "' which the mesh does not have");
}

bool ProblemSpec::velocity_fully_dirichlet(const PolyMesh& mesh) const
{
    for (const auto& m : mesh.markers())
        if (!condition(m).velocity) return false;
    return true;
}

// ---------------------------------------------------------------------------

Vector project_scalar(const ElementOps& ops, const Vector& local_dofs) { return ops.pi_zero * local_dofs; }

Matrix local_viscous(const ElementOps& ops, const ProblemSpec& spec, const Vector& phi_coeffs)
{
    const int N = ops.n_dofs();
    const int n1 = ops.n_km1();
    const Vector mu_q = coefficient_at_points(spec.mu, ops, phi_coeffs, "viscosity");
    const Matrix Hmu = weighted_mass_matrix(ops.basis, ops.quad, mu_q, ops.k - 1);
    const Matrix& gx = ops.pi_grad[0];
    const Matrix& gy = ops.pi_grad[1];
    Matrix e11 = Matrix::Zero(n1, 2 * N), e22 = Matrix::Zero(n1, 2 * N), e12(n1, 2 * N);
    e11.leftCols(N) = gx;
    e22.rightCols(N) = gy;
    e12 << 0.5 * gy, 0.5 * gx;
    Matrix K = e11.transpose() * Hmu * e11 + e22.transpose() * Hmu * e22 + 2 * e12.transpose() * Hmu * e12;
    const Real mu0 = spec.mu.constant ? spec.mu(0) : checked_coefficient(spec.mu, ops.mean_of(phi_coeffs), ops, "viscosity");
    K += mu0 * block_diag(ops.S1);
    return symmetrized(K);
}

Matrix local_divergence(const ElementOps& ops)
{
    return ops.pi_zero.transpose() * ops.H.leftCols(ops.n_km1()) * ops.pi_div;
}

Matrix local_temperature(const ElementOps& ops, const ProblemSpec& spec, const Vector& phi_coeffs)
{
    const Vector kappa_q = coefficient_at_points(spec.kappa, ops, phi_coeffs, "conductivity");
    const Matrix Hk = weighted_mass_matrix(ops.basis, ops.quad, kappa_q, ops.k - 1);
    Matrix K = ops.pi_grad[0].transpose() * Hk * ops.pi_grad[0] + ops.pi_grad[1].transpose() * Hk * ops.pi_grad[1];
    const Real k0 =
        spec.kappa.constant ? spec.kappa(0) : checked_coefficient(spec.kappa, ops.mean_of(phi_coeffs), ops, "conductivity");
    K += k0 * ops.S1;
    return symmetrized(K);
}

Matrix local_convection(const ElementOps& ops, const std::array<Vector, 2>& u_coeffs)
{
    const int nk = ops.n_k();
    const int n1 = ops.n_km1();
    std::array<Matrix, 2> M{Matrix::Zero(nk, n1), Matrix::Zero(nk, n1)};
    for (std::size_t q = 0; q < ops.quad.size(); ++q) {
        const Vector m = ops.basis.values(ops.quad.points[q]);
        for (std::size_t d = 0; d < 2; ++d) {
            const Real ud = m.dot(u_coeffs[d]);
            M[d].noalias() += (ops.quad.weights[q] * ud) * m * m.head(n1).transpose();
        }
    }
    return ops.pi_zero.transpose() * (M[0] * ops.pi_grad[0] + M[1] * ops.pi_grad[1]);
}

Matrix local_convection_skew(const ElementOps& ops, const std::array<Vector, 2>& u_coeffs)
{
    const Matrix c = local_convection(ops, u_coeffs);
    return 0.5 * (c - c.transpose());
}

LpsTerms local_lps_terms(const ElementOps& ops, const ProblemSpec& spec)
{
    const Real h = ops.geom.diameter;
    LpsTerms t;
    t.L1 = spec.tau1(h) * symmetrized(ops.fluct_div.transpose() * ops.H * ops.fluct_div + block_diag(ops.S1));
    Matrix grad = ops.fluct_grad[0].transpose() * ops.H * ops.fluct_grad[0] + ops.fluct_grad[1].transpose() * ops.H * ops.fluct_grad[1];
    t.L2 = spec.tau2(h) * symmetrized(grad + ops.S2);
    t.L3 = spec.tau3(h) * symmetrized(grad + ops.S1);
    return t;
}

LocalLoads local_loads(const ElementOps& ops, const ProblemSpec& spec, const Vector& phi_coeffs)
{
    const int nk = ops.n_k();
    std::array<Vector, 2> mom{Vector::Zero(nk), Vector::Zero(nk)};
    Vector heat = Vector::Zero(nk);
    auto fail = [&](const char* what, const Point& x) {
        std::ostringstream os;
        os << "non-finite " << what << " at (" << x.x() << ", " << x.y() << ") in cell " << ops.geom.cell_id;
        throw ElementError(os.str());
    };
    const bool buoy = spec.alpha != 0 && spec.buoyancy;
    for (std::size_t q = 0; q < ops.quad.size(); ++q) {
        const Point& x = ops.quad.points[q];
        const Vector m = ops.basis.values(x);
        const Real w = ops.quad.weights[q];
        Point f = Point::Zero();
        if (spec.fixed_source) f += (*spec.fixed_source)(x);
        if (buoy) f += spec.alpha * m.dot(phi_coeffs) * (*spec.buoyancy)(x);
        if (!f.allFinite()) fail("momentum source", x);
        mom[0] += w * f.x() * m;
        mom[1] += w * f.y() * m;
        if (spec.heat_source) {
            const Real g = (*spec.heat_source)(x);
            if (!std::isfinite(g)) fail("heat source", x);
            heat += w * g * m;
        }
    }
    const int N = ops.n_dofs();
    LocalLoads out;
    out.momentum.resize(2 * N);
    out.momentum << ops.pi_zero.transpose() * mom[0], ops.pi_zero.transpose() * mom[1];
    out.temperature = ops.pi_zero.transpose() * heat;
    return out;
}

// ---------------------------------------------------------------------------

std::vector<ElementOps> build_mesh_ops(const PolyMesh& mesh, int k, int quad_degree, int threads)
{
    std::vector<ElementOps> ops(static_cast<std::size_t>(mesh.num_cells()));
    parallel_for(mesh.num_cells(), threads, [&](int c) {
        ops[static_cast<std::size_t>(c)] = build_element_ops(element_geometry(mesh, c), k, quad_degree);
    });
    return ops;
}

CoupledState CoupledState::zero(const GlobalDofMap& map)
{
    CoupledState s;
    s.u = Vector::Zero(map.vector_size());
    s.p = Vector::Zero(map.size());
    s.phi = Vector::Zero(map.size());
    return s;
}

Vector gather(const Vector& global, const std::vector<int>& dofs)
{
    Vector out(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t i = 0; i < dofs.size(); ++i) out(static_cast<Eigen::Index>(i)) = global(dofs[i]);
    return out;
}

namespace {

DirichletData collect(const std::map<int, Real>& values)
{
    DirichletData d;
    d.values.resize(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (const auto& [dof, v] : values) {
        d.dofs.push_back(dof);
        d.values(i++) = v;
    }
    return d;
}

}  // namespace

DirichletData velocity_dirichlet(const PolyMesh& mesh, const GlobalDofMap& map, const ProblemSpec& spec)
{
    std::map<int, Real> values;
    for (const auto& marker : mesh.markers()) {
        const auto& bc = spec.condition(marker);
        if (!bc.velocity) continue;
        for (int dof : map.boundary_dofs(marker)) {
            const Point v = (*bc.velocity)(map.position(dof));
            values.emplace(dof, v.x());
            values.emplace(dof + map.size(), v.y());
        }
    }
    return collect(values);
}

DirichletData temperature_dirichlet(const PolyMesh& mesh, const GlobalDofMap& map, const ProblemSpec& spec)
{
    std::map<int, Real> values;
    for (const auto& marker : mesh.markers()) {
        const auto& bc = spec.condition(marker);
        if (!bc.temperature) continue;
        for (int dof : map.boundary_dofs(marker)) values.emplace(dof, (*bc.temperature)(map.position(dof)));
    }
    return collect(values);
}

void assemble_static(const PolyMesh& mesh, const std::vector<ElementOps>& ops, const GlobalDofMap& map,
                     const ProblemSpec& spec, AssembledSystem& sys, int threads)
{
    spec.check_markers(mesh);
    const int n = mesh.num_cells();
    std::vector<Matrix> b(static_cast<std::size_t>(n));
    std::vector<LpsTerms> lps(static_cast<std::size_t>(n));
    std::vector<Vector> mean(static_cast<std::size_t>(n)), one(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](int c) {
        const auto& e = ops[static_cast<std::size_t>(c)];
        b[static_cast<std::size_t>(c)] = local_divergence(e);
        lps[static_cast<std::size_t>(c)] = local_lps_terms(e, spec);
        mean[static_cast<std::size_t>(c)] = (e.H.row(0) * e.pi_zero).transpose();
        one[static_cast<std::size_t>(c)] = interpolate_dofs(e.geom, e.layout, e.quad, e.basis, [](const Point&) { return Real(1); });
    });
    Triplets tb, t1, t2, t3;
    sys.mean_row = Vector::Zero(map.size());
    sys.pressure_constant = Vector::Zero(map.size());
    for (int c = 0; c < n; ++c) {
        const auto& sd = map.cell_dofs(c);
        const auto vd = map.cell_vector_dofs(c);
        scatter(tb, b[static_cast<std::size_t>(c)], sd, vd);
        scatter(t1, lps[static_cast<std::size_t>(c)].L1, vd, vd);
        scatter(t2, lps[static_cast<std::size_t>(c)].L2, sd, sd);
        scatter(t3, lps[static_cast<std::size_t>(c)].L3, sd, sd);
        for (std::size_t i = 0; i < sd.size(); ++i) {
            sys.mean_row(sd[i]) += mean[static_cast<std::size_t>(c)](static_cast<Eigen::Index>(i));
            sys.pressure_constant(sd[i]) = one[static_cast<std::size_t>(c)](static_cast<Eigen::Index>(i));
        }
    }
    const int ns = map.size();
    sys.B = to_sparse(ns, 2 * ns, tb);
    sys.L1 = to_sparse(2 * ns, 2 * ns, t1);
    sys.L2 = to_sparse(ns, ns, t2);
    sys.L3 = to_sparse(ns, ns, t3);
    sys.mean_constraint = spec.velocity_fully_dirichlet(mesh);
    sys.u_bc = velocity_dirichlet(mesh, map, spec);
    sys.phi_bc = temperature_dirichlet(mesh, map, spec);
}

void assemble_temperature_dependent(const std::vector<ElementOps>& ops, const GlobalDofMap& map,
                                    const ProblemSpec& spec, const Vector& phi, AssembledSystem& sys, int threads)
{
    const int n = static_cast<int>(ops.size());
    std::vector<Matrix> a(static_cast<std::size_t>(n)), at(static_cast<std::size_t>(n));
    std::vector<LocalLoads> loads(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](int c) {
        const auto& e = ops[static_cast<std::size_t>(c)];
        const Vector phi_c = project_scalar(e, gather(phi, map.cell_dofs(c)));
        a[static_cast<std::size_t>(c)] = local_viscous(e, spec, phi_c);
        at[static_cast<std::size_t>(c)] = local_temperature(e, spec, phi_c);
        loads[static_cast<std::size_t>(c)] = local_loads(e, spec, phi_c);
    });
    Triplets ta, tt;
    const int ns = map.size();
    sys.F = Vector::Zero(2 * ns);
    sys.G = Vector::Zero(ns);
    for (int c = 0; c < n; ++c) {
        const auto& sd = map.cell_dofs(c);
        const auto vd = map.cell_vector_dofs(c);
        scatter(ta, a[static_cast<std::size_t>(c)], vd, vd);
        scatter(tt, at[static_cast<std::size_t>(c)], sd, sd);
        const auto& l = loads[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < vd.size(); ++i) sys.F(vd[i]) += l.momentum(static_cast<Eigen::Index>(i));
        for (std::size_t i = 0; i < sd.size(); ++i) sys.G(sd[i]) += l.temperature(static_cast<Eigen::Index>(i));
    }
    sys.A = to_sparse(2 * ns, 2 * ns, ta);
    sys.AT = to_sparse(ns, ns, tt);
}

void assemble_velocity_dependent(const std::vector<ElementOps>& ops, const GlobalDofMap& map,
                                 const ProblemSpec& spec, const Vector& u, AssembledSystem& sys, int threads)
{
    const int n = static_cast<int>(ops.size());
    const int ns = map.size();
    std::vector<Matrix> c1(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](int c) {
        const auto& e = ops[static_cast<std::size_t>(c)];
        const auto& sd = map.cell_dofs(c);
        std::vector<int> ydofs(sd);
        for (int& d : ydofs) d += ns;
        const std::array<Vector, 2> uc{project_scalar(e, gather(u, sd)), project_scalar(e, gather(u, ydofs))};
        c1[static_cast<std::size_t>(c)] = local_convection(e, uc);
    });
    Triplets ts, tsym;
    for (int c = 0; c < n; ++c) {
        const auto& sd = map.cell_dofs(c);
        const Matrix& m = c1[static_cast<std::size_t>(c)];
        scatter(ts, 0.5 * (m - m.transpose()), sd, sd);
        if (spec.convection == ConvectionForm::advective) scatter(tsym, 0.5 * (m + m.transpose()), sd, sd);
    }
    sys.C = to_sparse(ns, ns, ts);
    sys.C_sym = to_sparse(ns, ns, tsym);
}

AssembledSystem assemble_global(const PolyMesh& mesh, const std::vector<ElementOps>& ops, const GlobalDofMap& map,
                                const ProblemSpec& spec, const CoupledState& state, int threads)
{
    AssembledSystem sys;
    assemble_static(mesh, ops, map, spec, sys, threads);
    assemble_temperature_dependent(ops, map, spec, state.phi, sys, threads);
    assemble_velocity_dependent(ops, map, spec, state.u, sys, threads);
    return sys;
}

}  // namespace stvem
