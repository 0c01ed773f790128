#include "stvem/solver.hpp"

#include "stvem/parallel.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <sstream>

namespace stvem {

namespace {

using Triplets = std::vector<Eigen::Triplet<Real>>;

void append(Triplets& t, const SparseMatrix& m, Eigen::Index row_off, Eigen::Index col_off, Real scale, bool transpose = false)
{
    for (Eigen::Index j = 0; j < m.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
            const auto r = transpose ? it.col() : it.row();
            const auto c = transpose ? it.row() : it.col();
            t.emplace_back(row_off + r, col_off + c, scale * it.value());
        }
}

/// Direct solve of K x = b with the listed DOFs fixed to the given values.
struct ReducedSolve {
    Vector x;
    Real relative_residual = 0;
};

ReducedSolve solve_with_dirichlet(const SparseMatrix& K, const Vector& b, const std::vector<int>& fixed,
                                  const Vector& fixed_values, const char* what)
{
    const auto n = K.rows();
    std::vector<int> reduced(static_cast<std::size_t>(n), 0);
    Vector x = Vector::Zero(n);
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        reduced[static_cast<std::size_t>(fixed[i])] = -1;
        x(fixed[i]) = fixed_values(static_cast<Eigen::Index>(i));
    }
    int nf = 0;
    for (auto& r : reduced)
        if (r == 0) r = nf++;

    Vector rhs(nf);
    for (Eigen::Index i = 0; i < n; ++i)
        if (reduced[static_cast<std::size_t>(i)] >= 0) rhs(reduced[static_cast<std::size_t>(i)]) = b(i);
    Triplets t;
    t.reserve(static_cast<std::size_t>(K.nonZeros()));
    for (Eigen::Index j = 0; j < K.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(K, j); it; ++it) {
            const int ri = reduced[static_cast<std::size_t>(it.row())];
            const int ci = reduced[static_cast<std::size_t>(it.col())];
            if (ri < 0) continue;
            if (ci >= 0) t.emplace_back(ri, ci, it.value());
            else rhs(ri) -= it.value() * x(it.col());
        }
    SparseMatrix Kr(nf, nf);
    Kr.setFromTriplets(t.begin(), t.end());
    Kr.makeCompressed();

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(Kr);
    if (lu.info() != Eigen::Success)
        throw SolveError(std::string(what) + ": sparse factorization failed (" + lu.lastErrorMessage() + ")");
    Vector xr = lu.solve(rhs);
    // One step of iterative refinement.
    const Vector r0 = rhs - Kr * xr;
    xr += lu.solve(r0);
    if (!xr.allFinite()) throw SolveError(std::string(what) + ": solution is not finite");

    ReducedSolve out;
    const Real bnorm = rhs.norm();
    out.relative_residual = (rhs - Kr * xr).norm() / (bnorm > 0 ? bnorm : Real(1));
    for (Eigen::Index i = 0; i < n; ++i)
        if (reduced[static_cast<std::size_t>(i)] >= 0) x(i) = xr(reduced[static_cast<std::size_t>(i)]);
    out.x = std::move(x);
    return out;
}

}  // namespace

Discretization discretize(const PolyMesh& mesh, int k, int quad_degree, int threads)
{
    Discretization d;
    d.mesh = &mesh;
    d.map = GlobalDofMap(mesh, k);
    d.ops = build_mesh_ops(mesh, k, quad_degree, threads);
    return d;
}

StokesSolution solve_stokes(const AssembledSystem& sys)
{
    const Eigen::Index nu = sys.A.rows();
    const Eigen::Index np = sys.L2.rows();
    const Eigen::Index n = nu + np;
    Triplets t;
    append(t, sys.A, 0, 0, 1);
    append(t, sys.L1, 0, 0, 1);
    append(t, sys.B, 0, nu, -1, true);
    append(t, sys.B, nu, 0, -1);
    append(t, sys.L2, nu, nu, -1);
    if (sys.L2.nonZeros() == 0 && np > 0) {
        // Unstabilized equal-order pairs leave spurious pressure modes in ker B^T. A tiny
        // diagonal makes the factorization regular; those modes are not excited by the load.
        Real scale = 0;
        for (Eigen::Index j = 0; j < sys.A.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(sys.A, j); it; ++it) scale = std::max(scale, std::abs(it.value()));
        for (Eigen::Index i = 0; i < np; ++i) t.emplace_back(nu + i, nu + i, -1e-12 * scale);
    }
    SparseMatrix K(n, n);
    K.setFromTriplets(t.begin(), t.end());
    Vector b = Vector::Zero(n);
    b.head(nu) = sys.F;

    std::vector<int> fixed = sys.u_bc.dofs;
    Vector values = sys.u_bc.values;
    Eigen::Index pin = -1;
    Real lambda = 0;
    if (sys.mean_constraint) {
        // A dense mean row ruins the sparse factorization. Testing with the pressure constant z
        // gives the multiplier directly, lambda = (B^T z) . u_D / (mean_row . z), so its term
        // moves to the load; then one pressure DOF is pinned and the result shifted.
        const Real denom = sys.mean_row.dot(sys.pressure_constant);
        if (!(std::abs(denom) > 0)) throw SolveError("Stokes system: pressure constant has zero mean");
        const Vector btz = sys.B.transpose() * sys.pressure_constant;
        Real flux = 0;
        for (std::size_t i = 0; i < sys.u_bc.dofs.size(); ++i)
            flux += btz(sys.u_bc.dofs[i]) * sys.u_bc.values(static_cast<Eigen::Index>(i));
        lambda = flux / denom;
        b.segment(nu, np) = -lambda * sys.mean_row;
        sys.pressure_constant.cwiseAbs().maxCoeff(&pin);
        fixed.push_back(static_cast<int>(nu + pin));
        values.conservativeResize(values.size() + 1);
        values(values.size() - 1) = 0;
    }
    const auto solved = solve_with_dirichlet(K, b, fixed, values, "Stokes system");
    StokesSolution s;
    s.u = solved.x.head(nu);
    s.p = solved.x.segment(nu, np);
    s.multiplier = lambda;
    if (pin >= 0) s.p -= (sys.mean_row.dot(s.p) / sys.mean_row.dot(sys.pressure_constant)) * sys.pressure_constant;
    s.relative_residual = solved.relative_residual;
    return s;
}

Vector solve_temperature(const AssembledSystem& sys, Real* relative_residual)
{
    SparseMatrix K = sys.AT + sys.C + sys.L3;
    if (sys.C_sym.nonZeros() > 0) K += sys.C_sym;
    const auto solved = solve_with_dirichlet(K, sys.G, sys.phi_bc.dofs, sys.phi_bc.values, "temperature system");
    if (relative_residual) *relative_residual = solved.relative_residual;
    return solved.x;
}

NormMatrices build_norm_matrices(const Discretization& disc, const ProblemSpec& spec, const AssembledSystem& sys)
{
    const int ns = disc.map.size();
    Triplets tk, tm;
    for (int c = 0; c < static_cast<int>(disc.ops.size()); ++c) {
        const auto& e = disc.ops[static_cast<std::size_t>(c)];
        const Matrix h1 = e.H.topLeftCorner(e.n_km1(), e.n_km1());
        const Matrix k1 = e.pi_grad[0].transpose() * h1 * e.pi_grad[0] + e.pi_grad[1].transpose() * h1 * e.pi_grad[1] + e.S1;
        const Matrix m0 = e.pi_zero.transpose() * e.H * e.pi_zero;
        const auto& sd = disc.map.cell_dofs(c);
        for (std::size_t i = 0; i < sd.size(); ++i)
            for (std::size_t j = 0; j < sd.size(); ++j) {
                tk.emplace_back(sd[i], sd[j], k1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
                tm.emplace_back(sd[i], sd[j], m0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            }
    }
    SparseMatrix K1(ns, ns), M0(ns, ns);
    K1.setFromTriplets(tk.begin(), tk.end());
    M0.setFromTriplets(tm.begin(), tm.end());
    Triplets tv;
    append(tv, K1, 0, 0, spec.mu.min);
    append(tv, K1, ns, ns, spec.mu.min);
    SparseMatrix V(2 * ns, 2 * ns);
    V.setFromTriplets(tv.begin(), tv.end());

    NormMatrices n;
    n.velocity = V + sys.L1;
    n.pressure = M0 + sys.L2;
    n.temperature = spec.kappa.min * K1 + sys.L3;
    return n;
}

namespace {

Real quadratic_norm(const SparseMatrix& m, const Vector& v)
{
    if (v.size() == 0) return 0;
    return std::sqrt(std::max(Real(0), v.dot(m * v)));
}

}  // namespace

std::pair<Real, Real> energy_norms(const CoupledState& state, const NormMatrices& norms)
{
    const Real up = std::sqrt(std::pow(quadratic_norm(norms.velocity, state.u), 2) +
                              std::pow(quadratic_norm(norms.pressure, state.p), 2));
    return {up, quadratic_norm(norms.temperature, state.phi)};
}

PicardResult picard_solve(const ProblemSpec& spec, const Discretization& disc, const PicardOptions& options)
{
    spec.validate();
    if (spec.k != disc.map.k()) throw ConfigError("problem order does not match the discretization order");
    if (!(options.tol >= 0)) throw ConfigError("Picard tolerance must be non-negative");
    if (options.max_iter < 1) throw ConfigError("max_iter must be at least 1");
    if (!(options.damping > 0 && options.damping <= 1)) throw ConfigError("damping must lie in (0, 1]");

    AssembledSystem sys;
    assemble_static(*disc.mesh, disc.ops, disc.map, spec, sys, options.threads);
    const NormMatrices norms = build_norm_matrices(disc, spec, sys);

    PicardResult result;
    auto& state = result.state;
    state = CoupledState::zero(disc.map);
    if (options.initial == InitialGuess::stokes_first)
        for (std::size_t i = 0; i < sys.phi_bc.dofs.size(); ++i)
            state.phi(sys.phi_bc.dofs[i]) = sys.phi_bc.values(static_cast<Eigen::Index>(i));

    auto& report = result.report;
    report.final_tolerance = options.tol;
    for (int it = 1; it <= options.max_iter; ++it) {
        assemble_temperature_dependent(disc.ops, disc.map, spec, state.phi, sys, options.threads);
        const StokesSolution stokes = solve_stokes(sys);
        if (sys.mean_constraint) {
            const Real pn = stokes.p.norm();
            const Real violation = std::abs(sys.mean_row.dot(stokes.p)) / (pn > 0 ? pn : Real(1));
            report.max_mean_violation = std::max(report.max_mean_violation, violation);
        }
        assemble_velocity_dependent(disc.ops, disc.map, spec, stokes.u, sys, options.threads);
        const Vector phi_star = solve_temperature(sys);
        const Vector phi_new = options.damping * phi_star + (1 - options.damping) * state.phi;

        const Real increment = quadratic_norm(norms.velocity, stokes.u - state.u) + quadratic_norm(norms.temperature, phi_new - state.phi);
        if (!std::isfinite(increment) || !stokes.u.allFinite() || !phi_new.allFinite()) {
            std::ostringstream os;
            os << "Picard iteration " << it << " produced a non-finite iterate";
            throw SolveError(os.str());
        }
        state.u = stokes.u;
        state.p = stokes.p;
        state.mean_multiplier = stokes.multiplier;
        state.phi = phi_new;
        report.iterations = it;
        report.residual_history.push_back(increment);
        if (increment <= options.tol || std::isinf(options.tol)) {
            report.converged = true;
            break;
        }
    }
    return result;
}

PicardResult picard_solve(const ProblemSpec& spec, const PolyMesh& mesh, const PicardOptions& options)
{
    const Discretization disc = discretize(mesh, spec.k, spec.quad_degree, options.threads);
    return picard_solve(spec, disc, options);
}

}  // namespace stvem
