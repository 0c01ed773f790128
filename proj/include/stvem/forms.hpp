#pragma once

#include "stvem/common.hpp"
#include "stvem/element_ops.hpp"
#include "stvem/geometry.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stvem {

using SparseMatrix = Eigen::SparseMatrix<Real>;
using ScalarField = std::function<Real(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

/// Coefficient depending on temperature, with its declared bounds.
struct Coefficient {
    std::function<Real(Real)> value;
    Real min = 0;  ///< lower bound over the declared temperature range
    Real max = 0;  ///< upper bound over the declared temperature range
    bool constant = false;

    static Coefficient constant_value(Real c) { return {[c](Real) { return c; }, c, c, true}; }
    Real operator()(Real phi) const { return value(phi); }
};

/// Boundary data on one marker. No velocity: zero traction. No temperature: zero flux.
struct BoundaryCondition {
    std::optional<VectorField> velocity;
    std::optional<ScalarField> temperature;
};

enum class ConvectionForm {
    skew,       ///< 1/2 (c(u; phi, psi) - c(u; psi, phi))
    advective,  ///< c(u; phi, psi); reproduces constants with open outflow
};

struct ProblemSpec {
    int k = 1;
    Coefficient mu = Coefficient::constant_value(1);
    Coefficient kappa = Coefficient::constant_value(1);
    Real phi_min = -1e300;  ///< declared temperature range used when checking mu bounds
    Real phi_max = 1e300;
    Real lipschitz_mu = 0;
    Real alpha = 0;
    std::optional<VectorField> buoyancy;      ///< f in alpha f phi
    std::optional<VectorField> fixed_source;  ///< F
    std::optional<ScalarField> heat_source;   ///< g
    /// Marker name -> condition; "*" applies to markers without an entry.
    std::map<std::string, BoundaryCondition> boundary;
    Real c1 = 1, c2 = 1, c3 = 1;
    bool stabilized = true;
    ConvectionForm convection = ConvectionForm::skew;
    int quad_degree = -1;  ///< < 0: 2k+2

    Real tau1(Real) const { return stabilized ? c1 : 0; }
    Real tau2(Real h) const { return stabilized ? c2 * h * h : 0; }
    Real tau3(Real h) const { return stabilized ? c3 * h : 0; }

    /// Throws ConfigError for out-of-range parameters.
    void validate() const;
    /// Throws ConfigError when markers and boundary entries do not match.
    void check_markers(const PolyMesh& mesh) const;
    const BoundaryCondition& condition(const std::string& marker) const;
    /// True when every boundary marker carries velocity Dirichlet data.
    bool velocity_fully_dirichlet(const PolyMesh& mesh) const;
};

/// Coefficients of Pi^0_k of a scalar or vector field on one element.
Vector project_scalar(const ElementOps& ops, const Vector& local_dofs);

/// Viscous form (2N x 2N) for the local DOF ordering [u1; u2].
Matrix local_viscous(const ElementOps& ops, const ProblemSpec& spec, const Vector& phi_coeffs);
/// Divergence form b(v, q): rows are pressure DOFs, columns velocity DOFs.
Matrix local_divergence(const ElementOps& ops);
Matrix local_temperature(const ElementOps& ops, const ProblemSpec& spec, const Vector& phi_coeffs);
/// One-sided c(u; phi, psi): rows psi, columns phi; u_coeffs holds Pi^0_k of both components.
Matrix local_convection(const ElementOps& ops, const std::array<Vector, 2>& u_coeffs);
Matrix local_convection_skew(const ElementOps& ops, const std::array<Vector, 2>& u_coeffs);

struct LpsTerms {
    Matrix L1;  ///< velocity, 2N x 2N
    Matrix L2;  ///< pressure, N x N
    Matrix L3;  ///< temperature, N x N
};
LpsTerms local_lps_terms(const ElementOps& ops, const ProblemSpec& spec);

struct LocalLoads {
    Vector momentum;     ///< 2N
    Vector temperature;  ///< N
};
LocalLoads local_loads(const ElementOps& ops, const ProblemSpec& spec, const Vector& phi_coeffs);

/// Per-element operators for a whole mesh (parallel over cells, deterministic order).
std::vector<ElementOps> build_mesh_ops(const PolyMesh& mesh, int k, int quad_degree = -1, int threads = 1);

/// Global DOF vectors. Velocity is stacked [u1; u2].
struct CoupledState {
    Vector u;
    Vector p;
    Vector phi;
    Real mean_multiplier = 0;

    static CoupledState zero(const GlobalDofMap& map);
};

struct DirichletData {
    std::vector<int> dofs;  ///< sorted
    Vector values;          ///< aligned with dofs
};

struct AssembledSystem {
    SparseMatrix A;       ///< viscous, 2Ns x 2Ns
    SparseMatrix B;       ///< divergence, Ns x 2Ns
    SparseMatrix L1, L2;  ///< LPS velocity / pressure
    SparseMatrix AT;      ///< diffusion + stabilizer
    SparseMatrix C;       ///< skew convection
    SparseMatrix C_sym;   ///< symmetric remainder of the one-sided form; zero in skew mode
    SparseMatrix L3;      ///< LPS temperature
    Vector F;             ///< momentum load
    Vector G;             ///< heat load
    Vector mean_row;      ///< int Pi^0_k p = mean_row . p
    Vector pressure_constant;  ///< DOFs of p = 1
    bool mean_constraint = true;
    DirichletData u_bc;
    DirichletData phi_bc;
};

DirichletData velocity_dirichlet(const PolyMesh& mesh, const GlobalDofMap& map, const ProblemSpec& spec);
DirichletData temperature_dirichlet(const PolyMesh& mesh, const GlobalDofMap& map, const ProblemSpec& spec);

/// Blocks that do not depend on the iterate: B, L1, L2, L3, mean row, Dirichlet data.
void assemble_static(const PolyMesh& mesh, const std::vector<ElementOps>& ops, const GlobalDofMap& map,
                     const ProblemSpec& spec, AssembledSystem& sys, int threads = 1);
/// Blocks depending on the temperature iterate: A, F, and AT, G.
void assemble_temperature_dependent(const std::vector<ElementOps>& ops, const GlobalDofMap& map,
                                    const ProblemSpec& spec, const Vector& phi, AssembledSystem& sys, int threads = 1);
/// Blocks depending on the velocity iterate: C and C_sym.
void assemble_velocity_dependent(const std::vector<ElementOps>& ops, const GlobalDofMap& map,
                                 const ProblemSpec& spec, const Vector& u, AssembledSystem& sys, int threads = 1);

AssembledSystem assemble_global(const PolyMesh& mesh, const std::vector<ElementOps>& ops, const GlobalDofMap& map,
                                const ProblemSpec& spec, const CoupledState& state, int threads = 1);

/// Gather local DOFs of a global scalar vector.
Vector gather(const Vector& global, const std::vector<int>& dofs);

}  // namespace stvem
