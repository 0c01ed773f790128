#pragma once

#include "stvem/forms.hpp"

#include <utility>
#include <vector>

namespace stvem {

/// Mesh, numbering and element operators for one (mesh, k) pair.
struct Discretization {
    const PolyMesh* mesh = nullptr;
    GlobalDofMap map;
    std::vector<ElementOps> ops;
};

Discretization discretize(const PolyMesh& mesh, int k, int quad_degree = -1, int threads = 1);

struct StokesSolution {
    Vector u;
    Vector p;
    Real multiplier = 0;
    Real relative_residual = 0;
};

/// Solve [A+L1, -B^T; -B, -L2] (u, p) = (F, 0) with Dirichlet elimination and, when the velocity
/// is Dirichlet everywhere, a multiplier enforcing mean_row . p = 0.
StokesSolution solve_stokes(const AssembledSystem& sys);

/// Solve (AT + C + C_sym + L3) phi = G with Dirichlet elimination.
Vector solve_temperature(const AssembledSystem& sys, Real* relative_residual = nullptr);

/// Matrices of the energy surrogate norms.
struct NormMatrices {
    SparseMatrix velocity;     ///< mu_min |v|^2_{1,h} + L1
    SparseMatrix pressure;     ///< ||Pi^0_k q||^2 + L2
    SparseMatrix temperature;  ///< kappa_min |psi|^2_{1,h} + L3
};

NormMatrices build_norm_matrices(const Discretization& disc, const ProblemSpec& spec, const AssembledSystem& sys);

/// (triple norm of (u, p), triple norm of phi).
std::pair<Real, Real> energy_norms(const CoupledState& state, const NormMatrices& norms);

enum class InitialGuess {
    zero,          ///< phi = 0
    stokes_first,  ///< phi = temperature Dirichlet data on the boundary, 0 elsewhere
};

struct PicardOptions {
    Real tol = 1e-7;
    int max_iter = 50;
    InitialGuess initial = InitialGuess::zero;
    Real damping = 1;
    int threads = 1;
};

struct PicardReport {
    int iterations = 0;
    std::vector<Real> residual_history;
    bool converged = false;
    Real final_tolerance = 0;
    Real max_mean_violation = 0;  ///< max over Stokes solves of |mean_row . p| / ||p||
};

struct PicardResult {
    CoupledState state;
    PicardReport report;
};

PicardResult picard_solve(const ProblemSpec& spec, const Discretization& disc, const PicardOptions& options = {});
PicardResult picard_solve(const ProblemSpec& spec, const PolyMesh& mesh, const PicardOptions& options = {});

}  // namespace stvem
