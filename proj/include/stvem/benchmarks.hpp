#pragma once

#include "stvem/postprocess.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stvem {

enum class CaseId { ex1, ex2_diffusive, ex2_convective, ex3, ex4_mild, ex4_strong };

CaseId parse_case(const std::string& name);
std::string to_string(CaseId id);

struct Sources {
    VectorField momentum;  ///< F
    ScalarField heat;      ///< g
};

struct BenchmarkCase {
    CaseId id = CaseId::ex1;
    std::string name;
    Domain domain;
    ProblemSpec spec;  ///< k is set per run
    std::optional<ExactSolution> exact;
    ScalarField phi_reference;  ///< reference for nodal extremes
    std::vector<MeshFamily> families;
    std::vector<Real> h_list;
    std::vector<int> orders;
    InitialGuess initial = InitialGuess::zero;
};

/// Case definition. kappa overrides the conductivity scale where the case has one.
BenchmarkCase make_case(CaseId id, std::optional<Real> kappa = std::nullopt);

/// Closed-form sources so that the exact fields solve the strong equations.
/// Example 4 has zero sources.
Sources make_sources(CaseId id, std::optional<Real> kappa = std::nullopt);

struct CaseOverrides {
    std::optional<std::vector<Real>> h_list;
    std::optional<std::vector<int>> orders;
    std::optional<std::vector<MeshFamily>> families;
    std::optional<Real> c1, c2, c3;
    std::optional<Real> kappa;
    std::optional<ConvectionForm> convection;
    bool no_stab = false;
    Real tol = 1e-7;
    int max_iter = 50;
    int threads = 1;
    unsigned seed = 42;
};

/// Apply overrides to a case definition.
void apply_overrides(BenchmarkCase& bc, const CaseOverrides& o);

/// One solve: mesh, operators, Picard, errors. disc refers to the mesh passed to run_single.
struct CaseRun {
    ConvergenceRecord record;
    Discretization disc;
    PicardReport report;
    CoupledState state;
};

CaseRun run_single(const BenchmarkCase& bc, const PolyMesh& mesh, MeshFamily family, int k, Real h,
                   const PicardOptions& opts);

/// Every (family, k, h) of the case; non-converged solves are flagged and the study continues.
std::vector<ConvergenceRecord> run_case(CaseId id, const CaseOverrides& overrides = {});
std::vector<ConvergenceRecord> run_case(const BenchmarkCase& bc, const CaseOverrides& overrides = {});

/// CSV with columns case, family, k, h, then each error norm followed by its rate, then diagnostics.
std::string records_csv(const std::vector<ConvergenceRecord>& records);

}  // namespace stvem
