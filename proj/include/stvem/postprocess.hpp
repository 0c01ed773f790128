#pragma once

#include "stvem/solver.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace stvem {

using Matrix2 = Eigen::Matrix<Real, 2, 2>;

/// Exact fields with analytic gradients; grad_u(x)(i, j) = d u_i / d x_j.
struct ExactSolution {
    VectorField u;
    std::function<Matrix2(const Point&)> grad_u;
    ScalarField p;
    ScalarField phi;
    VectorField grad_phi;
};

struct ErrorBundle {
    Real E_u_H1 = 0;
    Real E_u_L2 = 0;
    Real E_p_L2 = 0;
    Real E_phi_H1 = 0;
    Real E_phi_L2 = 0;
    Real div_violation = 0;
    Real phi_min_dev = 0;  ///< min of (phi_h - reference) over nodal DOFs
    Real phi_max_dev = 0;  ///< max of (phi_h - reference) over nodal DOFs
};

ErrorBundle compute_errors(const CoupledState& state, const ExactSolution& exact, const Discretization& disc);

/// || Pi^0_{k-1} div u_h ||_0.
Real divergence_violation(const Vector& u, const Discretization& disc);

/// (min, max) of phi_h - reference over vertex and edge DOFs.
std::pair<Real, Real> nodal_extremes(const Vector& phi, const Discretization& disc, const ScalarField& reference);

struct ConvergenceRecord {
    std::string case_name;
    std::string family;
    int k = 1;
    Real h = 0;
    ErrorBundle errors;
    int iterations = 0;
    bool converged = false;
    Real wall_time = 0;
};

/// rate = log(e_i / e_{i+1}) / log(h_i / h_{i+1}); +inf when the coarse error is zero.
Real observed_rate(Real e_coarse, Real e_fine, Real h_coarse, Real h_fine);

/// Rates for the five norms (E_u_H1, E_u_L2, E_p_L2, E_phi_H1, E_phi_L2) between consecutive records.
std::vector<std::array<Real, 5>> observed_rates(const std::vector<ConvergenceRecord>& records);

enum class ExportFormat { vtk_legacy, csv };

/// Per-vertex averages of Pi^nabla_k u_h, Pi^0_k p_h and Pi^0_k phi_h.
struct VertexFields {
    std::vector<Point> u;
    std::vector<Real> p;
    std::vector<Real> phi;
};

VertexFields vertex_fields(const CoupledState& state, const Discretization& disc);
std::string export_string(const CoupledState& state, const Discretization& disc, ExportFormat format);
void export_fields(const CoupledState& state, const Discretization& disc, const std::string& path, ExportFormat format);

}  // namespace stvem
