#pragma once

#include "stvem/common.hpp"
#include "stvem/geometry.hpp"
#include "stvem/polybasis.hpp"

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace stvem {

/// Local DOF layout of the enhanced space of order k on one polygon:
/// vertex values, k-1 interior Gauss-Lobatto values per edge, then moments against M_{k-2}
/// scaled by 1/|E|.
struct DofLayout {
    int k = 1;
    int n_vertices = 0;

    DofLayout() = default;
    DofLayout(int order, int vertices) : k(order), n_vertices(vertices) {}

    int edge_points() const { return k - 1; }
    int n_edge() const { return n_vertices * (k - 1); }
    int n_internal() const { return polynomial_dimension(k - 2); }
    int size() const { return n_vertices * k + n_internal(); }

    int vertex_dof(int v) const { return v; }
    /// j-th interior point of local edge e, counted from local vertex e towards e+1.
    int edge_dof(int e, int j) const { return n_vertices + e * (k - 1) + j; }
    int internal_dof(int alpha) const { return n_vertices * k + alpha; }
};

/// Dense per-element operators. The pi_* matrices map local DOFs to monomial coefficients.
struct ElementOps {
    int k = 1;
    ElementGeometry geom;
    DofLayout layout;
    MonomialBasis<Real> basis;        ///< degree k
    PolygonQuadrature<Real> quad;     ///< exact to quad.degree >= 2k

    Matrix H;              ///< mass matrix of M_k
    Matrix D;              ///< DOFs of each monomial (N x n_k)
    Matrix B;              ///< right-hand side of the energy projection
    Matrix G;              ///< B * D
    Matrix pi_nabla;       ///< Pi^nabla_k  (n_k x N)
    Matrix C;              ///< moments int m_alpha w for |alpha| <= k  (n_k x N)
    Matrix pi_zero;        ///< Pi^0_k  (n_k x N)
    std::array<Matrix, 2> pi_grad;    ///< Pi^0_{k-1} d/dx_d  (n_{k-1} x N)
    std::array<Matrix, 2> pi_grad_k;  ///< Pi^0_k d/dx_d  (n_k x N)
    Matrix pi_nabla_km1;   ///< Pi^nabla_{k-1}  (n_{k-1} x N)
    std::array<Matrix, 2> fluct_grad; ///< (Pi^0_k - Pi^0_{k-1}) d/dx_d  (n_k x N)
    Matrix fluct_div;      ///< (Pi^0_k - Pi^0_{k-1}) div on [u1; u2]  (n_k x 2N)
    Matrix pi_div;         ///< Pi^0_{k-1} div on [u1; u2]  (n_{k-1} x 2N)
    Matrix S1;             ///< dofi-dofi stabilizer for Pi^nabla_k
    Matrix S2;             ///< dofi-dofi stabilizer for Pi^nabla_{k-1}

    std::vector<std::string> warnings;

    int n_dofs() const { return layout.size(); }
    int n_k() const { return polynomial_dimension(k); }
    int n_km1() const { return polynomial_dimension(k - 1); }

    /// Pi^0_0 of a scalar field given its Pi^0_k coefficients.
    Real mean_of(const Vector& coeffs) const { return H.row(0).dot(coeffs) / geom.area; }
};

/// Points carrying the vertex and edge DOFs, in local DOF order (moments excluded).
std::vector<Point> nodal_points(const ElementGeometry& geom, const DofLayout& layout);

/// DOF vector of a smooth scalar function: nodal values plus quadrature moments.
Vector interpolate_dofs(const ElementGeometry& geom, const DofLayout& layout, const PolygonQuadrature<Real>& quad,
                        const MonomialBasis<Real>& basis, const std::function<Real(const Point&)>& f);

/// Matrix D: column alpha holds the DOFs of monomial m_alpha (degree up to `degree`).
Matrix dof_matrix(const ElementGeometry& geom, const DofLayout& layout, const MonomialBasis<Real>& basis,
                  const Matrix& mass, int degree);

/// Right-hand side B of the energy projection onto P_{degree}; row 0 is the boundary-mean constraint.
Matrix energy_rhs(const ElementGeometry& geom, const DofLayout& layout, const MonomialBasis<Real>& basis, int degree);

Matrix build_pi_nabla(const ElementGeometry& geom, const DofLayout& layout, const MonomialBasis<Real>& basis,
                      const Matrix& D, Matrix* B_out = nullptr, Matrix* G_out = nullptr);

/// Energy projection onto P_{degree} (degree <= k) of functions of the order-k space.
Matrix build_pi_nabla_degree(const ElementGeometry& geom, const DofLayout& layout, const MonomialBasis<Real>& basis,
                             const Matrix& D, int degree);

/// Returns Pi^0_k; optionally the moment matrix C.
Matrix build_pi_zero(const ElementGeometry& geom, const DofLayout& layout, const Matrix& H, const Matrix& pi_nabla,
                     Matrix* C_out = nullptr);

/// Pi^0_{degree} of d/dx_dir for degree in {k-1, k}; C is the moment matrix from build_pi_zero.
Matrix build_pi_grad(const ElementGeometry& geom, const DofLayout& layout, const MonomialBasis<Real>& basis,
                     const Matrix& H, const Matrix& C, int dir, int degree);

/// dofi-dofi stabilizer (I - D Pi)^T (I - D Pi).
Matrix build_stabilizer(const Matrix& D, const Matrix& pi);

struct FluctuationOps {
    std::array<Matrix, 2> grad;
    Matrix div;
};

FluctuationOps build_fluctuation(const std::array<Matrix, 2>& pi_grad_k, const std::array<Matrix, 2>& pi_grad_km1);

/// Everything above for one element. quad_degree < 0 selects the default 2k+2.
ElementOps build_element_ops(const ElementGeometry& geom, int k, int quad_degree = -1);

/// Edge trace helpers: Lagrange basis at the k+1 Gauss-Lobatto nodes of an edge, evaluated at s in [0,1].
Vector edge_lagrange(const std::vector<Real>& nodes, Real s);

/// Global scalar numbering: vertices, then edge points (edge by edge, from the lower to the higher
/// global vertex index), then cell moments. Vector fields stack two scalar copies.
class GlobalDofMap {
public:
    GlobalDofMap() = default;
    GlobalDofMap(const PolyMesh& mesh, int k);

    int k() const { return k_; }
    int size() const { return size_; }
    int vector_size() const { return 2 * size_; }
    /// Global index of each local DOF of a cell, in local DOF order.
    const std::vector<int>& cell_dofs(int cell) const { return cell_dofs_[static_cast<std::size_t>(cell)]; }
    /// [x-component DOFs, y-component DOFs] of a cell in the stacked vector numbering.
    std::vector<int> cell_vector_dofs(int cell) const;
    /// Location of a nodal DOF; moments report the cell centroid.
    const Point& position(int dof) const { return position_[static_cast<std::size_t>(dof)]; }
    bool is_moment(int dof) const { return dof >= first_moment_; }
    /// Nodal DOFs lying on edges carrying the given marker.
    std::vector<int> boundary_dofs(const std::string& marker) const;
    int num_nodal() const { return first_moment_; }

private:
    int k_ = 1;
    int size_ = 0;
    int first_moment_ = 0;
    std::vector<std::vector<int>> cell_dofs_;
    std::vector<Point> position_;
    std::map<std::string, std::vector<int>> boundary_;
};

/// Expand a polynomial of the order-k basis to DOFs: D * coeffs.
inline Vector polynomial_dofs(const ElementOps& ops, const Vector& coeffs) { return ops.D * coeffs; }

}  // namespace stvem
