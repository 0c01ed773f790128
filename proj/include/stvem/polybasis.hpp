#pragma once

#include "stvem/common.hpp"
#include "stvem/geometry.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace stvem {

/// Index of the monomial xi^a eta^b in graded lexicographic order: 1, xi, eta, xi^2, xi eta, eta^2, ...
constexpr int monomial_index(int a, int b)
{
    const int d = a + b;
    return d * (d + 1) / 2 + b;
}

/// Exponent pairs of all monomials of total degree <= degree, in graded lexicographic order.
inline std::vector<std::array<int, 2>> monomial_exponents(int degree)
{
    std::vector<std::array<int, 2>> out;
    for (int d = 0; d <= degree; ++d)
        for (int b = 0; b <= d; ++b) out.push_back({d - b, b});
    return out;
}

/// Scaled monomials m_alpha(x) = ((x - x_E) / h_E)^alpha of total degree <= k.
template <typename Scalar>
class MonomialBasis {
public:
    MonomialBasis() = default;
    MonomialBasis(int degree, const Point2<Scalar>& center, Scalar scale)
        : degree_(degree), center_(center), scale_(scale), exponents_(monomial_exponents(degree))
    {
    }

    int degree() const { return degree_; }
    int size() const { return static_cast<int>(exponents_.size()); }
    const Point2<Scalar>& center() const { return center_; }
    Scalar scale() const { return scale_; }
    const std::vector<std::array<int, 2>>& exponents() const { return exponents_; }

    Point2<Scalar> local(const Point2<Scalar>& x) const { return (x - center_) / scale_; }

    DenseVector<Scalar> values(const Point2<Scalar>& x) const { return values_upto(x, degree_); }

    DenseVector<Scalar> values_upto(const Point2<Scalar>& x, int degree) const
    {
        const Point2<Scalar> xi = local(x);
        const int n = polynomial_dimension(degree);
        DenseVector<Scalar> v(n);
        v(0) = Scalar(1);
        for (int d = 1; d <= degree; ++d) {
            const int first = monomial_index(d, 0);
            const int prev = monomial_index(d - 1, 0);
            // xi^d from xi^(d-1); every other entry from its eta-predecessor.
            v(first) = v(prev) * xi.x();
            for (int b = 1; b <= d; ++b) v(first + b) = v(prev + b - 1) * xi.y();
        }
        return v;
    }

    /// Gradients with respect to x (not xi), one row per monomial.
    DenseMatrix<Scalar> gradients(const Point2<Scalar>& x) const
    {
        const DenseVector<Scalar> v = values_upto(x, std::max(degree_ - 1, 0));
        DenseMatrix<Scalar> g = DenseMatrix<Scalar>::Zero(size(), 2);
        for (int i = 0; i < size(); ++i) {
            const auto [a, b] = exponents_[static_cast<std::size_t>(i)];
            if (a > 0) g(i, 0) = Scalar(a) * v(monomial_index(a - 1, b)) / scale_;
            if (b > 0) g(i, 1) = Scalar(b) * v(monomial_index(a, b - 1)) / scale_;
        }
        return g;
    }

    /// Coefficients in the basis of degree (degree-1) of the derivative along direction dir.
    DenseMatrix<Scalar> derivative_matrix(int dir) const
    {
        const int rows = polynomial_dimension(degree_ - 1);
        DenseMatrix<Scalar> d = DenseMatrix<Scalar>::Zero(std::max(rows, 0), size());
        for (int i = 0; i < size(); ++i) {
            const auto [a, b] = exponents_[static_cast<std::size_t>(i)];
            if (dir == 0 && a > 0) d(monomial_index(a - 1, b), i) = Scalar(a) / scale_;
            if (dir == 1 && b > 0) d(monomial_index(a, b - 1), i) = Scalar(b) / scale_;
        }
        return d;
    }

    /// Coefficients of the Laplacian of each monomial in the basis of degree (degree-2).
    DenseMatrix<Scalar> laplacian_matrix() const
    {
        const int rows = polynomial_dimension(degree_ - 2);
        DenseMatrix<Scalar> d = DenseMatrix<Scalar>::Zero(std::max(rows, 0), size());
        const Scalar s2 = scale_ * scale_;
        for (int i = 0; i < size(); ++i) {
            const auto [a, b] = exponents_[static_cast<std::size_t>(i)];
            if (a > 1) d(monomial_index(a - 2, b), i) += Scalar(a * (a - 1)) / s2;
            if (b > 1) d(monomial_index(a, b - 2), i) += Scalar(b * (b - 1)) / s2;
        }
        return d;
    }

    /// Evaluate sum_i coeffs(i) m_i(x).
    template <typename Derived>
    Scalar evaluate(const Eigen::MatrixBase<Derived>& coeffs, const Point2<Scalar>& x) const
    {
        return values_upto(x, degree_).head(coeffs.size()).dot(coeffs);
    }

private:
    int degree_ = 0;
    Point2<Scalar> center_ = Point2<Scalar>::Zero();
    Scalar scale_ = Scalar(1);
    std::vector<std::array<int, 2>> exponents_;
};

template <typename Scalar>
MonomialBasis<Scalar> make_basis(const ElementGeometry& geom, int degree)
{
    return MonomialBasis<Scalar>(degree, geom.centroid.template cast<Scalar>(), Scalar(geom.diameter));
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct GaussRule {
    std::vector<Real> points;   ///< on [0, 1]
    std::vector<Real> weights;  ///< sum to 1
};

/// n-point Gauss-Legendre rule on [0,1] (exact to degree 2n-1).
GaussRule gauss_legendre(int n);

/// The n+1 Gauss-Lobatto nodes on [0,1] (including both end points), ascending.
std::vector<Real> gauss_lobatto_nodes(int n);

template <typename Scalar>
struct PolygonQuadrature {
    std::vector<Point2<Scalar>> points;
    std::vector<Scalar> weights;
    int degree = 0;

    std::size_t size() const { return points.size(); }
};

/// Composite collapsed-Gauss rule over the element sub-triangulation, exact to `degree`.
PolygonQuadrature<Real> build_quadrature(const ElementGeometry& geom, int degree);

/// Collapsed-Gauss rule on a single triangle, exact to `degree`; all weights positive.
PolygonQuadrature<Real> triangle_quadrature(const Point& a, const Point& b, const Point& c, int degree);

template <typename Scalar>
DenseMatrix<Scalar> mass_matrix(const MonomialBasis<Scalar>& basis, const PolygonQuadrature<Scalar>& quad)
{
    const int n = basis.size();
    DenseMatrix<Scalar> h = DenseMatrix<Scalar>::Zero(n, n);
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const DenseVector<Scalar> m = basis.values(quad.points[q]);
        h.noalias() += quad.weights[q] * m * m.transpose();
    }
    return Scalar(0.5) * (h + h.transpose());
}

/// Mass matrix weighted by values of a coefficient at the quadrature points.
template <typename Scalar, typename Derived>
DenseMatrix<Scalar> weighted_mass_matrix(const MonomialBasis<Scalar>& basis, const PolygonQuadrature<Scalar>& quad,
                                         const Eigen::MatrixBase<Derived>& weights_at_points, int degree)
{
    const int n = polynomial_dimension(degree);
    DenseMatrix<Scalar> h = DenseMatrix<Scalar>::Zero(n, n);
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const DenseVector<Scalar> m = basis.values_upto(quad.points[q], degree);
        h.noalias() += (quad.weights[q] * weights_at_points(static_cast<Eigen::Index>(q))) * m * m.transpose();
    }
    return Scalar(0.5) * (h + h.transpose());
}

template <typename Scalar>
DenseMatrix<Scalar> stiffness_matrix(const MonomialBasis<Scalar>& basis, const PolygonQuadrature<Scalar>& quad)
{
    const int n = basis.size();
    DenseMatrix<Scalar> g = DenseMatrix<Scalar>::Zero(n, n);
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const DenseMatrix<Scalar> grad = basis.gradients(quad.points[q]);
        g.noalias() += quad.weights[q] * grad * grad.transpose();
    }
    return Scalar(0.5) * (g + g.transpose());
}

}  // namespace stvem
