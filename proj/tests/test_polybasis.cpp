#include "oracle/dense_oracle.hpp"

#include "stvem/polybasis.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace stvem;

namespace {

ElementGeometry unit_square() { return element_geometry({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

std::vector<Point> pentagon()
{
    std::vector<Point> v;
    for (int i = 0; i < 5; ++i) v.emplace_back(std::cos(2 * std::numbers::pi * i / 5), std::sin(2 * std::numbers::pi * i / 5));
    return v;
}

Real integrate(const PolygonQuadrature<Real>& q, const std::function<Real(const Point&)>& f)
{
    Real s = 0;
    for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * f(q.points[i]);
    return s;
}

TEST(Quadrature, UnitSquare)
{
    const auto g = unit_square();
    EXPECT_NEAR(integrate(build_quadrature(g, 0), [](const Point&) { return 1.0; }), 1.0, 1e-14);
    EXPECT_NEAR(integrate(build_quadrature(g, 2), [](const Point& x) { return x.x() * x.x(); }), 1.0 / 3, 1e-13);
}

TEST(Quadrature, PentagonArea)
{
    const auto g = element_geometry(pentagon());
    const Real shoelace = signed_area<Real>(pentagon());
    EXPECT_NEAR(integrate(build_quadrature(g, 4), [](const Point&) { return 1.0; }), shoelace, 1e-13);
}

class Exactness : public ::testing::TestWithParam<int> {};

TEST_P(Exactness, MonomialsOnConvexAndConcavePolygons)
{
    const int degree = GetParam();
    const std::vector<std::vector<Point>> polys{
        pentagon(), {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}, {{0, 0}, {1, 0}, {1, 1}, {0.5, 0.3}, {0, 1}}};
    for (const auto& poly : polys) {
        const auto g = element_geometry(poly);
        const auto q = build_quadrature(g, degree);
        for (Real w : q.weights) EXPECT_GT(w, 0);
        std::vector<oracle::Vec2> v(poly.begin(), poly.end());
        const oracle::Element ref(v, 1, 16);
        for (int a = 0; a <= degree; ++a)
            for (int b = 0; a + b <= degree; ++b) {
                auto f = [&](const Point& x) { return std::pow(x.x(), a) * std::pow(x.y(), b); };
                const Real exact = ref.integrate([&](const oracle::Vec2& x) { return f(x); });
                EXPECT_NEAR(integrate(q, f), exact, 1e-12 * std::max(1.0, std::abs(exact))) << a << "," << b;
            }
    }
}

INSTANTIATE_TEST_SUITE_P(Degrees, Exactness, ::testing::Values(0, 1, 2, 4, 6, 9));

TEST(Basis, SizeAndValues)
{
    const auto g = unit_square();
    const auto basis = make_basis<Real>(g, 2);
    EXPECT_EQ(basis.size(), 6);
    const Point x(0.8, 0.1);
    const Vector v = basis.values(x);
    const Real h = std::sqrt(2.0);
    const Real xi = (0.8 - 0.5) / h, eta = (0.1 - 0.5) / h;
    EXPECT_DOUBLE_EQ(v(0), 1);
    EXPECT_NEAR(v(1), xi, 1e-15);
    EXPECT_NEAR(v(2), eta, 1e-15);
    EXPECT_NEAR(v(3), xi * xi, 1e-15);
    EXPECT_NEAR(v(4), xi * eta, 1e-15);
    EXPECT_NEAR(v(5), eta * eta, 1e-15);
    EXPECT_EQ(monomial_index(1, 1), 4);
}

TEST(Basis, DerivativeMatrixMatchesGradients)
{
    const auto g = element_geometry(pentagon());
    const auto basis = make_basis<Real>(g, 3);
    const auto low = MonomialBasis<Real>(2, basis.center(), basis.scale());
    const Point x(0.2, -0.3);
    const Matrix grads = basis.gradients(x);
    for (int d = 0; d < 2; ++d) {
        const Matrix D = basis.derivative_matrix(d);
        EXPECT_LE((D.transpose() * low.values(x) - grads.col(d)).norm(), 1e-13);
    }
    // Finite-difference check of the Laplacian matrix on one cubic.
    const Matrix L = basis.laplacian_matrix();
    const auto one = MonomialBasis<Real>(1, basis.center(), basis.scale());
    const Real e = 1e-4;
    const int i = monomial_index(2, 1);
    auto m = [&](const Point& p) { return basis.values(p)(i); };
    const Real fd = (m(x + Point(e, 0)) + m(x - Point(e, 0)) + m(x + Point(0, e)) + m(x - Point(0, e)) - 4 * m(x)) / (e * e);
    EXPECT_NEAR(L.col(i).dot(one.values(x)), fd, 1e-6);
}

TEST(Matrices, MassMatrixAgainstHighOrderQuadrature)
{
    for (int k : {1, 2}) {
        const auto g = unit_square();
        const auto basis = make_basis<Real>(g, k);
        const Matrix H = mass_matrix(basis, build_quadrature(g, 2 * k));
        EXPECT_NEAR(H(0, 0), 1.0, 1e-15);
        EXPECT_EQ((H - H.transpose()).norm(), 0.0);
        const auto fine = build_quadrature(g, 12);
        for (int a = 0; a < basis.size(); ++a)
            for (int b = 0; b < basis.size(); ++b)
                EXPECT_NEAR(H(a, b), integrate(fine, [&](const Point& x) { return basis.values(x)(a) * basis.values(x)(b); }), 1e-13);
        EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues().minCoeff(), 0);
    }
}

TEST(Matrices, StiffnessMatrix)
{
    const auto g = unit_square();
    const auto basis = make_basis<Real>(g, 2);
    const Matrix G = stiffness_matrix(basis, build_quadrature(g, 4));
    EXPECT_EQ(G.row(0).norm() + G.col(0).norm(), 0.0);
    const auto ev = Eigen::SelfAdjointEigenSolver<Matrix>(G).eigenvalues();
    EXPECT_GE(ev.minCoeff(), -1e-12);
    EXPECT_GT(ev(1), 1e-8);  // kernel is exactly the constants
    // Analytic entries: grad xi . grad xi = 1/h^2 over |E| = 1; xi^2 against eta^2 has orthogonal gradients.
    EXPECT_NEAR(G(1, 1), 0.5, 1e-14);
    EXPECT_NEAR(G(1, 2), 0.0, 1e-14);
    EXPECT_NEAR(G(3, 5), 0.0, 1e-14);
    // int (2 xi / h)^2 with xi in [-1/(2 sqrt2), 1/(2 sqrt2)]: 4/h^2 * int xi^2 = 2 * (1/24) = 1/12.
    EXPECT_NEAR(G(3, 3), 1.0 / 12, 1e-14);
}

TEST(Matrices, ScaledMassMatrixIsScaleInvariant)
{
    std::vector<Point> poly = pentagon();
    const auto g0 = element_geometry(poly);
    for (auto& p : poly) p = 0.01 * p + Point(3, -2);
    const auto g1 = element_geometry(poly);
    const Matrix h0 = mass_matrix(make_basis<Real>(g0, 2), build_quadrature(g0, 4)) / g0.area;
    const Matrix h1 = mass_matrix(make_basis<Real>(g1, 2), build_quadrature(g1, 4)) / g1.area;
    // the shifted copy loses about log10(300) digits in the vertex coordinates
    EXPECT_LE((h0 - h1).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Gauss, RulesAreExact)
{
    const GaussRule g = gauss_legendre(5);
    Real s = 0;
    for (std::size_t i = 0; i < g.points.size(); ++i) s += g.weights[i] * std::pow(g.points[i], 9);
    EXPECT_NEAR(s, 0.1, 1e-15);
    const auto l = gauss_lobatto_nodes(2);
    ASSERT_EQ(l.size(), 3u);
    EXPECT_NEAR(l[1], 0.5, 1e-15);
    const auto l3 = gauss_lobatto_nodes(3);
    EXPECT_NEAR(l3[1], 0.5 - std::sqrt(5.0) / 10, 1e-15);
}

}  // namespace
