#include "stvem/polybasis.hpp"

#include <cmath>

namespace stvem {

namespace {

/// Legendre polynomial P_n and its derivative at x in [-1,1].
std::pair<long double, long double> legendre(int n, long double x)
{
    long double p0 = 1, p1 = x;
    if (n == 0) return {1, 0};
    for (int j = 2; j <= n; ++j) {
        const long double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
    }
    const long double dp = n * (x * p1 - p0) / (x * x - 1);
    return {p1, dp};
}

}  // namespace

GaussRule gauss_legendre(int n)
{
    if (n < 1) throw ConfigError("Gauss-Legendre rule needs at least one point");
    GaussRule rule;
    rule.points.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const long double pi = 3.141592653589793238462643383279502884L;
    for (int i = 0; i < n; ++i) {
        long double x = std::cos(pi * (i + 0.75L) / (n + 0.5L));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(n, x);
            const long double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-19L) break;
        }
        const auto [p, dp] = legendre(n, x);
        (void)p;
        const long double w = 2 / ((1 - x * x) * dp * dp);
        // Map from [-1,1] to [0,1], ascending order.
        rule.points[static_cast<std::size_t>(n - 1 - i)] = static_cast<Real>((1 + x) / 2);
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = static_cast<Real>(w / 2);
    }
    return rule;
}

std::vector<Real> gauss_lobatto_nodes(int n)
{
    if (n < 1) throw ConfigError("Gauss-Lobatto rule needs at least two nodes");
    std::vector<Real> nodes(static_cast<std::size_t>(n + 1));
    nodes.front() = 0;
    nodes.back() = 1;
    // Interior nodes are the roots of P'_n, found by Newton on P'_n using P''_n from the Legendre ODE.
    const long double pi = 3.141592653589793238462643383279502884L;
    for (int i = 1; i < n; ++i) {
        long double x = -std::cos(pi * i / n);
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(n, x);
            const long double d2p = (2 * x * dp - n * (n + 1) * p) / (1 - x * x);
            const long double dx = dp / d2p;
            x -= dx;
            if (std::abs(dx) < 1e-19L) break;
        }
        nodes[static_cast<std::size_t>(i)] = static_cast<Real>((1 + x) / 2);
    }
    return nodes;
}

PolygonQuadrature<Real> triangle_quadrature(const Point& a, const Point& b, const Point& c, int degree)
{
    if (degree < 0) throw ConfigError("quadrature degree must be non-negative");
    // Collapsed (Duffy) map of the unit square onto the triangle; one extra point in s absorbs the Jacobian.
    const int n = std::max(1, (degree + 2 + 1) / 2);
    const GaussRule g = gauss_legendre(n);
    const Real twice = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    PolygonQuadrature<Real> quad;
    quad.degree = degree;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Real s = g.points[static_cast<std::size_t>(i)];
            const Real t = g.points[static_cast<std::size_t>(j)];
            const Real l1 = s * (1 - t);
            const Real l2 = s * t;
            quad.points.push_back(a + l1 * (b - a) + l2 * (c - a));
            quad.weights.push_back(twice * s * g.weights[static_cast<std::size_t>(i)] * g.weights[static_cast<std::size_t>(j)]);
        }
    return quad;
}

PolygonQuadrature<Real> build_quadrature(const ElementGeometry& geom, int degree)
{
    if (degree < 0) throw ConfigError("quadrature degree must be non-negative");
    PolygonQuadrature<Real> quad;
    quad.degree = degree;
    const Real scale = geom.diameter * geom.diameter;
    for (const auto& tri : geom.triangles) {
        const Point& a = geom.vertices[static_cast<std::size_t>(tri[0])];
        const Point& b = geom.vertices[static_cast<std::size_t>(tri[1])];
        const Point& c = geom.vertices[static_cast<std::size_t>(tri[2])];
        const Real twice = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
        if (!(twice > 1e-14 * scale))
            throw ElementError("degenerate sub-triangle in cell " + std::to_string(geom.cell_id));
        auto part = triangle_quadrature(a, b, c, degree);
        quad.points.insert(quad.points.end(), part.points.begin(), part.points.end());
        quad.weights.insert(quad.weights.end(), part.weights.begin(), part.weights.end());
    }
    return quad;
}

}  // namespace stvem
