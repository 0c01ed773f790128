#include "stvem/geometry.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace stvem {

namespace {

Real cross2(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2)
{
    const Real d1 = cross2(q2 - q1, p1 - q1);
    const Real d2 = cross2(q2 - q1, p2 - q1);
    const Real d3 = cross2(p2 - p1, q1 - p1);
    const Real d4 = cross2(p2 - p1, q2 - p1);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

bool point_in_triangle(const Point& p, const Point& a, const Point& b, const Point& c)
{
    return cross2(b - a, p - a) >= 0 && cross2(c - b, p - b) >= 0 && cross2(a - c, p - c) >= 0;
}

std::uint64_t edge_key(int a, int b)
{
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Point> clip_half_plane(const std::vector<Point>& polygon, const Point& normal, Real offset)
{
    std::vector<Point> out;
    const std::size_t n = polygon.size();
    out.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = polygon[i];
        const Point& b = polygon[(i + 1) % n];
        const Real da = normal.dot(a) - offset;
        const Real db = normal.dot(b) - offset;
        if (da <= 0) out.push_back(a);
        if ((da < 0 && db > 0) || (da > 0 && db < 0)) {
            const Real t = da / (da - db);
            out.push_back(a + t * (b - a));
        }
    }
    return out;
}

std::vector<Point> polygon_kernel(std::span<const Point> polygon)
{
    std::vector<Point> kernel(polygon.begin(), polygon.end());
    // Start from the bounding box so that the clipping always acts on a convex set.
    Real x0 = kernel[0].x(), x1 = x0, y0 = kernel[0].y(), y1 = y0;
    for (const auto& p : kernel) {
        x0 = std::min(x0, p.x());
        x1 = std::max(x1, p.x());
        y0 = std::min(y0, p.y());
        y1 = std::max(y1, p.y());
    }
    kernel = {Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1)};
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n && !kernel.empty(); ++i) {
        const Point& a = polygon[i];
        const Point& b = polygon[(i + 1) % n];
        const Point t = b - a;
        const Point outward(t.y(), -t.x());
        kernel = clip_half_plane(kernel, outward, outward.dot(a));
    }
    if (kernel.size() < 3 || signed_area<Real>(kernel) <= 0) return {};
    return kernel;
}

Real inscribed_radius(const std::vector<Point>& convex_polygon)
{
    if (convex_polygon.size() < 3) return 0;
    const Real diam = polygon_diameter<Real>(convex_polygon);
    const std::size_t n = convex_polygon.size();
    std::vector<Point> normals;
    std::vector<Real> offsets;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = convex_polygon[i];
        const Point& b = convex_polygon[(i + 1) % n];
        const Point t = b - a;
        if (t.norm() <= 1e-14 * diam) continue;
        const Point outward = Point(t.y(), -t.x()).normalized();
        normals.push_back(outward);
        offsets.push_back(outward.dot(a));
    }
    // Bisection on the radius: the polygon shrunk by r is non-empty iff a disc of radius r fits.
    Real lo = 0, hi = diam;
    for (int it = 0; it < 80; ++it) {
        const Real r = 0.5 * (lo + hi);
        std::vector<Point> shrunk = convex_polygon;
        for (std::size_t i = 0; i < normals.size() && !shrunk.empty(); ++i)
            shrunk = clip_half_plane(shrunk, normals[i], offsets[i] - r);
        const bool fits = shrunk.size() >= 3 && signed_area<Real>(shrunk) > 0;
        (fits ? lo : hi) = r;
    }
    return lo;
}

std::vector<std::array<int, 3>> ear_clip(std::span<const Point> polygon)
{
    const int n = static_cast<int>(polygon.size());
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::array<int, 3>> tris;
    const Real scale = polygon_diameter<Real>(polygon);
    const Real area_tol = 1e-14 * scale * scale;

    while (idx.size() > 3) {
        const int m = static_cast<int>(idx.size());
        int best = -1;
        Real best_quality = -1;
        for (int i = 0; i < m; ++i) {
            const int ia = idx[static_cast<std::size_t>((i + m - 1) % m)];
            const int ib = idx[static_cast<std::size_t>(i)];
            const int ic = idx[static_cast<std::size_t>((i + 1) % m)];
            const Point& a = polygon[static_cast<std::size_t>(ia)];
            const Point& b = polygon[static_cast<std::size_t>(ib)];
            const Point& c = polygon[static_cast<std::size_t>(ic)];
            const Real twice = cross2(b - a, c - a);
            if (twice <= area_tol) continue;
            bool contains = false;
            for (int j : idx) {
                if (j == ia || j == ib || j == ic) continue;
                const Point& p = polygon[static_cast<std::size_t>(j)];
                if (p == a || p == b || p == c) continue;
                if (point_in_triangle(p, a, b, c)) {
                    contains = true;
                    break;
                }
            }
            if (contains) continue;
            // Prefer well-shaped ears: ratio of area to squared longest side.
            const Real longest = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
            const Real quality = twice / longest;
            if (quality > best_quality) {
                best_quality = quality;
                best = i;
            }
        }
        if (best < 0) throw ElementError("ear clipping failed: polygon is not simple or is degenerate");
        const int ia = idx[static_cast<std::size_t>((best + m - 1) % m)];
        const int ib = idx[static_cast<std::size_t>(best)];
        const int ic = idx[static_cast<std::size_t>((best + 1) % m)];
        tris.push_back({ia, ib, ic});
        idx.erase(idx.begin() + best);
    }
    const Point& a = polygon[static_cast<std::size_t>(idx[0])];
    const Point& b = polygon[static_cast<std::size_t>(idx[1])];
    const Point& c = polygon[static_cast<std::size_t>(idx[2])];
    if (cross2(b - a, c - a) <= area_tol)
        throw ElementError("ear clipping produced a degenerate triangle");
    tris.push_back({idx[0], idx[1], idx[2]});
    return tris;
}

bool is_convex(std::span<const Point> polygon, Real tol)
{
    const std::size_t n = polygon.size();
    const Real scale = polygon_diameter<Real>(polygon);
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = polygon[(i + n - 1) % n];
        const Point& b = polygon[i];
        const Point& c = polygon[(i + 1) % n];
        if (cross2(b - a, c - b) < -tol * scale * scale) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

bool Domain::contains(const Point& p) const
{
    const Real eps = 1e-12 * std::max(bounds.x1 - bounds.x0, bounds.y1 - bounds.y0);
    const bool in_box = p.x() >= bounds.x0 - eps && p.x() <= bounds.x1 + eps && p.y() >= bounds.y0 - eps &&
                        p.y() <= bounds.y1 + eps;
    if (!in_box) return false;
    if (notch) {
        const bool in_notch = p.x() > notch->x0 + eps && p.x() < notch->x1 - eps && p.y() > notch->y0 + eps &&
                              p.y() < notch->y1 - eps;
        return !in_notch;
    }
    return true;
}

std::string Domain::classify_segment(const Point& a, const Point& b) const
{
    const Real eps = 1e-10 * std::max(bounds.x1 - bounds.x0, bounds.y1 - bounds.y0);
    auto on = [eps](Real u, Real v, Real c) { return std::abs(u - c) <= eps && std::abs(v - c) <= eps; };
    if (on(a.x(), b.x(), bounds.x0)) return "left";
    if (on(a.x(), b.x(), bounds.x1)) return "right";
    if (on(a.y(), b.y(), bounds.y0)) return "bottom";
    if (on(a.y(), b.y(), bounds.y1)) return "top";
    return "step";
}

MeshFamily parse_mesh_family(std::string_view name)
{
    if (name == "uniform_square") return MeshFamily::uniform_square;
    if (name == "distorted_square") return MeshFamily::distorted_square;
    if (name == "voronoi") return MeshFamily::voronoi;
    if (name == "nonconvex") return MeshFamily::nonconvex;
    if (name == "triangular") return MeshFamily::triangular;
    throw ConfigError("unknown mesh family '" + std::string(name) + "'");
}

std::string to_string(MeshFamily family)
{
    switch (family) {
    case MeshFamily::uniform_square: return "uniform_square";
    case MeshFamily::distorted_square: return "distorted_square";
    case MeshFamily::voronoi: return "voronoi";
    case MeshFamily::nonconvex: return "nonconvex";
    case MeshFamily::triangular: return "triangular";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------

PolyMesh::PolyMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells, BoundaryMap boundary)
    : vertices_(std::move(vertices)), cells_(std::move(cells))
{
    const int nv = num_vertices();
    if (cells_.empty()) throw MeshError("mesh has no cells");

    std::unordered_map<std::uint64_t, int> edge_ids;
    cell_edges_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const auto& loop = cells_[c];
        const std::string where = "cell " + std::to_string(c);
        if (loop.size() < 3) throw MeshError(where + " has fewer than 3 vertices");
        for (int v : loop)
            if (v < 0 || v >= nv) throw MeshError(where + ": bad vertex index " + std::to_string(v));
        std::vector<Point> poly = cell_polygon(static_cast<int>(c));
        if (signed_area<Real>(poly) <= 0) throw MeshError(where + " is not counter-clockwise (orientation error)");
        const std::size_t n = loop.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (loop[i] == loop[(i + 1) % n]) throw MeshError(where + " has a repeated vertex");
            for (std::size_t j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;
                if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
                    throw MeshError(where + " is self-intersecting");
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            const int a = loop[i];
            const int b = loop[(i + 1) % n];
            const auto key = edge_key(a, b);
            auto [it, inserted] = edge_ids.try_emplace(key, num_edges());
            if (inserted) {
                Edge e;
                e.v0 = std::min(a, b);
                e.v1 = std::max(a, b);
                e.cells[0] = static_cast<int>(c);
                edges_.push_back(e);
            } else {
                Edge& e = edges_[static_cast<std::size_t>(it->second)];
                if (e.cells[1] >= 0) throw MeshError("edge (" + std::to_string(a) + "," + std::to_string(b) + ") shared by more than two cells");
                e.cells[1] = static_cast<int>(c);
            }
            cell_edges_[c].push_back(it->second);
        }
    }

    edge_markers_.assign(edges_.size(), std::string());
    for (const auto& [name, list] : boundary) {
        for (const auto& pair : list) {
            auto it = edge_ids.find(edge_key(pair[0], pair[1]));
            if (it == edge_ids.end())
                throw MeshError("boundary marker '" + name + "' references a non-existent edge (" +
                                std::to_string(pair[0]) + "," + std::to_string(pair[1]) + ")");
            const auto id = static_cast<std::size_t>(it->second);
            if (!edges_[id].boundary())
                throw MeshError("boundary marker '" + name + "' references an interior edge");
            if (!edge_markers_[id].empty())
                throw MeshError("boundary edge carries two markers: '" + edge_markers_[id] + "' and '" + name + "'");
            edge_markers_[id] = name;
        }
    }
    for (std::size_t e = 0; e < edges_.size(); ++e)
        if (edges_[e].boundary() && edge_markers_[e].empty()) edge_markers_[e] = "boundary";

    h_ = 0;
    for (int c = 0; c < num_cells(); ++c) {
        auto poly = cell_polygon(c);
        h_ = std::max(h_, polygon_diameter<Real>(poly));
    }
}

std::vector<Point> PolyMesh::cell_polygon(int cell) const
{
    const auto& loop = cells_[static_cast<std::size_t>(cell)];
    std::vector<Point> poly;
    poly.reserve(loop.size());
    for (int v : loop) poly.push_back(vertices_[static_cast<std::size_t>(v)]);
    return poly;
}

std::vector<std::string> PolyMesh::markers() const
{
    std::set<std::string> names;
    for (const auto& m : edge_markers_)
        if (!m.empty()) names.insert(m);
    return {names.begin(), names.end()};
}

PolyMesh::BoundaryMap PolyMesh::boundary_map() const
{
    BoundaryMap map;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        if (edge_markers_[e].empty()) continue;
        // Store the edge in the orientation of its owning cell (CCW around the domain).
        const Edge& edge = edges_[e];
        const auto& loop = cells_[static_cast<std::size_t>(edge.cells[0])];
        const auto& ids = cell_edges_[static_cast<std::size_t>(edge.cells[0])];
        const auto local = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), static_cast<int>(e)) - ids.begin());
        map[edge_markers_[e]].push_back({loop[local], loop[(local + 1) % loop.size()]});
    }
    return map;
}

Real PolyMesh::total_area() const
{
    Real sum = 0;
    for (int c = 0; c < num_cells(); ++c) {
        auto poly = cell_polygon(c);
        sum += signed_area<Real>(poly);
    }
    return sum;
}

// ---------------------------------------------------------------------------

Real ElementGeometry::perimeter() const
{
    return std::accumulate(edge_lengths.begin(), edge_lengths.end(), Real(0));
}

ElementGeometry element_geometry(std::vector<Point> polygon, int cell_id)
{
    ElementGeometry g;
    g.cell_id = cell_id;
    g.vertices = std::move(polygon);
    g.area = signed_area<Real>(g.vertices);
    if (!(g.area > 0))
        throw ElementError("cell " + std::to_string(cell_id) + " has non-positive area");
    g.centroid = polygon_centroid<Real>(g.vertices);
    g.diameter = polygon_diameter<Real>(g.vertices);
    const std::size_t n = g.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point t = g.vertices[(i + 1) % n] - g.vertices[i];
        const Real len = t.norm();
        g.edge_lengths.push_back(len);
        g.edge_normals.push_back(Point(t.y(), -t.x()) / len);
    }
    try {
        g.triangles = ear_clip(g.vertices);
    } catch (const ElementError& err) {
        throw ElementError("cell " + std::to_string(cell_id) + ": " + err.what());
    }
    return g;
}

ElementGeometry element_geometry(const PolyMesh& mesh, int cell)
{
    return element_geometry(mesh.cell_polygon(cell), cell);
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

namespace {

/// Uniform real in [0,1) from the raw 32-bit Mersenne Twister stream (portable across libraries).
Real unit_uniform(std::mt19937& rng) { return static_cast<Real>(rng()) / 4294967296.0; }

int grid_count(Real length, Real h, const char* what)
{
    const Real n = length / h;
    const Real rounded = std::round(n);
    if (rounded < 1 || std::abs(n - rounded) > 1e-8 * std::max(Real(1), n))
        throw ConfigError(std::string("h_target does not divide the domain ") + what + " into an integer number of cells");
    return static_cast<int>(rounded);
}

struct StructuredGrid {
    int nx = 0, ny = 0;
    std::vector<Point> vertices;
    std::vector<int> node_id;   ///< (nx+1)*(ny+1) grid node -> vertex id (or -1)
    std::vector<std::array<int, 4>> quads;  ///< CCW corner vertex ids
    std::vector<std::array<int, 2>> quad_ij;
};

StructuredGrid structured_grid(const Domain& domain, Real h)
{
    const Box& b = domain.bounds;
    StructuredGrid g;
    g.nx = grid_count(b.x1 - b.x0, h, "width");
    g.ny = grid_count(b.y1 - b.y0, h, "height");
    const Real dx = (b.x1 - b.x0) / g.nx;
    const Real dy = (b.y1 - b.y0) / g.ny;
    if (domain.notch) {
        const Box& n = *domain.notch;
        for (Real v : {(n.x0 - b.x0) / dx, (n.x1 - b.x0) / dx})
            if (std::abs(v - std::round(v)) > 1e-8) throw ConfigError("notch is not aligned with the grid spacing h_target");
        for (Real v : {(n.y0 - b.y0) / dy, (n.y1 - b.y0) / dy})
            if (std::abs(v - std::round(v)) > 1e-8) throw ConfigError("notch is not aligned with the grid spacing h_target");
    }
    auto node = [&](int i, int j) { return static_cast<std::size_t>(j * (g.nx + 1) + i); };
    g.node_id.assign(static_cast<std::size_t>((g.nx + 1) * (g.ny + 1)), -1);
    std::vector<std::array<int, 2>> kept;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const Point center(b.x0 + (i + 0.5) * dx, b.y0 + (j + 0.5) * dy);
            if (domain.contains(center)) kept.push_back({i, j});
        }
    for (const auto& [i, j] : kept)
        for (auto [di, dj] : {std::pair{0, 0}, {1, 0}, {1, 1}, {0, 1}}) g.node_id[node(i + di, j + dj)] = 0;
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            auto& id = g.node_id[node(i, j)];
            if (id < 0) continue;
            id = static_cast<int>(g.vertices.size());
            // Exact boundary coordinates for the last node of each row/column.
            const Real x = i == g.nx ? b.x1 : b.x0 + i * dx;
            const Real y = j == g.ny ? b.y1 : b.y0 + j * dy;
            g.vertices.emplace_back(x, y);
        }
    for (const auto& [i, j] : kept) {
        g.quads.push_back({g.node_id[node(i, j)], g.node_id[node(i + 1, j)], g.node_id[node(i + 1, j + 1)],
                           g.node_id[node(i, j + 1)]});
        g.quad_ij.push_back({i, j});
    }
    return g;
}

PolyMesh::BoundaryMap classify_boundary(const Domain& domain, const std::vector<Point>& vertices,
                                        const std::vector<std::vector<int>>& cells)
{
    std::unordered_map<std::uint64_t, int> count;
    for (const auto& loop : cells)
        for (std::size_t i = 0; i < loop.size(); ++i) ++count[edge_key(loop[i], loop[(i + 1) % loop.size()])];
    PolyMesh::BoundaryMap map;
    for (const auto& loop : cells)
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const int a = loop[i];
            const int b = loop[(i + 1) % loop.size()];
            if (count[edge_key(a, b)] != 1) continue;
            map[domain.classify_segment(vertices[static_cast<std::size_t>(a)], vertices[static_cast<std::size_t>(b)])]
                .push_back({a, b});
        }
    return map;
}

PolyMesh finish(const Domain& domain, std::vector<Point> vertices, std::vector<std::vector<int>> cells)
{
    auto boundary = classify_boundary(domain, vertices, cells);
    return PolyMesh(std::move(vertices), std::move(cells), std::move(boundary));
}

std::vector<bool> boundary_vertices(std::size_t nv, const std::vector<std::vector<int>>& cells)
{
    std::unordered_map<std::uint64_t, int> count;
    for (const auto& loop : cells)
        for (std::size_t i = 0; i < loop.size(); ++i) ++count[edge_key(loop[i], loop[(i + 1) % loop.size()])];
    std::vector<bool> on(nv, false);
    for (const auto& loop : cells)
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const int a = loop[i];
            const int b = loop[(i + 1) % loop.size()];
            if (count[edge_key(a, b)] == 1) on[static_cast<std::size_t>(a)] = on[static_cast<std::size_t>(b)] = true;
        }
    return on;
}

PolyMesh uniform_square_mesh(const Domain& domain, Real h)
{
    auto g = structured_grid(domain, h);
    std::vector<std::vector<int>> cells;
    for (const auto& q : g.quads) cells.push_back({q[0], q[1], q[2], q[3]});
    return finish(domain, std::move(g.vertices), std::move(cells));
}

PolyMesh distorted_square_mesh(const Domain& domain, Real h, std::uint32_t seed)
{
    auto g = structured_grid(domain, h);
    std::vector<std::vector<int>> cells;
    for (const auto& q : g.quads) cells.push_back({q[0], q[1], q[2], q[3]});
    const auto on_boundary = boundary_vertices(g.vertices.size(), cells);
    std::mt19937 rng(seed);
    const Real amplitude = 0.3 * h;
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
        const Real angle = 2 * M_PI * unit_uniform(rng);
        const Real radius = amplitude * unit_uniform(rng);
        if (on_boundary[v]) continue;
        g.vertices[v] += radius * Point(std::cos(angle), std::sin(angle));
    }
    return finish(domain, std::move(g.vertices), std::move(cells));
}

PolyMesh triangular_mesh(const Domain& domain, Real h)
{
    auto g = structured_grid(domain, h);
    std::vector<std::vector<int>> cells;
    for (std::size_t c = 0; c < g.quads.size(); ++c) {
        const auto& q = g.quads[c];
        const auto [i, j] = g.quad_ij[c];
        // Alternate the diagonal in a checkerboard pattern.
        if ((i + j) % 2 == 0) {
            cells.push_back({q[0], q[1], q[2]});
            cells.push_back({q[0], q[2], q[3]});
        } else {
            cells.push_back({q[0], q[1], q[3]});
            cells.push_back({q[1], q[2], q[3]});
        }
    }
    return finish(domain, std::move(g.vertices), std::move(cells));
}

/// Square grid whose interior edges are bent at their midpoints: horizontal edges upward,
/// vertical edges rightward. Every interior cell becomes a concave octagon (two re-entrant
/// corners) that stays star-shaped.
PolyMesh nonconvex_mesh(const Domain& domain, Real h)
{
    auto g = structured_grid(domain, h);
    std::vector<Point> vertices = g.vertices;
    std::vector<std::vector<int>> quads;
    for (const auto& q : g.quads) quads.push_back({q[0], q[1], q[2], q[3]});
    std::unordered_map<std::uint64_t, int> count;
    for (const auto& loop : quads)
        for (std::size_t i = 0; i < 4; ++i) ++count[edge_key(loop[i], loop[(i + 1) % 4])];

    const Real bend = 0.25 * h;
    std::unordered_map<std::uint64_t, int> midpoint;
    auto mid = [&](int a, int b) {
        const auto key = edge_key(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const Point& pa = vertices[static_cast<std::size_t>(a)];
        const Point& pb = vertices[static_cast<std::size_t>(b)];
        Point m = 0.5 * (pa + pb);
        if (count[key] == 2) {
            const bool horizontal = std::abs(pa.y() - pb.y()) < std::abs(pa.x() - pb.x());
            if (horizontal) m.y() += bend;
            else m.x() += bend;
        }
        const int id = static_cast<int>(vertices.size());
        vertices.push_back(m);
        midpoint.emplace(key, id);
        return id;
    };
    std::vector<std::vector<int>> cells;
    for (const auto& q : quads) {
        std::vector<int> loop;
        for (std::size_t i = 0; i < 4; ++i) {
            loop.push_back(q[i]);
            loop.push_back(mid(q[i], q[(i + 1) % 4]));
        }
        cells.push_back(std::move(loop));
    }
    return finish(domain, std::move(vertices), std::move(cells));
}

// --- Voronoi ---------------------------------------------------------------

class SeedGrid {
public:
    SeedGrid(const Box& box, Real spacing, const std::vector<Point>& seeds) : box_(box), seeds_(seeds)
    {
        nx_ = std::max(1, static_cast<int>(std::ceil((box.x1 - box.x0) / spacing)));
        ny_ = std::max(1, static_cast<int>(std::ceil((box.y1 - box.y0) / spacing)));
        bx_ = (box.x1 - box.x0) / nx_;
        by_ = (box.y1 - box.y0) / ny_;
        buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            auto [i, j] = bucket_of(seeds[s]);
            buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(static_cast<int>(s));
        }
    }

    std::pair<int, int> bucket_of(const Point& p) const
    {
        const int i = std::clamp(static_cast<int>((p.x() - box_.x0) / bx_), 0, nx_ - 1);
        const int j = std::clamp(static_cast<int>((p.y() - box_.y0) / by_), 0, ny_ - 1);
        return {i, j};
    }

    /// Clipped Voronoi cell of seed s.
    std::vector<Point> cell(int s) const
    {
        const Point& p = seeds_[static_cast<std::size_t>(s)];
        std::vector<Point> poly = {Point(box_.x0, box_.y0), Point(box_.x1, box_.y0), Point(box_.x1, box_.y1),
                                   Point(box_.x0, box_.y1)};
        const auto [ci, cj] = bucket_of(p);
        const int max_ring = std::max(nx_, ny_);
        for (int ring = 0; ring <= max_ring; ++ring) {
            for (int j = cj - ring; j <= cj + ring; ++j)
                for (int i = ci - ring; i <= ci + ring; ++i) {
                    if (std::max(std::abs(i - ci), std::abs(j - cj)) != ring) continue;
                    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
                    for (int t : buckets_[static_cast<std::size_t>(j * nx_ + i)]) {
                        if (t == s) continue;
                        const Point& q = seeds_[static_cast<std::size_t>(t)];
                        const Point normal = q - p;
                        poly = clip_half_plane(poly, normal, normal.dot(0.5 * (p + q)));
                    }
                }
            Real radius = 0;
            for (const auto& v : poly) radius = std::max(radius, (v - p).norm());
            if (ring * std::min(bx_, by_) >= 2 * radius) break;
        }
        return poly;
    }

private:
    Box box_;
    const std::vector<Point>& seeds_;
    int nx_ = 1, ny_ = 1;
    Real bx_ = 1, by_ = 1;
    std::vector<std::vector<int>> buckets_;
};

PolyMesh voronoi_mesh(const Domain& domain, Real h, std::uint32_t seed)
{
    const Box& box = domain.bounds;
    const int n_seeds = std::max(4, static_cast<int>(std::lround(box.area() / (h * h))));
    std::mt19937 rng(seed);
    std::vector<Point> seeds;
    seeds.reserve(static_cast<std::size_t>(n_seeds));
    for (int s = 0; s < n_seeds; ++s) {
        const Real x = box.x0 + (box.x1 - box.x0) * unit_uniform(rng);
        const Real y = box.y0 + (box.y1 - box.y0) * unit_uniform(rng);
        seeds.emplace_back(x, y);
    }

    std::vector<std::vector<Point>> polys(seeds.size());
    // Lloyd relaxation towards a centroidal Voronoi tessellation.
    const int max_lloyd = 300;
    for (int it = 0; it <= max_lloyd; ++it) {
        SeedGrid grid(box, h, seeds);
        Real max_shift = 0;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            polys[s] = grid.cell(static_cast<int>(s));
            if (it == max_lloyd) continue;
            const Point c = polygon_centroid<Real>(polys[s]);
            max_shift = std::max(max_shift, (c - seeds[s]).norm());
            seeds[s] = c;
        }
        if (it < max_lloyd && max_shift < 1e-5 * h) {
            SeedGrid final_grid(box, h, seeds);
            for (std::size_t s = 0; s < seeds.size(); ++s) polys[s] = final_grid.cell(static_cast<int>(s));
            break;
        }
    }

    // Merge coincident and nearly coincident vertices across cells. Clusters closer than
    // the collapse tolerance are fused, which also removes very short Voronoi edges.
    const Real collapse = 0.1 * h;
    std::vector<Point> raw;
    std::vector<std::vector<int>> raw_cells;
    for (const auto& poly : polys) {
        std::vector<int> loop;
        for (const auto& p : poly) {
            loop.push_back(static_cast<int>(raw.size()));
            raw.push_back(p);
        }
        raw_cells.push_back(std::move(loop));
    }
    std::vector<int> parent(raw.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    {
        std::unordered_map<std::uint64_t, std::vector<int>> hash;
        auto cell_key = [&](long i, long j) { return (static_cast<std::uint64_t>(i + (1L << 20)) << 32) | static_cast<std::uint64_t>(j + (1L << 20)); };
        for (std::size_t r = 0; r < raw.size(); ++r) {
            const long i = static_cast<long>(std::floor(raw[r].x() / collapse));
            const long j = static_cast<long>(std::floor(raw[r].y() / collapse));
            for (long di = -1; di <= 1; ++di)
                for (long dj = -1; dj <= 1; ++dj) {
                    auto it = hash.find(cell_key(i + di, j + dj));
                    if (it == hash.end()) continue;
                    for (int o : it->second)
                        if ((raw[static_cast<std::size_t>(o)] - raw[r]).norm() < collapse)
                            parent[static_cast<std::size_t>(find(o))] = find(static_cast<int>(r));
                }
            hash[cell_key(i, j)].push_back(static_cast<int>(r));
        }
    }
    std::map<int, int> root_to_vertex;
    std::vector<Point> vertices;
    std::vector<std::vector<int>> members;
    std::vector<int> vertex_of(raw.size());
    for (std::size_t r = 0; r < raw.size(); ++r) {
        const int root = find(static_cast<int>(r));
        auto [it, inserted] = root_to_vertex.try_emplace(root, static_cast<int>(members.size()));
        if (inserted) members.emplace_back();
        members[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(r));
        vertex_of[r] = it->second;
    }
    for (const auto& group : members) {
        Point mean = Point::Zero();
        bool left = false, right = false, bottom = false, top = false;
        for (int r : group) {
            const Point& p = raw[static_cast<std::size_t>(r)];
            mean += p;
            left |= p.x() == box.x0;
            right |= p.x() == box.x1;
            bottom |= p.y() == box.y0;
            top |= p.y() == box.y1;
        }
        mean /= static_cast<Real>(group.size());
        if (left) mean.x() = box.x0;
        if (right) mean.x() = box.x1;
        if (bottom) mean.y() = box.y0;
        if (top) mean.y() = box.y1;
        vertices.push_back(mean);
    }
    std::vector<std::vector<int>> cells;
    for (const auto& loop : raw_cells) {
        std::vector<int> merged;
        for (int r : loop) {
            const int v = vertex_of[static_cast<std::size_t>(r)];
            if (merged.empty() || merged.back() != v) merged.push_back(v);
        }
        while (merged.size() > 1 && merged.front() == merged.back()) merged.pop_back();
        if (merged.size() < 3) throw MeshError("voronoi generator collapsed a cell; h_target too small for the domain");
        cells.push_back(std::move(merged));
    }
    // Drop vertices that ended up unused (none expected) and renumber by first appearance.
    std::vector<int> renumber(vertices.size(), -1);
    std::vector<Point> used;
    for (auto& loop : cells)
        for (int& v : loop) {
            auto& id = renumber[static_cast<std::size_t>(v)];
            if (id < 0) {
                id = static_cast<int>(used.size());
                used.push_back(vertices[static_cast<std::size_t>(v)]);
            }
            v = id;
        }
    return finish(domain, std::move(used), std::move(cells));
}

}  // namespace

PolyMesh generate_mesh(MeshFamily family, const Domain& domain, Real h_target, std::uint32_t seed)
{
    if (!(h_target > 0)) throw ConfigError("h_target must be positive");
    switch (family) {
    case MeshFamily::uniform_square: return uniform_square_mesh(domain, h_target);
    case MeshFamily::distorted_square: return distorted_square_mesh(domain, h_target, seed);
    case MeshFamily::triangular: return triangular_mesh(domain, h_target);
    case MeshFamily::nonconvex: return nonconvex_mesh(domain, h_target);
    case MeshFamily::voronoi:
        if (domain.is_l_shaped()) throw ConfigError("voronoi family supports rectangular domains only");
        return voronoi_mesh(domain, h_target, seed);
    }
    throw ConfigError("unknown mesh family");
}

// ---------------------------------------------------------------------------

RegularityReport check_regularity(const PolyMesh& mesh)
{
    RegularityReport report;
    report.gamma_edge = 1;
    report.gamma_star = 1;
    Real worst = 2;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto poly = mesh.cell_polygon(c);
        const Real diam = polygon_diameter<Real>(poly);
        Real min_edge = diam;
        for (std::size_t i = 0; i < poly.size(); ++i)
            min_edge = std::min(min_edge, (poly[(i + 1) % poly.size()] - poly[i]).norm());
        const Real edge_ratio = diam > 0 ? min_edge / diam : 0;
        const auto kernel = polygon_kernel(poly);
        const Real star_ratio = (diam > 0 && !kernel.empty()) ? inscribed_radius(kernel) / diam : 0;
        report.gamma_edge = std::min(report.gamma_edge, edge_ratio);
        report.gamma_star = std::min(report.gamma_star, star_ratio);
        const Real cell_worst = std::min(edge_ratio, star_ratio);
        if (cell_worst < worst) {
            worst = cell_worst;
            report.worst_cell = c;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// JSON IO
// ---------------------------------------------------------------------------

std::string mesh_to_json(const PolyMesh& mesh)
{
    std::ostringstream os;
    os << std::setprecision(17);
    os << "{\n  \"vertices\": [";
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Point& p = mesh.vertices()[static_cast<std::size_t>(v)];
        os << (v ? ",\n    " : "\n    ") << '[' << p.x() << ", " << p.y() << ']';
    }
    os << "\n  ],\n  \"cells\": [";
    for (int c = 0; c < mesh.num_cells(); ++c) {
        os << (c ? ",\n    " : "\n    ") << '[';
        const auto& loop = mesh.cells()[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < loop.size(); ++i) os << (i ? ", " : "") << loop[i];
        os << ']';
    }
    os << "\n  ],\n  \"boundary\": {";
    bool first_marker = true;
    for (const auto& [name, list] : mesh.boundary_map()) {
        os << (first_marker ? "\n    " : ",\n    ") << nlohmann::json(name).dump() << ": [";
        for (std::size_t i = 0; i < list.size(); ++i)
            os << (i ? ", " : "") << '[' << list[i][0] << ", " << list[i][1] << ']';
        os << ']';
        first_marker = false;
    }
    os << "\n  }\n}\n";
    return os.str();
}

PolyMesh mesh_from_json(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
        const auto offset = std::min<std::size_t>(err.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n');
        throw MeshError("mesh parse error at line " + std::to_string(line) + ": " + err.what());
    }
    auto field_error = [](const std::string& field, const std::string& what) {
        return MeshError("mesh field '" + field + "': " + what);
    };
    if (!doc.is_object()) throw field_error("<root>", "expected an object");
    if (!doc.contains("vertices") || !doc["vertices"].is_array()) throw field_error("vertices", "missing or not an array");
    if (!doc.contains("cells") || !doc["cells"].is_array()) throw field_error("cells", "missing or not an array");

    std::vector<Point> vertices;
    for (std::size_t i = 0; i < doc["vertices"].size(); ++i) {
        const auto& v = doc["vertices"][i];
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw field_error("vertices[" + std::to_string(i) + "]", "expected [x, y]");
        vertices.emplace_back(v[0].get<Real>(), v[1].get<Real>());
    }
    const auto nv = static_cast<long long>(vertices.size());
    std::vector<std::vector<int>> cells;
    for (std::size_t c = 0; c < doc["cells"].size(); ++c) {
        const auto& loop = doc["cells"][c];
        const std::string field = "cells[" + std::to_string(c) + "]";
        if (!loop.is_array()) throw field_error(field, "expected an index list");
        std::vector<int> ids;
        for (std::size_t i = 0; i < loop.size(); ++i) {
            if (!loop[i].is_number_integer()) throw field_error(field + "[" + std::to_string(i) + "]", "expected an integer");
            const auto id = loop[i].get<long long>();
            if (id < 0 || id >= nv)
                throw field_error(field + "[" + std::to_string(i) + "]", "bad vertex index " + std::to_string(id));
            ids.push_back(static_cast<int>(id));
        }
        std::vector<Point> poly;
        for (int id : ids) poly.push_back(vertices[static_cast<std::size_t>(id)]);
        if (ids.size() >= 3 && signed_area<Real>(poly) <= 0)
            throw MeshError("orientation error: cell " + std::to_string(c) + " is not counter-clockwise");
        cells.push_back(std::move(ids));
    }
    PolyMesh::BoundaryMap boundary;
    if (doc.contains("boundary")) {
        if (!doc["boundary"].is_object()) throw field_error("boundary", "expected an object");
        for (const auto& [name, list] : doc["boundary"].items()) {
            const std::string field = "boundary." + name;
            if (!list.is_array()) throw field_error(field, "expected a list of [i, j] pairs");
            for (std::size_t i = 0; i < list.size(); ++i) {
                const auto& pair = list[i];
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer())
                    throw field_error(field + "[" + std::to_string(i) + "]", "expected [i, j]");
                const auto a = pair[0].get<long long>();
                const auto b = pair[1].get<long long>();
                if (a < 0 || a >= nv || b < 0 || b >= nv)
                    throw field_error(field + "[" + std::to_string(i) + "]", "bad vertex index");
                boundary[name].push_back({static_cast<int>(a), static_cast<int>(b)});
            }
        }
    }
    return PolyMesh(std::move(vertices), std::move(cells), std::move(boundary));
}

PolyMesh read_mesh(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return mesh_from_json(buffer.str());
}

void write_mesh(const PolyMesh& mesh, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write mesh file '" + path + "'");
    out << mesh_to_json(mesh);
}

}  // namespace stvem
