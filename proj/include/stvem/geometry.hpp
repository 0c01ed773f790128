#pragma once

#include "stvem/common.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stvem {

// ---------------------------------------------------------------------------
// Polygon helpers, templated on the coordinate scalar.
// ---------------------------------------------------------------------------

template <typename Scalar>
Scalar signed_area(std::span<const Point2<Scalar>> polygon)
{
    Scalar twice = Scalar(0);
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = polygon[i];
        const auto& b = polygon[(i + 1) % n];
        twice += a.x() * b.y() - b.x() * a.y();
    }
    return twice / Scalar(2);
}

template <typename Scalar>
Point2<Scalar> polygon_centroid(std::span<const Point2<Scalar>> polygon)
{
    Scalar twice = Scalar(0);
    Point2<Scalar> acc = Point2<Scalar>::Zero();
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = polygon[i];
        const auto& b = polygon[(i + 1) % n];
        const Scalar cross = a.x() * b.y() - b.x() * a.y();
        twice += cross;
        acc += (a + b) * cross;
    }
    return acc / (Scalar(3) * twice);
}

template <typename Scalar>
Scalar polygon_diameter(std::span<const Point2<Scalar>> polygon)
{
    Scalar diam = Scalar(0);
    for (std::size_t i = 0; i < polygon.size(); ++i)
        for (std::size_t j = i + 1; j < polygon.size(); ++j)
            diam = std::max(diam, (polygon[i] - polygon[j]).norm());
    return diam;
}

/// Clip a convex polygon by the half-plane {x : normal . x <= offset}.
std::vector<Point> clip_half_plane(const std::vector<Point>& polygon, const Point& normal,
                                   Real offset);

/// Kernel of a simple CCW polygon (intersection of the inner half-planes of its edges).
/// Empty when the polygon is not star-shaped.
std::vector<Point> polygon_kernel(std::span<const Point> polygon);

/// Radius of the largest disc contained in a convex polygon.
Real inscribed_radius(const std::vector<Point>& convex_polygon);

/// Ear-clipping triangulation of a simple CCW polygon; returns local index triples.
std::vector<std::array<int, 3>> ear_clip(std::span<const Point> polygon);

bool is_convex(std::span<const Point> polygon, Real tol = 1e-12);

// ---------------------------------------------------------------------------
// Domains and meshes
// ---------------------------------------------------------------------------

struct Box {
    Real x0 = 0, y0 = 0, x1 = 1, y1 = 1;
    Real area() const { return (x1 - x0) * (y1 - y0); }
};

/// Axis-aligned rectangle, optionally minus a rectangular notch touching its border.
struct Domain {
    Box bounds;
    std::optional<Box> notch;

    static Domain unit_square() { return {}; }
    static Domain rectangle(Real x0, Real y0, Real x1, Real y1) { return {{x0, y0, x1, y1}, {}}; }
    /// (0,4)x(0,2) minus [2,4]x[0,1]: the backward-facing step channel.
    static Domain channel_step() { return {{0, 0, 4, 2}, Box{2, 0, 4, 1}}; }

    Real area() const { return bounds.area() - (notch ? notch->area() : Real(0)); }
    bool is_l_shaped() const { return notch.has_value(); }
    bool contains(const Point& p) const;
    /// Marker of a boundary segment: left/right/bottom/top of the bounding box, else "step".
    std::string classify_segment(const Point& a, const Point& b) const;
};

enum class MeshFamily { uniform_square, distorted_square, voronoi, nonconvex, triangular };

MeshFamily parse_mesh_family(std::string_view name);
std::string to_string(MeshFamily family);

struct Edge {
    int v0 = -1;  ///< smaller vertex index
    int v1 = -1;  ///< larger vertex index
    std::array<int, 2> cells{-1, -1};
    bool boundary() const { return cells[1] < 0; }
};

/// Polygonal mesh. Immutable after construction; the constructor validates every invariant.
class PolyMesh {
public:
    using BoundaryMap = std::map<std::string, std::vector<std::array<int, 2>>>;

    PolyMesh() = default;
    /// Unmarked boundary edges are assigned to the marker "boundary".
    PolyMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells, BoundaryMap boundary = {});

    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<std::vector<int>>& cells() const { return cells_; }
    const std::vector<Edge>& edges() const { return edges_; }
    /// Edge ids of a cell in local order (local edge i joins local vertices i and i+1).
    const std::vector<int>& cell_edges(int cell) const { return cell_edges_[static_cast<std::size_t>(cell)]; }
    /// Marker of each edge; empty string for interior edges.
    const std::string& edge_marker(int edge) const { return edge_markers_[static_cast<std::size_t>(edge)]; }
    std::vector<std::string> markers() const;
    BoundaryMap boundary_map() const;

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_cells() const { return static_cast<int>(cells_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    std::vector<Point> cell_polygon(int cell) const;
    /// Max cell diameter.
    Real h() const { return h_; }
    Real total_area() const;

private:
    std::vector<Point> vertices_;
    std::vector<std::vector<int>> cells_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> cell_edges_;
    std::vector<std::string> edge_markers_;
    Real h_ = 0;
};

/// Geometric data of one polygonal cell.
struct ElementGeometry {
    int cell_id = -1;
    std::vector<Point> vertices;  ///< CCW
    Real area = 0;
    Point centroid = Point::Zero();
    Real diameter = 0;
    std::vector<Real> edge_lengths;    ///< edge i joins vertex i and i+1
    std::vector<Point> edge_normals;   ///< outward unit normals
    std::vector<std::array<int, 3>> triangles;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    Real perimeter() const;
};

ElementGeometry element_geometry(const PolyMesh& mesh, int cell);
ElementGeometry element_geometry(std::vector<Point> polygon, int cell_id = -1);

/// Deterministic mesh generators. h_target is the grid spacing for structured families and
/// the mean seed spacing for the Voronoi family.
PolyMesh generate_mesh(MeshFamily family, const Domain& domain, Real h_target, std::uint32_t seed = 42);

struct RegularityReport {
    Real gamma_edge = 0;   ///< min over cells of min edge length / h_E
    Real gamma_star = 0;   ///< min over cells of kernel inradius / h_E
    int worst_cell = -1;
};

RegularityReport check_regularity(const PolyMesh& mesh);

PolyMesh read_mesh(const std::string& path);
void write_mesh(const PolyMesh& mesh, const std::string& path);
PolyMesh mesh_from_json(const std::string& text);
std::string mesh_to_json(const PolyMesh& mesh);

}  // namespace stvem
