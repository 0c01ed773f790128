#include "stvem/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <set>

using namespace stvem;

namespace {

struct Gen {
    MeshFamily family;
    Domain domain;
    Real h;
};

class Generated : public ::testing::TestWithParam<Gen> {};

TEST_P(Generated, MeshInvariantsHold)
{
    const auto& [family, domain, h] = GetParam();
    const PolyMesh m = generate_mesh(family, domain, h);
    Real area = 0;
    for (int c = 0; c < m.num_cells(); ++c) {
        const auto poly = m.cell_polygon(c);
        const Real a = signed_area<Real>(poly);
        EXPECT_GT(a, 0) << "cell " << c;
        area += a;
        const ElementGeometry g = element_geometry(m, c);
        Real tri = 0;
        Point cen = Point::Zero();
        for (const auto& t : g.triangles) {
            const Point &p = g.vertices[static_cast<std::size_t>(t[0])], &q = g.vertices[static_cast<std::size_t>(t[1])],
                        &r = g.vertices[static_cast<std::size_t>(t[2])];
            const Real ta = 0.5 * ((q - p).x() * (r - p).y() - (q - p).y() * (r - p).x());
            tri += ta;
            cen += ta * (p + q + r) / 3;
        }
        EXPECT_NEAR(tri, g.area, 1e-12 * g.area);
        EXPECT_LE((cen / tri - g.centroid).norm(), 1e-12 * g.diameter);
        for (Real len : g.edge_lengths) EXPECT_LE(len, g.diameter * (1 + 1e-14));
    }
    EXPECT_NEAR(area, domain.area(), 1e-10 * domain.area());
    int boundary = 0;
    for (int e = 0; e < m.num_edges(); ++e) {
        const Edge& ed = m.edges()[static_cast<std::size_t>(e)];
        EXPECT_GE(ed.cells[0], 0);
        if (ed.boundary()) {
            ++boundary;
            EXPECT_FALSE(m.edge_marker(e).empty());
        } else {
            EXPECT_TRUE(m.edge_marker(e).empty());
        }
    }
    EXPECT_GT(boundary, 0);
    EXPECT_LE(m.h(), 2 * std::sqrt(2.0) * h);
    const auto reg = check_regularity(m);
    EXPECT_GT(reg.gamma_edge, 0);
    EXPECT_LE(reg.gamma_edge, 1);
    EXPECT_GT(reg.gamma_star, 0);
}

INSTANTIATE_TEST_SUITE_P(
    Families, Generated,
    ::testing::Values(Gen{MeshFamily::uniform_square, Domain::unit_square(), 0.2}, Gen{MeshFamily::distorted_square, Domain::unit_square(), 0.1},
                      Gen{MeshFamily::voronoi, Domain::unit_square(), 0.1}, Gen{MeshFamily::nonconvex, Domain::unit_square(), 0.2},
                      Gen{MeshFamily::triangular, Domain::unit_square(), 0.25}, Gen{MeshFamily::triangular, Domain::channel_step(), 0.25},
                      Gen{MeshFamily::uniform_square, Domain::channel_step(), 0.5}, Gen{MeshFamily::nonconvex, Domain::rectangle(0, 0, 2, 1), 0.25}));

TEST(Generate, UniformGridCounts)
{
    const PolyMesh m = generate_mesh(MeshFamily::uniform_square, Domain::unit_square(), 0.2);
    EXPECT_EQ(m.num_cells(), 25);
    EXPECT_EQ(m.num_vertices(), 36);
    EXPECT_NEAR(m.total_area(), 1.0, 1e-12);
    EXPECT_NEAR(check_regularity(m).gamma_edge, 1 / std::sqrt(2.0), 1e-12);
}

TEST(Generate, VoronoiCellsAreConvexAndShapeRegular)
{
    const PolyMesh m = generate_mesh(MeshFamily::voronoi, Domain::unit_square(), 0.1);
    for (int c = 0; c < m.num_cells(); ++c) EXPECT_TRUE(is_convex(m.cell_polygon(c))) << c;
    EXPECT_GT(check_regularity(m).gamma_edge, 0.05);
}

TEST(Generate, NonconvexFamilyHasConcaveCells)
{
    const PolyMesh m = generate_mesh(MeshFamily::nonconvex, Domain::unit_square(), 0.2);
    int concave = 0;
    for (int c = 0; c < m.num_cells(); ++c) concave += is_convex(m.cell_polygon(c)) ? 0 : 1;
    EXPECT_GT(concave, 0);
}

TEST(Generate, DistortionStaysWithinBound)
{
    const Real h = 0.1;
    const PolyMesh d = generate_mesh(MeshFamily::distorted_square, Domain::unit_square(), h);
    const PolyMesh u = generate_mesh(MeshFamily::uniform_square, Domain::unit_square(), h);
    ASSERT_EQ(d.num_vertices(), u.num_vertices());
    Real worst = 0;
    for (int i = 0; i < d.num_vertices(); ++i)
        worst = std::max(worst, (d.vertices()[static_cast<std::size_t>(i)] - u.vertices()[static_cast<std::size_t>(i)]).cwiseAbs().maxCoeff());
    EXPECT_GT(worst, 0);
    EXPECT_LE(worst, 0.3 * h + 1e-14);
}

TEST(Generate, IsDeterministic)
{
    for (MeshFamily f : {MeshFamily::voronoi, MeshFamily::distorted_square}) {
        EXPECT_EQ(mesh_to_json(generate_mesh(f, Domain::unit_square(), 0.1, 7)), mesh_to_json(generate_mesh(f, Domain::unit_square(), 0.1, 7)));
        EXPECT_NE(mesh_to_json(generate_mesh(f, Domain::unit_square(), 0.1, 7)), mesh_to_json(generate_mesh(f, Domain::unit_square(), 0.1, 8)));
    }
}

TEST(Generate, RejectsBadArguments)
{
    EXPECT_THROW(generate_mesh(MeshFamily::uniform_square, Domain::unit_square(), 0), ConfigError);
    EXPECT_THROW(generate_mesh(MeshFamily::uniform_square, Domain::unit_square(), -0.1), ConfigError);
    EXPECT_THROW(generate_mesh(MeshFamily::voronoi, Domain::channel_step(), 0.25), ConfigError);
    EXPECT_THROW(parse_mesh_family("hexagonal"), ConfigError);
    EXPECT_EQ(parse_mesh_family("voronoi"), MeshFamily::voronoi);
}

TEST(Generate, ChannelMarkers)
{
    const PolyMesh m = generate_mesh(MeshFamily::triangular, Domain::channel_step(), 0.25);
    const auto markers = m.markers();
    const std::set<std::string> got(markers.begin(), markers.end());
    for (const char* name : {"left", "right", "top", "bottom", "step"}) EXPECT_TRUE(got.count(name)) << name;
    const auto bmap = m.boundary_map();
    for (const auto& [a, b] : bmap.at("right")) {
        EXPECT_NEAR(m.vertices()[static_cast<std::size_t>(a)].x(), 4, 1e-14);
        EXPECT_GE(m.vertices()[static_cast<std::size_t>(b)].y(), 1 - 1e-14);
    }
}

TEST(Regularity, RegularHexagon)
{
    std::vector<Point> v;
    for (int i = 0; i < 6; ++i) v.emplace_back(std::cos(i * std::numbers::pi / 3), std::sin(i * std::numbers::pi / 3));
    const PolyMesh m(v, {{0, 1, 2, 3, 4, 5}});
    // inradius sqrt(3)/2 over diameter 2.
    EXPECT_NEAR(check_regularity(m).gamma_star, std::sqrt(3.0) / 4, 1e-9);
    EXPECT_GT(check_regularity(m).gamma_star, 0.4);
}

TEST(Regularity, KernelOfConcavePolygon)
{
    // An L-shape: its kernel is the unit square at the corner.
    const std::vector<Point> l{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
    const auto k = polygon_kernel(l);
    EXPECT_NEAR(signed_area<Real>(k), 1.0, 1e-12);
    EXPECT_FALSE(is_convex(l));
}

TEST(MeshIo, OneCellFile)
{
    const PolyMesh m = mesh_from_json(R"({"vertices": [[0,0],[1,0],[1,1],[0,1]], "cells": [[0,1,2,3]]})");
    EXPECT_EQ(m.num_cells(), 1);
    EXPECT_EQ(m.num_vertices(), 4);
    EXPECT_EQ(m.markers(), std::vector<std::string>{"boundary"});
}

TEST(MeshIo, RoundTripIsBitwise)
{
    const PolyMesh m = generate_mesh(MeshFamily::voronoi, Domain::unit_square(), 0.2);
    const auto path = (std::filesystem::temp_directory_path() / "stvem_roundtrip.json").string();
    write_mesh(m, path);
    const PolyMesh r = read_mesh(path);
    std::remove(path.c_str());
    ASSERT_EQ(r.num_vertices(), m.num_vertices());
    for (int i = 0; i < m.num_vertices(); ++i) {
        EXPECT_EQ(r.vertices()[static_cast<std::size_t>(i)].x(), m.vertices()[static_cast<std::size_t>(i)].x());
        EXPECT_EQ(r.vertices()[static_cast<std::size_t>(i)].y(), m.vertices()[static_cast<std::size_t>(i)].y());
    }
    EXPECT_EQ(r.cells(), m.cells());
    EXPECT_EQ(r.boundary_map(), m.boundary_map());
}

TEST(MeshIo, Errors)
{
    auto message = [](const std::string& text) {
        try {
            mesh_from_json(text);
        } catch (const MeshError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message(R"({"vertices": [[0,0],[1,0],[1,1]], "cells": [[0,1,5]]})").find("bad vertex index"), std::string::npos);
    EXPECT_NE(message(R"({"vertices": [[0,0],[1,0],[1,1]], "cells": [[0,2,1]]})").find("orientation"), std::string::npos);
    EXPECT_NE(message(R"({"vertices": [[0,0],[1,0],[1,1]], "cells": [[0,1,2]],)").find("line"), std::string::npos);
    EXPECT_NE(message(R"({"vertices": [[0,0],[1,0],[1,1]]})").find("cells"), std::string::npos);
    EXPECT_THROW(read_mesh("/nonexistent/mesh.json"), MeshError);
}

TEST(ElementGeometry, UnitSquare)
{
    const ElementGeometry g = element_geometry({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    EXPECT_DOUBLE_EQ(g.area, 1);
    EXPECT_NEAR((g.centroid - Point(0.5, 0.5)).norm(), 0, 1e-15);
    EXPECT_DOUBLE_EQ(g.diameter, std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(g.perimeter(), 4);
    EXPECT_NEAR((g.edge_normals[0] - Point(0, -1)).norm(), 0, 1e-15);
    EXPECT_NEAR((g.edge_normals[1] - Point(1, 0)).norm(), 0, 1e-15);
}

}  // namespace
