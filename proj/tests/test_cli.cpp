#include "cli.hpp"

#include "stvem/geometry.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace stvem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    const int code = cli_main(args, out, err);
    return {code, out.str(), err.str()};
}

TEST(Cli, UnknownFlagIsAConfigError)
{
    const Result r = run({"study", "--case", "ex1", "--frobnicate"});
    EXPECT_EQ(r.code, exit_config);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, MissingSubcommandIsAConfigError) { EXPECT_EQ(run({}).code, exit_config); }

TEST(Cli, MeshGenWritesParsableJson)
{
    const Result r = run({"mesh", "gen", "--mesh-family", "voronoi", "--mesh-size", "1/5"});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    const PolyMesh m = mesh_from_json(r.out);
    EXPECT_GT(m.num_cells(), 10);
    EXPECT_NEAR(m.total_area(), 1.0, 1e-12);
}

TEST(Cli, UnknownFamilyIsAConfigError)
{
    EXPECT_EQ(run({"mesh", "gen", "--mesh-family", "hexagonal", "--mesh-size", "1/5"}).code, exit_config);
    EXPECT_EQ(run({"mesh", "gen", "--mesh-family", "voronoi", "--mesh-size", "-1"}).code, exit_config);
}

TEST(Cli, SmallStudyPrintsTable)
{
    const Result r = run({"study", "--case", "ex3", "--order", "1", "--mesh-family", "distorted_square", "--h-list", "1/4,1/8"});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("case,family,k,h,E_u_H1,rate", 0), 0u);
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 2);
}

TEST(Cli, IterationCapExitsNotConverged)
{
    const Result r = run({"solve", "--case", "ex3", "--order", "1", "--mesh-family", "distorted_square", "--mesh-size", "1/4",
                          "--max-iter", "1"});
    EXPECT_EQ(r.code, exit_not_converged);
    EXPECT_NE(r.out.find("false"), std::string::npos);
}

TEST(Cli, ConfigFile)
{
    const auto dir = std::filesystem::temp_directory_path();
    const auto good = (dir / "stvem_cli_good.json").string();
    const auto bad = (dir / "stvem_cli_bad.json").string();
    std::ofstream(good) << R"({"case": "ex3", "order": 1, "mesh_family": "distorted_square", "h_list": ["1/4"]})";
    std::ofstream(bad) << R"({"case": "ex3", "stabilisation": 1})";
    const Result ok = run({"study", "--config", good});
    EXPECT_EQ(ok.code, exit_ok) << ok.err;
    const Result ko = run({"study", "--config", bad});
    EXPECT_EQ(ko.code, exit_config);
    EXPECT_NE(ko.err.find("stabilisation"), std::string::npos);
    std::filesystem::remove(good);
    std::filesystem::remove(bad);
}

TEST(Cli, NoStabChangesTheSolution)
{
    const std::vector<std::string> base{"solve", "--case", "ex4_mild", "--order", "1", "--mesh-family", "triangular", "--mesh-size", "1/4"};
    auto with = base;
    with.push_back("--no-stab");
    const Result a = run(base), b = run(with);
    ASSERT_EQ(a.code, exit_ok) << a.err;
    ASSERT_EQ(b.code, exit_ok) << b.err;
    EXPECT_NE(a.out, b.out);
}

TEST(Cli, ExportWritesVtk)
{
    const auto path = (std::filesystem::temp_directory_path() / "stvem_cli_export.vtk").string();
    const Result r = run({"export", "--case", "ex1", "--order", "1", "--mesh-family", "uniform_square", "--mesh-size", "1/4",
                          "--format", "vtk", "--out", path});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first, "# vtk DataFile Version 3.0");
    std::filesystem::remove(path);
}

}  // namespace
