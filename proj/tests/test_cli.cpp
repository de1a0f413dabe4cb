#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "curvem/driver.hpp"

using namespace curvem;

namespace {

std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

}  // namespace

TEST(Generators, InterfaceMeshStructure) {
  const Mesh m = square_circle_interface(4, 0.3);
  const auto adj = m.edge_elements();
  int arcs = 0;
  for (int e = 0; e < static_cast<int>(m.edges.size()); ++e) {
    if (!m.edges[e].is_curved_declared()) continue;
    ++arcs;
    ASSERT_GE(m.edges[e].curve, 0);
    EXPECT_TRUE(std::holds_alternative<CircularArc>(m.curves[m.edges[e].curve].shape()));
    ASSERT_EQ(adj[e].size(), 2u);
    EXPECT_NE(m.elements[adj[e][0]].region, m.elements[adj[e][1]].region);
  }
  EXPECT_EQ(arcs, 8);
  const std::size_t e4 = m.elements.size(), e8 = square_circle_interface(8, 0.3).elements.size();
  EXPECT_EQ(e8, 4 * e4);
  EXPECT_THROW(square_circle_interface(4, 0.6), ConfigError);
  EXPECT_THROW(square_circle_interface(3, 0.3), ConfigError);
}

TEST(Generators, ShapeRegularity) {
  for (int n : {4, 8, 16}) {
    for (const Mesh& m : {square_circle_interface(n, 0.3), disk_boundary(n), square_straight(n)})
      for (const auto& E : m.elements) {
        EXPECT_GE(E.rho_ratio, 0.1);
        EXPECT_GE(E.min_edge_ratio, 0.1);
      }
  }
}

TEST(MeshIo, RoundTripIsBitwise) {
  Mesh m = square_circle_interface(4, 0.3, {ArcMode::Arc, BoundaryMode::Mixed});
  m.curves.emplace_back(BezierCubic{{Point(0.1, 0.2), Point(1.0 / 3, 0.7), Point(0.9, 1e-17), Point(2, 3)}});
  m.curves.emplace_back(PolyParametric{{0.1, 1.0 / 7}, {std::sqrt(2.0), -0.3}}, -1.0, 2.0, Warp::Cubic);
  const json j = mesh_to_json(m);
  const Mesh r = mesh_from_json(json::parse(j.dump()));
  ASSERT_EQ(r.vertices.size(), m.vertices.size());
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    EXPECT_EQ(r.vertices[i].x(), m.vertices[i].x());
    EXPECT_EQ(r.vertices[i].y(), m.vertices[i].y());
  }
  EXPECT_EQ(mesh_to_json(r).dump(), j.dump());
}

TEST(MeshIo, ErrorsCarryLocation) {
  json j = mesh_to_json(square_straight(1));
  j["edges"][2]["boundary"] = "neumann";
  try {
    mesh_from_json(j);
    FAIL();
  } catch (const MeshError& e) {
    EXPECT_NE(std::string(e.what()).find("edges[2]"), std::string::npos);
  }
  j = mesh_to_json(square_straight(1));
  j["format"] = "other";
  EXPECT_THROW(mesh_from_json(j), MeshError);
}

TEST(Config, ParseAndValidate) {
  const RunConfig c = config_from_json(json::parse(R"({"version": 1, "k": 2, "levels": [4, 8, 16], "solver": "cg"})"));
  EXPECT_EQ(c.k, std::vector<int>{2});
  EXPECT_EQ(c.solver, "cg");
  EXPECT_THROW(config_from_json(json::parse(R"({"k": 2})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"version": 1, "kk": 2})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"version": 1, "k": "two"})")), ConfigError);
  RunConfig bad;
  bad.k = {4};
  EXPECT_THROW(validate(bad), ConfigError);
}

TEST(Commands, PatchTestPassesAndNegativeControlFails) {
  RunConfig c;
  std::ostringstream out;
  EXPECT_EQ(cmd_patch_test(c, out), kPass) << out.str();
  c.tgp_corruption = 0.1;
  std::ostringstream out2;
  EXPECT_EQ(cmd_patch_test(c, out2), kToleranceFailure) << out2.str();
}

TEST(Commands, InputErrorsExitWithTwo) {
  RunConfig c;
  c.mesh_file = "/nonexistent/mesh.json";
  std::ostringstream err;
  EXPECT_EQ(guarded([&] { return cmd_solve(c, std::cout); }, err), kInputError);
  EXPECT_NE(err.str().find("not found"), std::string::npos);
  c = RunConfig{};
  c.problem = "unknown";
  EXPECT_EQ(guarded([&] { return cmd_solve(c, std::cout); }, err), kInputError);
}

TEST(Commands, GenMeshThenSolveFromFile) {
  RunConfig g;
  g.generator = "disk-boundary";
  g.boundary = "robin";
  g.output = tmp("curvem_disk.json");
  std::ostringstream out;
  ASSERT_EQ(cmd_gen_mesh(g, out), kPass);
  RunConfig s;
  s.mesh_file = g.output;
  s.problem = "robin-disk";
  s.k = {2};
  s.output = tmp("curvem_field.json");
  ASSERT_EQ(cmd_solve(s, out), kPass);
  const json f = read_json_file(s.output);
  EXPECT_EQ(f["format"], "curvem-field/1");
  EXPECT_EQ(f["elements"].size(), read_mesh(g.output).elements.size());
  EXPECT_EQ(f["elements"][0]["coeffs"].size(), 6u);
  RunConfig i;
  i.mesh_file = g.output;
  std::ostringstream info;
  EXPECT_EQ(cmd_mesh_info(i, info), kPass);
  EXPECT_NE(info.str().find("robin=8"), std::string::npos) << info.str();
  std::filesystem::remove(g.output);
  std::filesystem::remove(s.output);
}

TEST(Commands, ConvergenceCsvIsDeterministic) {
  RunConfig c;
  c.problem = "smooth";
  c.k = {1};
  c.levels = {4, 8, 16};
  std::ostringstream a, b;
  ASSERT_EQ(cmd_convergence(c, a), kPass);
  ASSERT_EQ(cmd_convergence(c, b), kPass);
  const std::string csv = a.str();
  EXPECT_EQ(csv, b.str());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}
