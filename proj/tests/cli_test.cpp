#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>

#include <gtest/gtest.h>

#include "shapeinst/mesh_io.hpp"
#include "shapeinst/phantom.hpp"
#include "shapeinst/pipeline.hpp"
#include "shapeinst/serialize.hpp"
#include "test_support.hpp"

using namespace shapeinst;
using testing_support::scratch_dir;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(SHAPEINST_CLI) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path write_config(const fs::path& dir, io::Json j) {
  if (!j.contains("version")) j["version"] = 1;
  const fs::path p = dir / "config.json";
  io::write_file_atomic(p, io::dump(j));
  return p;
}

io::Json small_phantom() {
  return {{"n_frames", 8}, {"n_vertices", 300}};
}

}  // namespace

TEST(Cli, ParseErrorsExitWithConfigCode) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("phantom --no-such-flag").code, 2);
  EXPECT_EQ(run("bogus").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, InvalidConfigValuesExitWithConfigCode) {
  const auto dir = scratch_dir("cli_badcfg");
  const auto cfg = write_config(dir, {{"phantom", {{"amplitude", 100.0}}}, {"out", dir.string()}});
  const CliRun r = run("phantom --config " + cfg.string());
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_NE(r.output.find("amplitude"), std::string::npos) << r.output;
  EXPECT_EQ(run("study --components 5-2").code, 2);
  EXPECT_EQ(run("study --ratio 1,x").code, 2);
  const auto nover = dir / "nover.json";
  io::write_file_atomic(nover, "{}");
  EXPECT_EQ(run("phantom --config " + nover.string()).code, 2);
}

TEST(Cli, MissingInputsExitWithDataCode) {
  const auto dir = scratch_dir("cli_missing");
  const auto cfg = write_config(dir, {{"mesh_manifest", (dir / "nope" / "manifest.json").string()},
                                      {"out", dir.string()}});
  EXPECT_EQ(run("plane --config " + cfg.string()).code, 3);
}

TEST(Cli, StaticSequenceHasNoPlane) {
  const auto dir = scratch_dir("cli_static");
  io::Json ph = small_phantom();
  ph["amplitude"] = 0.0;
  const auto cfg = write_config(dir, {{"phantom", ph}, {"out", (dir / "out").string()}});
  const CliRun r = run("plane --config " + cfg.string());
  EXPECT_EQ(r.code, 4) << r.output;
  EXPECT_NE(r.output.find("variance"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(dir / "out" / "plane.json"));
}

TEST(Cli, PlanePassesThroughTheMovingBand) {
  // Only the two rings nearest the equator move, so they are the informative
  // region and their centroid is the origin.
  PhantomSpec spec;
  spec.amplitude = 0.0;
  spec.n_vertices = 5000;
  spec.n_frames = 10;
  const ShapeSequence3D still = generate(spec);
  const Frame3 base = still.frame(0);
  std::vector<Eigen::Index> band;
  const Eigen::VectorXd elevation = base.col(2).cwiseAbs().cwiseQuotient(base.rowwise().norm());
  for (Eigen::Index i = 0; i < base.rows(); ++i) {
    if (elevation(i) < elevation.minCoeff() + 1e-9) band.push_back(i);
  }
  ASSERT_GT(band.size(), 20u);
  std::vector<Frame3> frames;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (auto i : band) centroid += base.row(i).transpose();
  centroid /= static_cast<double>(band.size());
  for (int t = 0; t < 10; ++t) {
    Frame3 f = base;
    const double s = std::sin(std::numbers::pi * t / 9.0);
    for (auto i : band) f.row(i) *= 1.0 + 0.1 * s;
    frames.push_back(f);
  }
  const auto dir = scratch_dir("cli_band");
  io::write_mesh_sequence(dir / "mesh", ShapeSequence3D(frames, still.triangles()));
  const auto cfg = write_config(dir, {{"mesh_manifest", (dir / "mesh" / "manifest.json").string()},
                                      {"out", (dir / "out").string()}});
  const CliRun r = run("plane --config " + cfg.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const io::Json j = io::parse_json(io::read_file(dir / "out" / "plane.json"), "plane.json");
  const ScanPlane p = io::plane_from_json(j["plane"]);
  EXPECT_LT(std::abs(p.signed_distance(centroid)), 2.0);
  EXPECT_GT(std::abs(p.normal.z()), 0.99);
  EXPECT_LE(j["informative_vertices"].get<std::size_t>(), default_sparsity_target(5000));
}

TEST(Cli, DefaultSparsityIsFivePercent) {
  const auto dir = scratch_dir("cli_sparsity");
  const auto cfg = write_config(dir, {{"phantom", small_phantom()}, {"out", dir.string()}});
  const CliRun r = run("plane --config " + cfg.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const io::Json c =
      io::parse_json(io::read_file(dir / "contributions.json"), "contributions.json");
  const auto nv = achievable_vertex_count(300);
  const auto selected = c["contributions"]["selected"].size();
  EXPECT_GT(selected, 0u);
  EXPECT_LE(selected, static_cast<std::size_t>(default_sparsity_target(nv)));
  EXPECT_EQ(default_sparsity_target(nv), std::max<Eigen::Index>(3, std::lround(0.05 * nv)));
  const io::ObjMesh m = io::read_obj(dir / "contributions.obj");
  EXPECT_EQ(m.vertices.rows(), nv);
}

TEST(Cli, FitThenInstantiateReproducesTrainingFrames) {
  const auto dir = scratch_dir("cli_fit");
  const auto cfg = write_config(dir, {{"phantom", small_phantom()}, {"out", dir.string()}});
  ASSERT_EQ(run("phantom --config " + cfg.string()).code, 0);
  ASSERT_EQ(run("slice --config " + cfg.string() + " --out " + (dir / "c").string() + " --numx 40")
                .code,
            0);
  const auto cfg2 = write_config(dir, {{"mesh_manifest", (dir / "manifest.json").string()},
                                       {"contour_manifest", (dir / "c" / "manifest.json").string()},
                                       {"numx", 40},
                                       {"out", dir.string()}});
  const CliRun f = run("fit --config " + cfg2.string() + " --regressor kplsr --components 7 --ratio 1");
  ASSERT_EQ(f.code, 0) << f.output;

  const auto contours = io::read_contour_sequence(dir / "c" / "manifest.json");
  const auto meshes = io::read_mesh_sequence(dir / "manifest.json");
  io::write_contour_csv(dir / "frame3.csv", contours.frame(3));
  const CliRun r = run("instantiate --config " + cfg2.string() + " --model " +
                    (dir / "model.json").string() + " --contour " + (dir / "frame3.csv").string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(std::regex_search(r.output, std::regex("prediction time: [0-9.]+ ms")));
  const io::ObjMesh m = io::read_obj(dir / "instance.obj");
  EXPECT_LT(mean_distance_error(m.vertices, meshes.frame(3)), 1e-3);
  EXPECT_EQ(m.triangles, meshes.triangles());
}

TEST(Cli, PlaneFileFeedsSlice) {
  const auto dir = scratch_dir("cli_chain");
  const auto cfg = write_config(dir, {{"phantom", small_phantom()}, {"out", dir.string()}});
  ASSERT_EQ(run("phantom --config " + cfg.string()).code, 0);
  const auto mesh = (dir / "manifest.json").string();
  const auto cfg2 = write_config(dir, {{"mesh_manifest", mesh}, {"out", (dir / "p").string()}});
  ASSERT_EQ(run("plane --config " + cfg2.string()).code, 0);
  const auto cfg3 = write_config(dir, {{"mesh_manifest", mesh},
                                       {"plane", (dir / "p" / "plane.json").string()},
                                       {"out", (dir / "s").string()}});
  const CliRun r = run("slice --config " + cfg3.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const io::Json written = io::parse_json(io::read_file(dir / "p" / "plane.json"), "p");
  const io::Json used = io::parse_json(io::read_file(dir / "s" / "plane.json"), "s");
  EXPECT_EQ(io::dump(written["plane"]), io::dump(used["plane"]));
}

TEST(Cli, InstantiateRejectsBadContours) {
  const auto dir = scratch_dir("cli_badcontour");
  const auto cfg = write_config(dir, {{"phantom", small_phantom()}, {"numx", 32}, {"out", dir.string()}});
  ASSERT_EQ(run("fit --config " + cfg.string() + " --regressor plsr --components 2").code, 0);
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "x,y\n1,2\n3,four\n";
  }
  const CliRun p = run("instantiate --config " + cfg.string() + " --model " +
                    (dir / "model.json").string() + " --contour " + (dir / "bad.csv").string());
  EXPECT_EQ(p.code, 3);
  EXPECT_NE(p.output.find("bad.csv:3"), std::string::npos) << p.output;

  io::write_contour_csv(dir / "short.csv", testing_support::regular_polygon(10, 5.0));
  const CliRun s = run("instantiate --config " + cfg.string() + " --model " +
                    (dir / "model.json").string() + " --contour " + (dir / "short.csv").string());
  EXPECT_EQ(s.code, 3);
  EXPECT_NE(s.output.find("numX = 32"), std::string::npos) << s.output;
}

TEST(Cli, EmptyStudyListIsANoOp) {
  const auto dir = scratch_dir("cli_nostudy");
  const auto cfg = write_config(dir, {{"phantom", small_phantom()}, {"out", (dir / "out").string()}});
  const CliRun r = run("study --config " + cfg.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("no studies selected"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, StudiesAreBitIdenticalAndReadable) {
  const auto dir = scratch_dir("cli_study");
  io::Json base{{"phantom", small_phantom()},
                {"studies", {"loocv", "components", "deviation", "registration", "boundary"}},
                {"components", "1-4"},
                {"ratios", {0.3, 1.0}},
                {"numx", 32},
                {"perturbations", {{{"rot_x_deg", 0}, {"rot_y_deg", 0}, {"translate_z_mm", 0}},
                                   {{"rot_x_deg", 3}, {"rot_y_deg", 0}, {"translate_z_mm", 0}}}}};
  base["out"] = (dir / "a").string();
  const auto cfg = write_config(dir, base);
  ASSERT_EQ(run("study --config " + cfg.string() + " --seed 11").code, 0);
  ASSERT_EQ(run("study --config " + cfg.string() + " --seed 11 --out " + (dir / "b").string()).code,
            0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    const auto name = e.path().filename();
    ASSERT_TRUE(fs::exists(dir / "b" / name)) << name;
    EXPECT_EQ(io::read_file(e.path()), io::read_file(dir / "b" / name)) << name;
    if (e.path().extension() == ".json") {
      EXPECT_NO_THROW(io::parse_json(io::read_file(e.path()), name.string()));
    }
    ++files;
  }
  EXPECT_GE(files, 5u);
  const ScanPlane p = io::plane_from_json(
      io::parse_json(io::read_file(dir / "a" / "plane.json"), "plane.json")["plane"]);
  EXPECT_NEAR(p.normal.norm(), 1.0, 1e-12);
}

TEST(Cli, PhantomArtifactsRoundTrip) {
  const auto dir = scratch_dir("cli_phantom");
  const auto cfg = write_config(dir, {{"phantom", small_phantom()}, {"out", dir.string()}});
  ASSERT_EQ(run("phantom --config " + cfg.string() + " --seed 3").code, 0);
  const auto seq = io::read_mesh_sequence(dir / "manifest.json");
  PhantomSpec spec = io::phantom_from_json(
      io::parse_json(io::read_file(dir / "phantom.json"), "phantom.json"));
  EXPECT_EQ(spec.seed, 3u);
  const ShapeSequence3D direct = generate(spec);
  ASSERT_EQ(seq.num_frames(), direct.num_frames());
  for (std::size_t t = 0; t < seq.num_frames(); ++t) EXPECT_TRUE(seq.frame(t) == direct.frame(t));
}
