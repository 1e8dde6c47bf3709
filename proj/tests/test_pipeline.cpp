#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <map>

#include "json.hpp"
#include "support.hpp"
#include "vcqc/pipeline/commands.hpp"
#include "vcqc/synth/printed_wall.hpp"

using namespace vcqc;
namespace fs = std::filesystem;

namespace {

// Short five-layer wall; fits one 512 tile unless the image is widened.
fs::path write_wall(const fs::path& dir, double length_m = 0.3) {
  SynthSpec spec;
  spec.length_m = length_m;
  spec.surface_noise_sigma_mm = 0.3;
  const auto s = generate(spec, 42);
  const fs::path p = dir / "wall.ply";
  save_ply(p, s.cloud, PlyEncoding::BinaryLE, &s.labels);
  return p;
}

PipelineConfig config_for(const fs::path& input, const fs::path& out, std::vector<std::string> extra = {}) {
  std::vector<std::string> o{"input.path=" + input.string(), "output.dir=" + out.string(), "render.splat_radius_px=0"};
  o.insert(o.end(), extra.begin(), extra.end());
  return parse_config("", o);
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root).generic_string();
    if (rel == "timing.json") continue;
    files[rel] = detail::read_file(e.path());
  }
  return files;
}

void run_commands(const PipelineConfig& cfg) {
  cmd_render(cfg);
  cmd_segment(cfg);
  cmd_merge(cfg);
  cmd_profile(cfg);
  cmd_backproject(cfg);
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(detail::read_file(p)); }

}  // namespace

TEST(Config, ParsesIniAndOverrides) {
  const std::string ini =
      "; comment\n[input]\npath = cloud.ply\n[camera]\nmode = ksp\nsensor_pos = 10, 0, 1.5\nksp_mode = horizontal\n"
      "target_gsd_m = 0.002\n[tiling]\noverlap_px = 32\n[profile]\nmode = mean\n[output]\ndir = out\n";
  const auto c = parse_config(ini, {"tiling.tile_px=256", "camera.target_gsd_m=0.001"});
  EXPECT_EQ(c.input, "cloud.ply");
  EXPECT_EQ(c.camera.mode, CameraMode::KSP);
  EXPECT_EQ(*c.camera.sensor_pos, Vec3(10, 0, 1.5));
  EXPECT_EQ(c.camera.ksp_mode, KspMode::Horizontal);
  EXPECT_EQ(c.camera.target_gsd_m, 0.001);
  EXPECT_EQ(c.tiling.tile_px, 256);
  EXPECT_EQ(c.tiling.overlap_px, 32);
  EXPECT_EQ(c.profile.mode, ProfileMode::Mean);
  EXPECT_EQ(c.render.radius_px, 1);
  EXPECT_EQ(c.tiling.iou_threshold, 0.5);
}

TEST(Config, RejectsBadConfigurations) {
  const std::vector<std::string> base{"output.dir=o"};
  auto rejects = [&](std::string ini, std::vector<std::string> extra) {
    auto o = base;
    o.insert(o.end(), extra.begin(), extra.end());
    EXPECT_THROW(parse_config(ini, o), ConfigError) << ini;
  };
  rejects("[camera]\nzoom = 3\n", {});
  rejects("", {"camera.zoom=3"});
  rejects("", {"camera.mode=ksp"});
  rejects("", {"camera.mode=orbit"});
  rejects("", {"camera.focal_mm=abc"});
  rejects("", {"camera.focal_mm=-4"});
  rejects("", {"camera.cx=10"});
  rejects("", {"camera.sensor_pos=1,2"});
  rejects("", {"tiling.overlap_px=512"});
  rejects("", {"tiling.iou_threshold=1.5"});
  rejects("", {"render.splat_radius_px=9"});
  rejects("", {"segmentation.backend=external"});
  rejects("", {"profile.mode=median"});
  rejects("", {"novalue"});
  rejects("[camera\n", {});
  EXPECT_THROW(parse_config("", {}), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/vcqc.ini", base), ConfigError);
  EXPECT_NO_THROW(parse_config("", {"output.dir=o", "camera.mode=ksp", "camera.sensor_pos=1,2,3"}));
}

TEST(Pipeline, MissingInputFailsBeforeOutput) {
  const auto dir = test::scratch_dir("pipe_missing");
  const auto cfg = config_for(dir / "nope.ply", dir / "out");
  try {
    cmd_render(cfg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("nope.ply"), std::string::npos);
  }
  EXPECT_THROW(run_pipeline(cfg), ConfigError);
  EXPECT_FALSE(fs::exists(dir / "out"));
  const auto plan_cfg = config_for(write_wall(dir), dir / "out", {"profile.plan=" + (dir / "plan.txt").string()});
  EXPECT_THROW(run_pipeline(plan_cfg), ConfigError);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Pipeline, RunMatchesIndividualCommandsAndRepeats) {
  const auto dir = test::scratch_dir("pipe_run");
  const auto input = write_wall(dir, 0.6);
  std::ofstream(dir / "plan.txt") << "# bottom first\n10 10 10\n10 10\n";
  const std::string plan = "profile.plan=" + (dir / "plan.txt").string();
  run_pipeline(config_for(input, dir / "a", {plan}));
  run_pipeline(config_for(input, dir / "b", {plan}));
  run_commands(config_for(input, dir / "c", {plan}));
  const auto a = snapshot(dir / "a");
  EXPECT_EQ(a, snapshot(dir / "b"));
  EXPECT_EQ(a, snapshot(dir / "c"));
  EXPECT_TRUE(a.count("render/image.png"));
  EXPECT_TRUE(a.count("render/index.vcidx"));
  EXPECT_TRUE(a.count("labeled.ply"));

  const auto manifest = read_manifest(dir / "a/tiles/manifest.json");
  EXPECT_GE(manifest.tiles.size(), 2u);
  for (std::size_t i = 0; i < manifest.tiles.size(); ++i) EXPECT_TRUE(a.count("masks/" + tile_stem(int(i)) + ".json"));

  const auto report = load_json(dir / "a/profile/report.json");
  ASSERT_EQ(report["instances"].size(), 5u);
  for (const auto& inst : report["instances"]) {
    EXPECT_NEAR(inst["stats"]["mean_mm"].get<double>(), 10.0, 2.0);
    EXPECT_TRUE(a.count("profile/plot_" + std::to_string(inst["id"].get<int>()) + ".png"));
  }
  ASSERT_EQ(report["plan"]["entries"].size(), 5u);
  for (const auto& e : report["plan"]["entries"]) EXPECT_LE(std::abs(e["deviation_mm"].get<double>()), 2.0);

  const auto labeled = read_cloud(dir / "a/labeled.ply");
  ASSERT_TRUE(labeled.labels);
  const auto index = read_index_raster(dir / "a/render/index.vcidx");
  std::vector<std::uint8_t> seen(labeled.cloud.size(), 0);
  for (auto v : index.data) {
    if (v != kEmptyIndex) seen[v] = 1;
  }
  std::size_t visible = 0, hit = 0;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    EXPECT_TRUE(seen[i] || (*labeled.labels)[i] == 0);
    visible += seen[i];
    hit += seen[i] && (*labeled.labels)[i] != 0;
  }
  EXPECT_GE(hit, 0.95 * visible);
}

TEST(Pipeline, TimingReport) {
  const auto dir = test::scratch_dir("pipe_timing");
  const auto t = run_pipeline(config_for(write_wall(dir), dir / "out"));
  const auto j = load_json(dir / "out/timing.json");
  ASSERT_EQ(j["stages"].size(), 4u);
  double sum = 0;
  for (int i = 0; i < 3; ++i) sum += j["stages"][i]["ms"].get<double>();
  const double total = j["stages"][3]["ms"].get<double>();
  EXPECT_EQ(j["stages"][3]["stage"], "total");
  EXPECT_NEAR(sum, total, 0.05 * total);
  EXPECT_NEAR(j["fps"].get<double>(), 1000.0 / total, 1e-9 * j["fps"].get<double>());
  EXPECT_EQ(j["tiles"].get<std::size_t>(), t.tiles);
  EXPECT_GT(total, 0.0);
}

TEST(Pipeline, EmptyTilesAndNoInstances) {
  const auto dir = test::scratch_dir("pipe_empty");
  const auto input = write_wall(dir);
  // A 2048 px wide frame leaves the outer tiles without points.
  run_pipeline(config_for(input, dir / "wide", {"camera.width_px=2048", "camera.height_px=512"}));
  const auto manifest = read_manifest(dir / "wide/tiles/manifest.json");
  const auto first = load_json(dir / "wide/masks/tile_0000.json");
  EXPECT_EQ(manifest.tiles.size(), 5u);
  EXPECT_TRUE(first["masks"].empty());
  EXPECT_EQ(first["frame"], "tile");

  run_pipeline(config_for(input, dir / "none", {"segmentation.contrast_floor=1"}));
  const auto report = load_json(dir / "none/profile/report.json");
  EXPECT_TRUE(report["instances"].empty());
  EXPECT_TRUE(report["plan"].is_null());
  EXPECT_TRUE(load_json(dir / "none/instances.json")["masks"].empty());
  const auto labeled = read_cloud(dir / "none/labeled.ply");
  for (auto l : *labeled.labels) EXPECT_EQ(l, 0u);
}

TEST(Pipeline, ExternalMasksAreValidated) {
  const auto dir = test::scratch_dir("pipe_external");
  const auto input = write_wall(dir);
  run_pipeline(config_for(input, dir / "base"));
  const auto ext = dir / "ext";
  fs::copy(dir / "base/masks", ext);
  const std::vector<std::string> use_ext{"segmentation.backend=external", "segmentation.external_dir=" + ext.string()};
  run_pipeline(config_for(input, dir / "from_ext", use_ext));
  EXPECT_EQ(detail::read_file(dir / "from_ext/instances.json").size(),
            detail::read_file(dir / "base/instances.json").size());
  EXPECT_EQ(load_json(dir / "from_ext/profile/report.json")["instances"],
            load_json(dir / "base/profile/report.json")["instances"]);

  std::ofstream(ext / "tile_0000.json") << R"({"format":"vcqc-masks/1","image_id":"x","width":512})";
  try {
    run_pipeline(config_for(input, dir / "bad", use_ext));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("tile_0000.json"), std::string::npos) << e.what();
  }
  fs::remove(ext / "tile_0000.json");
  EXPECT_THROW(run_pipeline(config_for(input, dir / "bad2", use_ext)), DataError);
}

TEST(Pipeline, KspPlacementRendersTheWall) {
  const auto dir = test::scratch_dir("pipe_ksp");
  run_pipeline(config_for(write_wall(dir), dir / "out", {"camera.mode=ksp", "camera.sensor_pos=0.15,-3,0.5",
                                                         "camera.ksp_mode=horizontal"}));
  EXPECT_EQ(load_json(dir / "out/profile/report.json")["instances"].size(), 5u);
}

TEST(Pipeline, PlanParsing) {
  EXPECT_EQ(parse_plan("10 10\n# c\n 9.5\n", "p"), (std::vector<double>{10, 10, 9.5}));
  EXPECT_TRUE(parse_plan("", "p").empty());
  EXPECT_THROW(parse_plan("10 -1\n", "p"), DataError);
  EXPECT_THROW(parse_plan("10\nabc\n", "p"), DataError);
  const auto dir = test::scratch_dir("pipe_plan");
  std::ofstream(dir / "short.txt") << "10 10\n";
  EXPECT_THROW(run_pipeline(config_for(write_wall(dir), dir / "out", {"profile.plan=" + (dir / "short.txt").string()})),
               DataError);
}

#ifdef VCQC_CLI
namespace {
int cli(const std::string& args) {
  const int rc = std::system((std::string(VCQC_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}
}  // namespace

TEST(Cli, ExitCodes) {
  const auto dir = test::scratch_dir("cli");
  const std::string d = dir.string();
  EXPECT_EQ(cli("synth --out " + d + "/w.ply --length-m 0.2 --seed 3"), 0);
  EXPECT_TRUE(fs::exists(dir / "w.ply.truth.json"));
  EXPECT_EQ(cli("run --set input.path=" + d + "/w.ply --set output.dir=" + d + "/o"), 0);
  EXPECT_TRUE(fs::exists(dir / "o/timing.json"));
  EXPECT_EQ(cli("profile --set input.path=" + d + "/w.ply --set output.dir=" + d + "/o"), 0);
  EXPECT_EQ(cli("render --set input.path=" + d + "/missing.ply --set output.dir=" + d + "/o2"), 2);
  EXPECT_EQ(cli("render --set input.path=" + d + "/w.ply --set output.dir=" + d + "/o3 --set camera.mode=ksp"), 2);
  EXPECT_FALSE(fs::exists(dir / "o3"));
  EXPECT_EQ(cli("render --set bogus.key=1 --set output.dir=" + d + "/o4"), 2);
  EXPECT_EQ(cli("merge --set output.dir=" + d + "/empty"), 3);
  EXPECT_EQ(cli("synth --out " + d + "/x.ply --layers 0"), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("--help"), 0);
  std::ofstream(dir / "junk.xyz") << "1 2 x\n";
  EXPECT_EQ(cli("render --set input.path=" + d + "/junk.xyz --set output.dir=" + d + "/o5"), 3);
}
#endif
