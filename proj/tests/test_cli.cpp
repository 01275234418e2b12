// End-to-end checks of the command-line tool: exit codes, output trees,
// determinism across runs and worker counts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "mapeval/io.hpp"

using namespace mapeval;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "mapeval_cli_tests";

int run(const std::string& args) {
  const std::string cmd = std::string(MAPEVAL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int ret = std::system(cmd.c_str());
  return WEXITSTATUS(ret);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

void write_specs() {
  fs::create_directories(kWork);
  spit(kWork / "scene.txt",
       "# 160 m corridor with poles\n"
       "box -15 7 0 175 8 4\n"
       "box -15 -8 0 175 -7 4\n"
       "box -16 -8 0 -15 8 4\n"
       "box 175 -8 0 176 8 4\n"
       "pole 0 5 0.15 4\npole 20 5 0.15 4\npole 40 -5 0.15 4\npole 60 5 0.15 4\n"
       "pole 80 -5 0.15 4\npole 100 5 0.15 4\npole 120 -5 0.15 4\npole 140 5 0.15 4\n"
       "pole 160 -5 0.15 4\n");
  spit(kWork / "path.txt",
       "spacing 1.0\n"
       "closed 0\n"
       "waypoint 0 0\n"
       "waypoint 160 0\n");
}

bool trees_identical(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> rel;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
  }
  for (const fs::path& r : rel) {
    if (!fs::exists(b / r)) return false;
    if (slurp(a / r) != slurp(b / r)) return false;
  }
  return true;
}

constexpr const char* kSimFlags = "--n-lasers 16 --angular-resolution 2.0 --threads 2";

}  // namespace

TEST_CASE("missing inputs exit with the usage code") {
  write_specs();
  CHECK(run("simulate --scene " + (kWork / "missing.txt").string() + " --path " +
            (kWork / "path.txt").string() + " --out " + (kWork / "b0").string()) == 2);
  CHECK(run("bogus-subcommand") == 2);
  CHECK(run("") == 2);
}

TEST_CASE("simulate writes a self-describing benchmark tree") {
  write_specs();
  const fs::path out = kWork / "bench";
  fs::remove_all(out);
  REQUIRE(run("simulate --scene " + (kWork / "scene.txt").string() + " --path " +
              (kWork / "path.txt").string() + " --out " + out.string() + " --seed 5 " +
              kSimFlags) == 0);

  const Manifest manifest = read_manifest((out / "manifest.txt").string());
  CHECK(manifest.frame_count == 161);
  const Trajectory traj = read_trajectory((out / "trajectory.txt").string());
  CHECK(traj.size() == 161);
  for (std::int64_t i = 0; i < manifest.frame_count; ++i) {
    CHECK(fs::exists(out / cloud_file_name(manifest.cloud_pattern, i)));
  }
}

TEST_CASE("simulate is deterministic for a fixed seed") {
  write_specs();
  const fs::path a = kWork / "det_a";
  const fs::path b = kWork / "det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const std::string common = "simulate --scene " + (kWork / "scene.txt").string() + " --path " +
                             (kWork / "path.txt").string() + " --noise-sigma 0.01 --seed 9 " +
                             kSimFlags;
  REQUIRE(run(common + " --out " + a.string()) == 0);
  REQUIRE(run(common + " --out " + b.string()) == 0);
  CHECK(trees_identical(a, b));
}

TEST_CASE("perturb splits the path into the planned segments") {
  write_specs();
  const fs::path bench = kWork / "bench";
  REQUIRE(fs::exists(bench / "trajectory.txt"));

  const std::string traj_in = (bench / "trajectory.txt").string();
  const fs::path out1 = kWork / "perturbed_z.txt";
  const fs::path plan1 = kWork / "plan_z.txt";
  REQUIRE(run("perturb --trajectory " + traj_in + " --mode z --out " + out1.string() +
              " --plan " + plan1.string() + " --seed 3") == 0);

  const DisturbancePlan plan = read_plan(plan1.string());
  CHECK(plan.segments.size() == 2);  // what fits on a 160 m path
  for (const auto& seg : plan.segments) CHECK(seg.axis == DisturbanceAxis::Z);

  const Trajectory original = read_trajectory(traj_in);
  const Trajectory perturbed = read_trajectory(out1.string());
  std::size_t moved = 0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    CHECK(perturbed.poses[i].translation.x() == original.poses[i].translation.x());
    CHECK(perturbed.poses[i].translation.y() == original.poses[i].translation.y());
    if (perturbed.poses[i].translation.z() != original.poses[i].translation.z()) ++moved;
  }
  CHECK(moved == 100);  // two 50 m segments at 1 m spacing

  // same seed reproduces the plan bit-exactly
  const fs::path plan2 = kWork / "plan_z2.txt";
  REQUIRE(run("perturb --trajectory " + traj_in + " --mode z --out " +
              (kWork / "perturbed_z2.txt").string() + " --plan " + plan2.string() +
              " --seed 3") == 0);
  CHECK(slurp(plan1) == slurp(plan2));

  // too-short trajectories are a usage error
  Trajectory tiny;
  for (int i = 0; i < 10; ++i) {
    Pose p;
    p.index = i;
    p.translation = {static_cast<double>(i), 0, 0};
    tiny.poses.push_back(p);
  }
  write_trajectory((kWork / "tiny.txt").string(), tiny);
  CHECK(run("perturb --trajectory " + (kWork / "tiny.txt").string() + " --mode xy --out " +
            (kWork / "tiny_out.txt").string() + " --plan " + (kWork / "tiny_plan.txt").string()) ==
        2);
}

TEST_CASE("evaluate reports perfect accuracy on the clean benchmark") {
  write_specs();
  const fs::path bench = kWork / "bench";
  const fs::path report = kWork / "report_clean.txt";
  REQUIRE(run("evaluate --trajectory " + (bench / "trajectory.txt").string() + " --clouds " +
              bench.string() + " --report " + report.string() + " --threads 2") == 0);
  const ParsedReport parsed = read_report(report.string());
  CHECK(parsed.report.p_acc == 1.0);
  CHECK(parsed.report.bad_pose_indices.empty());
}

TEST_CASE("worker count has no effect on the report bytes") {
  write_specs();
  const fs::path bench = kWork / "bench";
  const fs::path r1 = kWork / "report_t1.txt";
  const fs::path r4 = kWork / "report_t4.txt";
  const std::string common = "evaluate --trajectory " + (kWork / "perturbed_z.txt").string() +
                             " --clouds " + bench.string() + " --report ";
  REQUIRE(run(common + r1.string() + " --threads 1") == 0);
  REQUIRE(run(common + r4.string() + " --threads 4") == 0);
  CHECK(slurp(r1) == slurp(r4));
}

TEST_CASE("a bad map still evaluates successfully and exports ghosts") {
  write_specs();
  const fs::path bench = kWork / "bench";
  const fs::path report = kWork / "report_bad.txt";
  const fs::path ghosts = kWork / "ghosts";
  fs::remove_all(ghosts);
  REQUIRE(run("evaluate --trajectory " + (kWork / "perturbed_z.txt").string() + " --clouds " +
              bench.string() + " --report " + report.string() + " --threads 2 --ghosts-dir " +
              ghosts.string()) == 0);

  const ParsedReport parsed = read_report(report.string());
  CHECK(!parsed.report.bad_pose_indices.empty());
  CHECK(parsed.report.p_acc < 1.0);
  for (std::int64_t idx : parsed.report.bad_pose_indices) {
    char name[48];
    std::snprintf(name, sizeof(name), "ghosts_pose_%06lld.ply", static_cast<long long>(idx));
    CHECK(fs::exists(ghosts / name));
  }
}

TEST_CASE("config flags reach the evaluation") {
  write_specs();
  const fs::path bench = kWork / "bench";
  const fs::path report = kWork / "report_cfg.txt";
  REQUIRE(run("evaluate --trajectory " + (bench / "trajectory.txt").string() + " --clouds " +
              bench.string() + " --report " + report.string() +
              " --threads 2 --submap-radius-m 12.5 --ordinary-ratio-threshold 0.5") == 0);
  const ParsedReport parsed = read_report(report.string());
  CHECK(parsed.config.submap_radius_m == 12.5);
  CHECK(parsed.config.ordinary_ratio_threshold == 0.5);
}

TEST_CASE("explicit flags win over the config file") {
  write_specs();
  const fs::path bench = kWork / "bench";
  const fs::path cfg_file = kWork / "eval_config.txt";
  spit(cfg_file,
       "submap_radius_m 25\n"
       "ordinary_ratio_threshold 0.5\n"
       "pca_min_neighbors 10\n");
  const fs::path report = kWork / "report_cfg_file.txt";
  REQUIRE(run("evaluate --trajectory " + (bench / "trajectory.txt").string() + " --clouds " +
              bench.string() + " --report " + report.string() + " --config " +
              cfg_file.string() + " --threads 2 --submap-radius-m 12.5") == 0);
  const ParsedReport parsed = read_report(report.string());
  CHECK(parsed.config.submap_radius_m == 12.5);          // flag beats file
  CHECK(parsed.config.ordinary_ratio_threshold == 0.5);  // file beats default
  CHECK(parsed.config.pca_min_neighbors == 10);
}

TEST_CASE("mismatched inputs exit with the usage code") {
  write_specs();
  const fs::path bench = kWork / "bench";
  CHECK(run("evaluate --trajectory " + (kWork / "tiny.txt").string() + " --clouds " +
            bench.string() + " --report " + (kWork / "r.txt").string()) == 2);
}
