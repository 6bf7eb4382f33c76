#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "morsefield/cli.hpp"
#include "morsefield/patch_file.hpp"

using namespace morsefield;
using Json = nlohmann::ordered_json;

namespace {

const std::string kFixtures = MORSEFIELD_FIXTURE_DIR;
const std::string kData = MORSEFIELD_TEST_DATA_DIR;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "morsefield");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

Run binary(const std::string& args) {
  Run r;
  FILE* pipe = popen((std::string(MORSEFIELD_CLI) + " " + args + " 2>/dev/null").c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("analyze reports the census and honours --strict") {
  const Run b = run({"analyze", kFixtures + "/B.patch"});
  REQUIRE(b.code == kExitOk);
  const Json j = Json::parse(b.out);
  CHECK(j["command"] == "analyze");
  CHECK(j["input"]["file"] == "B.patch");
  CHECK(j["morse"] == true);
  CHECK(j["census"]["points"].size() == 1);
  CHECK(j["exit_code"] == 0);
  CHECK_FALSE(j.contains("timings"));
  CHECK(run({"analyze", kFixtures + "/B.patch", "--strict"}).code == kExitOk);
  CHECK(run({"analyze", kFixtures + "/C.patch"}).code == kExitOk);
  CHECK(run({"analyze", kFixtures + "/C.patch", "--strict"}).code == kExitFailure);
  CHECK(run({"analyze", kFixtures + "/A.patch", "--strict"}).code == kExitFailure);
  CHECK(Json::parse(run({"analyze", kFixtures + "/B.patch", "--timings"}).out).contains("timings"));
}

TEST_CASE("input problems exit 2") {
  const Run bad = run({"verify", kData + "/malformed.patch"});
  CHECK(bad.code == kExitInput);
  CHECK(bad.err.find("malformed.patch:7:") != std::string::npos);
  CHECK(run({"analyze", kData + "/broken_symmetry.patch"}).code == kExitInput);
  CHECK(run({"analyze", "/nonexistent.patch"}).code == kExitInput);
  CHECK(run({"analyze", kFixtures + "/B.patch", "--format", "xml"}).code == kExitInput);
  CHECK(run({"frobnicate", kFixtures + "/B.patch"}).code == kExitInput);
  CHECK(run({"perturb", kFixtures + "/A.patch", "--target", "5"}).code == kExitInput);
}

TEST_CASE("verify passes on the fixtures and fails on broken symmetry") {
  for (const char* name : {"A", "B", "C", "sheared", "skewed"}) {
    CAPTURE(name);
    const Run r = run({"verify", kFixtures + "/" + name + ".patch"});
    CHECK(r.code == kExitOk);
    CHECK(Json::parse(r.out)["passed"] == true);
  }
  const Run broken = run({"verify", kData + "/broken_symmetry.patch"});
  CHECK(broken.code == kExitFailure);
  bool symmetry_failed = false;
  const Json report = Json::parse(broken.out);
  for (const auto& c : report["checks"]) {
    if (c["name"] == "symmetry") symmetry_failed = c["passed"] == false;
  }
  CHECK(symmetry_failed);
}

TEST_CASE("geometric refusals exit 3") {
  CHECK(run({"perturb", kFixtures + "/flat.patch"}).code == kExitGeometry);
  CHECK(run({"perturb", kFixtures + "/sphere.patch"}).code == kExitGeometry);
  CHECK(run({"perturb", kFixtures + "/sheared.patch"}).code == kExitGeometry);
  CHECK(run({"fermi", kData + "/focal.patch", "--radius", "0.3", "--depth", "0.3", "--grid", "12x8"}).code ==
        kExitGeometry);
  CHECK(run({"fermi", kFixtures + "/A.patch", "--radius", "0.49", "--grid", "12x8"}).code == kExitGeometry);
}

TEST_CASE("perturb writes a patch that re-analyzes as Morse") {
  const std::string out = tmp("morsefield_cli_C.patch");
  const Run r = run({"perturb", kFixtures + "/C.patch", "--mode", "tangent", "--out-patch", out});
  REQUIRE(r.code == kExitOk);
  const Json j = Json::parse(r.out);
  CHECK(j["morsify"]["success"] == true);
  CHECK(run({"analyze", out, "--strict"}).code == kExitOk);
  std::filesystem::remove(out);

  const Run a = run({"perturb", kFixtures + "/A.patch", "--mode", "conformal", "--target", "1"});
  CHECK(a.code == kExitOk);
}

TEST_CASE("fermi writes a grid patch") {
  const std::string out = tmp("morsefield_cli_skewed.mfgrid");
  const Run r = run({"fermi", kFixtures + "/skewed.patch", "--grid", "12x8", "--radius", "0.3", "--out-patch", out});
  REQUIRE(r.code == kExitOk);
  CHECK(Json::parse(r.out)["residuals"]["max"].get<double>() <= 1e-8);
  const LoadedPatch g = load_patch_file(out);
  CHECK(g.grid.has_value());
  CHECK(g.patch.normal_gauge());
  CHECK(run({"verify", out}).code == kExitOk);
  std::filesystem::remove(out);
}

TEST_CASE("reports are deterministic and seeds resolve flag, then environment, then default") {
  const std::vector<std::string> args{"verify", kFixtures + "/B.patch"};
  unsetenv("MORSEFIELD_SEED");
  const Run first = run(args);
  CHECK(first.out == run(args).out);
  CHECK(Json::parse(first.out)["seed"] == 20240611);

  setenv("MORSEFIELD_SEED", "77", 1);
  CHECK(Json::parse(run(args).out)["seed"] == 77);
  std::vector<std::string> flagged = args;
  flagged.insert(flagged.end(), {"--seed", "5"});
  CHECK(Json::parse(run(flagged).out)["seed"] == 5);
  unsetenv("MORSEFIELD_SEED");

  const std::string f1 = tmp("morsefield_det1.json"), f2 = tmp("morsefield_det2.json");
  CHECK(run({"perturb", kFixtures + "/C.patch", "--out", f1}).code == kExitOk);
  CHECK(run({"perturb", kFixtures + "/C.patch", "--out", f2}).code == kExitOk);
  CHECK(slurp(f1) == slurp(f2));
  CHECK_FALSE(slurp(f1).empty());
  std::filesystem::remove(f1);
  std::filesystem::remove(f2);
}

TEST_CASE("CSV reports flatten the JSON report") {
  const Run csv = run({"analyze", kFixtures + "/B.patch", "--format", "csv"});
  REQUIRE(csv.code == kExitOk);
  CHECK(csv.out.rfind("key,value\n", 0) == 0);
  CHECK(csv.out.find("\ncommand,analyze\n") != std::string::npos);
  CHECK(csv.out.find("\ncensus.points[0].index,0\n") != std::string::npos);
}

TEST_CASE("the installed binary behaves like the library entry point") {
  const Run b = binary("analyze " + kFixtures + "/B.patch");
  CHECK(b.code == kExitOk);
  CHECK(b.out == run({"analyze", kFixtures + "/B.patch"}).out);
  CHECK(binary("verify " + kData + "/malformed.patch").code == kExitInput);
  CHECK(binary("analyze " + kFixtures + "/C.patch --strict").code == kExitFailure);
  CHECK(binary("perturb " + kFixtures + "/flat.patch").code == kExitGeometry);
  const Run env = binary("verify " + kFixtures + "/A.patch");
  setenv("MORSEFIELD_SEED", "123", 1);
  const Run seeded = binary("verify " + kFixtures + "/A.patch");
  unsetenv("MORSEFIELD_SEED");
  CHECK(Json::parse(seeded.out)["seed"] == 123);
  CHECK(Json::parse(env.out)["seed"] == 20240611);
}
