#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "test_util.hpp"

using coloc::testing::TempDir;

namespace {

struct Run {
  int status = -1;
  std::string output;
};

// Runs the CLI with stdout and stderr captured to a file.
Run run_cli(const std::string& args, const std::filesystem::path& scratch) {
  const auto log = scratch / "cli.log";
  const std::string cmd = std::string("\"") + COLOC_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream s;
  s << in.rdbuf();
  r.output = s.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("synth then all") {
  TempDir dir;
  const auto data = dir.path() / "data";
  REQUIRE(run_cli("synth --out " + q(data) + " --class bird --images 6 --seed 3", dir.path()).status == 0);
  CHECK(std::filesystem::exists(data / "manifest.json"));

  const auto out = dir.path() / "out";
  const auto r = run_cli("all --manifest " + q(data / "manifest.json") + " --out " + q(out) + " --workers 2", dir.path());
  CHECK(r.status == 0);
  CHECK(r.output.find("bird: CorLoc 100.00% (6/6)") != std::string::npos);

  const auto ccf = nlohmann::json::parse(slurp(out / "ccf.json"));
  CHECK(ccf["class_name"] == "bird");
  CHECK(ccf["k_clusters"] == 5);
  CHECK(ccf["rank"] == 1);
  const auto results = nlohmann::json::parse(slurp(out / "results.json"));
  CHECK(results.size() == 6);
  CHECK(results[0]["pred_box"].size() == 4);
  CHECK(slurp(out / "report.csv") == "class,n,corloc\nbird,6,100.00\n");
}

TEST_CASE("subcommands run separately and tiny mu matches no propagation") {
  TempDir dir;
  const auto data = dir.path() / "data";
  REQUIRE(run_cli("synth --out " + q(data) + " --images 5 --seed 9", dir.path()).status == 0);
  const auto manifest = q(data / "manifest.json");
  const auto shared = dir.path() / "shared";
  REQUIRE(run_cli("select-ccf --manifest " + manifest + " --out " + q(shared), dir.path()).status == 0);

  const auto ccf = q(shared / "ccf.json");
  const auto tiny = dir.path() / "tiny", off = dir.path() / "off";
  CHECK(run_cli("localize --manifest " + manifest + " --ccf " + ccf + " --out " + q(tiny) + " --mu 1e-6", dir.path())
            .status == 0);
  CHECK(run_cli("localize --manifest " + manifest + " --ccf " + ccf + " --out " + q(off) + " --no-propagation",
                dir.path())
            .status == 0);
  CHECK(slurp(tiny / "results.json") == slurp(off / "results.json"));

  CHECK(run_cli("eval --manifest " + manifest + " --out " + q(off), dir.path()).status == 0);
  CHECK(std::filesystem::exists(off / "report.json"));
}

TEST_CASE("errors exit nonzero with the error name") {
  TempDir dir;
  const auto missing = run_cli("all --manifest " + q(dir.path() / "nope.json") + " --out " + q(dir.path()), dir.path());
  CHECK(missing.status != 0);
  CHECK(missing.output.find("MissingFile") != std::string::npos);

  const auto bad_flag = run_cli("localize --manifest x.json --mu", dir.path());
  CHECK(bad_flag.status != 0);

  REQUIRE(run_cli("synth --out " + q(dir.path() / "d") + " --images 2", dir.path()).status == 0);
  const auto bad_mu = run_cli(
      "all --manifest " + q(dir.path() / "d" / "manifest.json") + " --out " + q(dir.path() / "o") + " --mu -1",
      dir.path());
  CHECK(bad_mu.status != 0);
  CHECK(bad_mu.output.find("NonPositiveMu") != std::string::npos);
}
