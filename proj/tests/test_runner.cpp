#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "polymerlab/errors.hpp"
#include "polymerlab/runner.hpp"

using namespace polymerlab;
using runner::json;
namespace fs = std::filesystem;

namespace {

json moment_config() {
  return json::parse(R"({
    "experiment": "moment-check",
    "master_seed": 5,
    "params": {
      "disorder": {"law": "bernoulli", "p": 0.5, "a": 1.0, "b": -1.0, "beta": 0.5},
      "d": 3, "n": 4, "n_seeds": 64
    }
  })");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("polymerlab_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("sha256 of a known vector") {
  CHECK(runner::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config round trip and engineering defaults") {
  const json r = runner::resolve_config(moment_config());
  CHECK(r["threads"] == 0);
  CHECK(r["force"] == false);
  CHECK(r["acceptance"]["z_max"] == 3.0);
  const json again = runner::resolve_config(json::parse(r.dump()));
  CHECK(again == r);
}

TEST_CASE("overrides use dotted keys and JSON values") {
  json c = moment_config();
  runner::apply_override(c, "params.n=6");
  runner::apply_override(c, "params.disorder.law=gaussian");
  runner::apply_override(c, "acceptance.z_max=2.5");
  CHECK(c["params"]["n"] == 6);
  CHECK(c["params"]["disorder"]["law"] == "gaussian");
  CHECK(c["acceptance"]["z_max"] == 2.5);
  CHECK_THROWS_AS(runner::apply_override(c, "novalue"), ValidationError);
  CHECK_THROWS_AS(runner::apply_override(c, "params.n.x=1"), ValidationError);
}

TEST_CASE("schema violations are rejected") {
  json c = moment_config();
  c["params"].erase("n");
  CHECK_THROWS_AS(runner::resolve_config(c), ValidationError);
  c = moment_config();
  c["params"]["disorder"].erase("beta");
  CHECK_THROWS_AS(runner::resolve_config(c), ValidationError);
  c = moment_config();
  c["params"]["extra"] = 1;
  CHECK_THROWS_AS(runner::resolve_config(c), ValidationError);
  c = moment_config();
  c["experiment"] = "nope";
  CHECK_THROWS_AS(runner::resolve_config(c), ValidationError);
  c = moment_config();
  c.erase("master_seed");
  CHECK_THROWS_AS(runner::resolve_config(c), ValidationError);
  c = moment_config();
  c["params"]["disorder"]["p"] = 1.0;
  CHECK_THROWS_AS(runner::resolve_config(c), ValidationError);
  CHECK(runner::experiment_kinds().size() == 9);
}

TEST_CASE("derived seeds do not collide") {
  CHECK(runner::seed_collisions(0, 100000) == 0);
  CHECK(runner::seed_collisions(~0ULL, 1000) == 0);
}

TEST_CASE("runs are reproducible from their manifest") {
  const fs::path root = scratch("repro");
  runner::RunOptions opts;
  opts.out_root = root;
  const auto a = runner::run(moment_config(), opts);
  const auto b = runner::run(runner::load_config(a.dir / "manifest.json"), opts);
  CHECK(a.dir != b.dir);
  CHECK(a.manifest["outputs"] == b.manifest["outputs"]);
  CHECK(a.manifest["outputs"].contains("moment.csv"));
  std::ostringstream os;
  runner::report(a.dir, os);
  CHECK(os.str().find("PASS") != std::string::npos);
  std::ostringstream ls;
  runner::list_runs(root, ls);
  CHECK(ls.str().find(b.run_id) != std::string::npos);
  // Tampering is detected.
  std::ofstream(a.dir / "moment.csv", std::ios::app) << "x\n";
  CHECK_THROWS_AS(runner::report(a.dir, os), CorruptRunError);
  fs::create_directories(root / "empty");
  CHECK_THROWS_AS(runner::report(root / "empty", os), CorruptRunError);
  fs::remove_all(root);
}

TEST_CASE("gates and resource caps") {
  json c = json::parse(R"({
    "experiment": "llt-scan", "master_seed": 1,
    "params": {"disorder": {"law": "gaussian", "mean": 0.0, "variance": 1.0, "beta": 1.5},
               "d": 3, "times": [8], "a": 0.4, "A": 1.0, "n_seeds": 2}
  })");
  CHECK_THROWS_AS(runner::execute(runner::resolve_config(c)), RegionRefusal);
  c["params"]["disorder"]["beta"] = 0.2;
  c["memory_cap_mb"] = 0.5;
  CHECK_THROWS_AS(runner::execute(runner::resolve_config(c)), ResourceRefusal);
  c["memory_cap_mb"] = 4096;
  c["params"]["disorder"]["beta"] = 0.0;
  const auto out = runner::execute(runner::resolve_config(c));
  CHECK(out.files.count("residuals.csv") == 1);
}
