#include <CLI11.hpp>
#include <iostream>

#include "polymerlab/errors.hpp"
#include "polymerlab/runner.hpp"

namespace runner = polymerlab::runner;

int main(int argc, char** argv) {
  CLI::App app{"Directed polymer numerical laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int threads = 0;
  bool force = false;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("--config", config_path, "Config file (JSON) or a manifest to reproduce")->required();
  run->add_option("--set", overrides, "Override key=value (dotted keys), repeatable");
  auto* seed_opt = run->add_option("--seed", seed, "Master seed");
  auto* threads_opt = run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--force", force, "Run outside the hypothesis gates");
  run->add_option("--out", out_dir, "Output root (default: $POLYMERLAB_OUT or ./runs)");

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "Summarize a finished run");
  rep->add_option("dir", report_dir, "Run directory")->required();

  std::string list_root;
  auto* list = app.add_subcommand("list", "List runs and experiment kinds");
  list->add_option("--out", list_root, "Output root (default: $POLYMERLAB_OUT or ./runs)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      runner::RunOptions opts;
      opts.out_root = out_dir;
      opts.overrides = overrides;
      if (*seed_opt) opts.seed = seed;
      if (*threads_opt) opts.threads = threads;
      opts.force = force;
      const auto rec = runner::run(runner::load_config(config_path), opts);
      std::cout << rec.dir.string() << '\n';
      for (const auto& v : rec.output.verdicts) std::cout << (v.pass ? "PASS  " : "FAIL  ") << v.name << '\n';
    } else if (*rep) {
      runner::report(report_dir, std::cout);
    } else {
      std::cout << "experiment kinds:";
      for (const auto& k : runner::experiment_kinds()) std::cout << ' ' << k;
      std::cout << "\n\n";
      runner::list_runs(list_root.empty() ? runner::default_out_root() : std::filesystem::path(list_root), std::cout);
    }
    return 0;
  } catch (const polymerlab::RegionRefusal& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return 3;
  } catch (const polymerlab::ResourceRefusal& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return 4;
  } catch (const polymerlab::CorruptRunError& e) {
    std::cerr << "corrupt run: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
