#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace polymerlab::runner {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

const std::vector<std::string>& experiment_kinds();

// Reads a config file. A manifest is accepted too; its resolved config is returned.
json load_config(const std::filesystem::path& path);

// "a.b.c=value"; value is parsed as JSON when possible, otherwise taken as a string.
void apply_override(json& cfg, const std::string& assignment);

// Checks the schema and fills engineering defaults. Throws ValidationError.
json resolve_config(json cfg);

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentOutput {
  std::map<std::string, std::string> files;  // name -> contents
  json summary;
  std::vector<Verdict> verdicts;
};

// Runs a resolved config in memory. Throws RegionRefusal / ResourceRefusal.
ExperimentOutput execute(const json& resolved);

// Predicted peak memory of a resolved config.
std::uint64_t estimate_memory_bytes(const json& resolved);

// Number of tasks whose derived seed is shared with another task.
std::size_t seed_collisions(std::uint64_t master_seed, std::size_t n_tasks);
std::size_t task_count(const json& resolved);

std::string sha256_hex(const std::string& data);

struct RunOptions {
  std::filesystem::path out_root;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool force = false;
};

struct RunRecord {
  std::string run_id;
  std::filesystem::path dir;
  json manifest;
  ExperimentOutput output;
};

// POLYMERLAB_OUT when set, otherwise ./runs.
std::filesystem::path default_out_root();

RunRecord run(json cfg, const RunOptions& opts);

// Prints tables and verdicts of a finished run; throws CorruptRunError.
void report(const std::filesystem::path& dir, std::ostream& os);

void list_runs(const std::filesystem::path& root, std::ostream& os);

}  // namespace polymerlab::runner
