#include "polymerlab/runner.hpp"

#include <omp.h>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "polymerlab/errors.hpp"
#include "polymerlab/rng.hpp"

namespace polymerlab::runner {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary);
  out << data;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

std::string utc_stamp(std::chrono::system_clock::time_point t, const char* fmt) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, fmt);
  return os.str();
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

json load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
  } catch (const std::runtime_error& e) {
    throw ValidationError(e.what());
  }
  if (j.is_object() && j.contains("run_id") && j.contains("config")) return j["config"];
  return j;
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ValidationError("empty key segment in " + key);
    if (!node->is_object()) throw ValidationError("cannot descend into non-object at " + part);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

std::size_t seed_collisions(std::uint64_t master_seed, std::size_t n_tasks) {
  std::vector<std::uint64_t> seeds(n_tasks);
  for (std::size_t i = 0; i < n_tasks; ++i) seeds[i] = rng::derive_seed(master_seed, i);
  std::sort(seeds.begin(), seeds.end());
  std::size_t dup = 0;
  for (std::size_t i = 1; i < seeds.size(); ++i) dup += seeds[i] == seeds[i - 1];
  return dup;
}

fs::path default_out_root() {
  if (const char* env = std::getenv("POLYMERLAB_OUT"); env && *env) return env;
  return "runs";
}

RunRecord run(json cfg, const RunOptions& opts) {
  for (const auto& o : opts.overrides) apply_override(cfg, o);
  if (opts.seed) cfg["master_seed"] = *opts.seed;
  if (opts.threads) cfg["threads"] = *opts.threads;
  if (opts.force) cfg["force"] = true;
  const json resolved = resolve_config(std::move(cfg));

  const std::size_t tasks = task_count(resolved);
  const std::size_t collisions = seed_collisions(resolved["master_seed"], tasks);
  if (collisions) throw std::runtime_error("derived seeds collide (" + std::to_string(collisions) + ")");

  const int threads = resolved["threads"];
  if (threads > 0) omp_set_num_threads(threads);

  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentOutput out = execute(resolved);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path root = opts.out_root.empty() ? default_out_root() : opts.out_root;
  fs::create_directories(root);
  const std::string base =
      utc_stamp(started, "%Y%m%dT%H%M%SZ") + "-" + sha256_hex(resolved.dump()).substr(0, 10);
  std::string run_id = base;
  for (int k = 1; fs::exists(root / run_id); ++k) run_id = base + "-" + std::to_string(k);
  const fs::path dir = root / run_id;
  fs::create_directory(dir);

  json checksums = json::object();
  for (const auto& [name, data] : out.files) {
    write_file(dir / name, data);
    checksums[name] = sha256_hex(data);
  }
  json manifest = {{"run_id", run_id},
                   {"tool_version", kToolVersion},
                   {"created_utc", utc_stamp(started, "%Y-%m-%dT%H:%M:%SZ")},
                   {"experiment", resolved["experiment"]},
                   {"master_seed", resolved["master_seed"]},
                   {"config", resolved},
                   {"threads_used", omp_get_max_threads()},
                   {"seed_check", {{"tasks", tasks}, {"collisions", collisions}}},
                   {"estimated_memory_bytes", estimate_memory_bytes(resolved)},
                   {"runtime_seconds", seconds},
                   {"outputs", checksums}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  json entry = {{"run_id", run_id}, {"experiment", resolved["experiment"]}, {"created_utc", manifest["created_utc"]},
                {"dir", fs::absolute(dir).string()}};
  bool all_pass = true;
  for (const auto& v : out.verdicts) all_pass = all_pass && v.pass;
  entry["all_pass"] = all_pass;
  std::ofstream index(root / "index.jsonl", std::ios::app);
  index << entry.dump() << '\n';
  return {run_id, dir, manifest, std::move(out)};
}

namespace {

void print_table(const fs::path& csv, std::ostream& os) {
  std::istringstream in(read_file(csv));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      // Trim long decimals for display.
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (!rows.empty() && end && *end == '\0' && cell.find('.') != std::string::npos) {
        std::ostringstream s;
        s << std::setprecision(6) << v;
        cell = s.str();
      }
      cells.push_back(cell);
    }
    rows.push_back(cells);
  }
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (width.size() <= i) width.push_back(0);
      width[i] = std::max(width[i], r[i].size());
    }
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << std::setw(static_cast<int>(width[i]) + 2) << r[i];
    os << '\n';
  }
}

}  // namespace

void report(const fs::path& dir, std::ostream& os) {
  if (!fs::is_directory(dir)) throw CorruptRunError("no run directory at " + dir.string());
  if (!fs::exists(dir / "manifest.json")) throw CorruptRunError("run directory has no manifest: " + dir.string());
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::parse_error& e) {
    throw CorruptRunError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!manifest.contains("outputs") || !manifest["outputs"].is_object())
    throw CorruptRunError("manifest lists no outputs");
  for (const auto& [name, sum] : manifest["outputs"].items()) {
    if (!fs::exists(dir / name)) throw CorruptRunError("missing output " + name);
    if (sha256_hex(read_file(dir / name)) != sum.get<std::string>()) throw CorruptRunError("checksum mismatch for " + name);
  }
  os << "run " << manifest["run_id"].get<std::string>() << "  experiment " << manifest["experiment"].get<std::string>()
     << "  seed " << manifest["master_seed"] << "  version " << manifest["tool_version"].get<std::string>() << "\n\n";
  for (const auto& [name, _] : manifest["outputs"].items()) {
    if (fs::path(name).extension() != ".csv") continue;
    std::istringstream probe(read_file(dir / name));
    std::string line;
    std::size_t lines = 0;
    while (std::getline(probe, line)) ++lines;
    os << name << (lines > 31 ? " (" + std::to_string(lines - 1) + " rows, not shown)" : "") << '\n';
    if (lines <= 31) print_table(dir / name, os);
    os << '\n';
  }
  const json summary = json::parse(read_file(dir / "summary.json"));
  for (const auto& v : summary["verdicts"])
    os << (v["pass"].get<bool>() ? "PASS  " : "FAIL  ") << v["name"].get<std::string>()
       << (v["detail"].get<std::string>().empty() ? "" : "  [" + v["detail"].get<std::string>() + "]") << '\n';
}

void list_runs(const fs::path& root, std::ostream& os) {
  const fs::path index = root / "index.jsonl";
  if (!fs::exists(index)) {
    os << "no runs under " << root.string() << '\n';
    return;
  }
  std::istringstream in(read_file(index));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json e = json::parse(line);
    os << e["run_id"].get<std::string>() << "  " << std::left << std::setw(16) << e["experiment"].get<std::string>()
       << std::right << (e.value("all_pass", false) ? "  pass" : "  FAIL") << "  " << e["dir"].get<std::string>()
       << '\n';
  }
}

}  // namespace polymerlab::runner
