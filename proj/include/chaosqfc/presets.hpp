#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chaosqfc/config.hpp"

namespace chaosqfc {

struct OutputFile {
  std::string name;  // relative to the run directory
  std::string sha256;
};

struct RunManifest {
  std::string preset;
  std::map<std::string, std::string> parameters;  // every schema key, resolved
  std::uint64_t seed = 0;
  std::string code_version;
  double wall_clock_s = 0.0;
  std::vector<OutputFile> outputs;
  std::map<std::string, double> metrics;  // headline numbers, also in summary.txt
};

const std::vector<std::string>& preset_names();
// Schema key that --trials sets for the preset, empty if it has none.
std::string trials_key(const std::string& preset);

// Runs the preset on cfg and writes CSV, summary.txt and manifest.json into
// out_dir. Throws ConfigError for an unknown preset or invalid config.
RunManifest run_preset(const std::string& name, const RunConfig& cfg, const std::filesystem::path& out_dir);
// Defaults plus overrides.
RunManifest run_preset(const std::string& name, const std::map<std::string, std::string>& overrides,
                       const std::filesystem::path& out_dir);

std::string manifest_to_json(const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const RunManifest& m, const std::filesystem::path& path);

struct RerunReport {
  RunManifest original;
  RunManifest rerun;
  std::vector<std::string> mismatches;  // output names whose digest changed or is missing
  bool identical() const { return mismatches.empty(); }
};

// Rebuilds the config from the manifest parameters and runs the preset again
// into out_dir.
RerunReport rerun_manifest(const std::filesystem::path& manifest, const std::filesystem::path& out_dir);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace chaosqfc
