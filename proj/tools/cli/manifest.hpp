#pragma once

// Run manifests: one JSON document per command invocation recording the
// resolved configuration, the replay arguments and every output file.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace amgan::cli {

struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  // Arguments that reproduce the run, minus the output location.
  std::vector<std::string> replay_args;
  // Output role -> path relative to the manifest's directory.
  std::map<std::string, std::string> outputs;
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
// Throws amgan::InvalidInput.
Manifest read_manifest(const std::filesystem::path& path);

// <dir>/<stem>.manifest.json for an output file <dir>/<stem>.<ext>.
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

}  // namespace amgan::cli
