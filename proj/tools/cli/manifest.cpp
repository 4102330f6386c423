#include "manifest.hpp"

#include <fstream>

#include <amgan/error.hpp>
#include <amgan/rng.hpp>
#include <amgan/version.hpp>

namespace amgan::cli {

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["tool_version"] = std::string(version());
  j["rng_algorithm"] = std::string(kRngAlgorithm);
  j["seed"] = m.seed;
  j["config"] = m.config;
  j["replay_args"] = m.replay_args;
  j["outputs"] = m.outputs;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot open manifest " + path.string());
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  Manifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config");
    m.replay_args = j.at("replay_args").get<std::vector<std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path.string() + ": malformed manifest: " + e.what());
  }
  return m;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  auto p = output;
  p.replace_extension();
  p += ".manifest.json";
  return p;
}

}  // namespace amgan::cli
