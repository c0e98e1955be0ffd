#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ppqkd/errors.hpp"

namespace ppqkd {

/// Reproducibility record written next to every file artifact: the command,
/// its fully resolved parameters, the seed, the tool version, and a
/// checksum per output file. Re-running the command with the recorded
/// parameters reproduces the artifacts bit-exactly.
struct RunManifest {
  std::string command;
  nlohmann::json parameters;
  std::uint64_t rng_seed = 0;
  std::string version;
  std::map<std::string, std::string> output_checksums;
};

nlohmann::json to_json(const RunManifest& m);

std::uint64_t fnv1a64(std::string_view bytes);

/// "fnv1a64:<16 hex digits>" over the file contents.
std::string file_checksum(const std::filesystem::path& path);

/// Writes via a temp file in the same directory plus rename, so readers
/// never observe a partial artifact. Throws IoError on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace ppqkd
