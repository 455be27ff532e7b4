#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>

namespace stancebench {

// Runs one subcommand. Returns 0 on success, 1 for a failed precondition
// ("error: <Kind>: message" on `err`), 2 for usage errors.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Written next to every artifact a command produces. Timestamps live here
// and nowhere else.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string corpus_hash;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::string tool_version;
  std::map<std::string, std::string> extra;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
std::string utc_timestamp();

}  // namespace stancebench
