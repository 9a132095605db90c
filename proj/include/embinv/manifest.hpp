#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace embinv::manifest {

struct Step {
  std::string command;            // any subcommand except "run"
  std::vector<std::string> args;  // flags exactly as on the command line
  /// Files to hash after the step. Inferred from --out* flags when empty.
  std::vector<std::string> outputs;
};

struct Manifest {
  int format_version = 1;
  std::string toolkit_version;
  std::vector<Step> steps;
};

/// Throws DataError: MalformedJson, SchemaVersionMismatch, InvalidManifest.
Manifest parse_manifest(std::string_view json_text);
Manifest read_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const Manifest& m);

/// Explicit outputs, or the values of --out/--out-* flags; --out-prefix
/// expands to the .json, .md and .svg files written by compare.
std::vector<std::string> step_outputs(const Step& step);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string file_sha256(const std::filesystem::path& path);

struct OutputHash {
  std::string path;
  std::string sha256;
};

struct StepRecord {
  std::size_t index = 0;  // 1-based
  std::string command;
  std::vector<OutputHash> outputs;
};

struct CompletionRecord {
  bool ok = false;
  std::string manifest_sha256;
  std::vector<StepRecord> steps;
  std::optional<std::size_t> failed_step;
  std::string error;
};

struct RunOptions {
  /// Replaces any --parallel value of attack steps.
  std::optional<std::size_t> parallel;
  /// Defaults to <manifest>.record.json.
  std::optional<std::filesystem::path> record_path;
};

/// Receives the full argv of one step ({command, args...}) and throws
/// embinv::Error on failure.
using StepRunner = std::function<void(const std::vector<std::string>& argv)>;

/// Runs steps in order and writes the completion record, which is the only
/// output carrying a timestamp. On failure the record is still written and the
/// step's error is rethrown with the same class, prefixed "step N (<command>): ".
CompletionRecord run_manifest(const std::filesystem::path& path, const StepRunner& runner,
                              const RunOptions& options = {});

}  // namespace embinv::manifest
