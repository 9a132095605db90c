#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "embinv/metrics.hpp"
#include "embinv/run.hpp"

namespace embinv::run_io {

inline constexpr int kFormatVersion = 1;

using Json = nlohmann::ordered_json;

Json config_to_json(const AttackConfig& cfg);
AttackConfig config_from_json(const Json& j);

/// Run JSON: format_version, source_tag, config echo, eval_size,
/// per_position_accuracy {"P1".."P20"}, per_nucleotide_accuracy {"A".."T",
/// null when undefined}, average_accuracy, optional published_average and
/// confusion {"P1": 4x4 [true][predicted]}. No timestamps.
Json run_to_json(const AttackRun& run);

/// Throws DataError: SchemaVersionMismatch, PositionCountMismatch,
/// MalformedJson.
AttackRun run_from_json(const Json& j);

std::string dump(const Json& j);

void write_run(const AttackRun& run, const std::filesystem::path& path);
AttackRun read_run(const std::filesystem::path& path);

Json comparison_to_json(const metrics::PrivacyComparison& cmp);

}  // namespace embinv::run_io
