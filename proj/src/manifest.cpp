#include "embinv/manifest.hpp"

#include <chrono>
#include <ctime>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "embinv/core.hpp"
#include "embinv/ingest.hpp"
#include "embinv/run_io.hpp"

namespace embinv::manifest {

namespace {

using run_io::Json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> string_array(const Json& j, const char* what, std::size_t step) {
  if (!j.is_array()) {
    throw DataError("InvalidManifest", "step " + std::to_string(step) + ": " + what +
                                           " must be an array of strings");
  }
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) {
      throw DataError("InvalidManifest", "step " + std::to_string(step) + ": " + what +
                                             " must be an array of strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<std::string> with_parallel(std::vector<std::string> args, std::size_t parallel) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--parallel") {
      ++i;
      continue;
    }
    if (args[i].rfind("--parallel=", 0) == 0) continue;
    out.push_back(std::move(args[i]));
  }
  out.push_back("--parallel");
  out.push_back(std::to_string(parallel));
  return out;
}

Json record_to_json(const CompletionRecord& rec, const std::filesystem::path& manifest_path) {
  Json j;
  j["format_version"] = run_io::kFormatVersion;
  j["toolkit_version"] = EMBINV_VERSION;
  j["manifest"] = manifest_path.string();
  j["manifest_sha256"] = rec.manifest_sha256;
  j["completed_at"] = utc_timestamp();
  j["status"] = rec.ok ? "ok" : "failed";
  Json steps = Json::array();
  for (const auto& s : rec.steps) {
    Json outputs = Json::array();
    for (const auto& o : s.outputs) outputs.push_back({{"path", o.path}, {"sha256", o.sha256}});
    steps.push_back({{"index", s.index}, {"command", s.command}, {"outputs", std::move(outputs)}});
  }
  j["steps"] = std::move(steps);
  if (rec.failed_step) {
    j["failed_step"] = *rec.failed_step;
    j["error"] = rec.error;
  }
  return j;
}

}  // namespace

Manifest parse_manifest(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("MalformedJson", std::string("manifest: ") + e.what());
  }
  if (!j.is_object()) throw DataError("InvalidManifest", "manifest must be a JSON object");
  if (!j.contains("format_version") || !j.at("format_version").is_number_integer() ||
      j.at("format_version").get<int>() != run_io::kFormatVersion) {
    throw DataError("SchemaVersionMismatch", "manifest format_version must be 1");
  }
  Manifest m;
  if (j.contains("toolkit_version")) {
    if (!j.at("toolkit_version").is_string()) {
      throw DataError("InvalidManifest", "toolkit_version must be a string");
    }
    m.toolkit_version = j.at("toolkit_version").get<std::string>();
  }
  if (!j.contains("steps") || !j.at("steps").is_array() || j.at("steps").empty()) {
    throw DataError("InvalidManifest", "manifest needs a non-empty steps array");
  }
  std::size_t index = 0;
  for (const auto& s : j.at("steps")) {
    ++index;
    if (!s.is_object() || !s.contains("command") || !s.at("command").is_string()) {
      throw DataError("InvalidManifest", "step " + std::to_string(index) + " lacks a command");
    }
    Step step;
    step.command = s.at("command").get<std::string>();
    if (step.command == "run") {
      throw DataError("InvalidManifest", "step " + std::to_string(index) + ": nested run");
    }
    if (s.contains("args")) step.args = string_array(s.at("args"), "args", index);
    if (s.contains("outputs")) step.outputs = string_array(s.at("outputs"), "outputs", index);
    m.steps.push_back(std::move(step));
  }
  if (!m.toolkit_version.empty() && m.toolkit_version != EMBINV_VERSION) {
    spdlog::warn("manifest was written for toolkit {} (this is {})", m.toolkit_version,
                 EMBINV_VERSION);
  }
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(ingest::read_text_file(path));
}

std::string manifest_to_json(const Manifest& m) {
  Json j;
  j["format_version"] = m.format_version;
  j["toolkit_version"] = m.toolkit_version.empty() ? std::string(EMBINV_VERSION) : m.toolkit_version;
  Json steps = Json::array();
  for (const auto& s : m.steps) {
    Json step{{"command", s.command}, {"args", s.args}};
    if (!s.outputs.empty()) step["outputs"] = s.outputs;
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  return run_io::dump(j);
}

std::vector<std::string> step_outputs(const Step& step) {
  if (!step.outputs.empty()) return step.outputs;
  std::vector<std::string> out;
  for (std::size_t i = 0; i + 1 < step.args.size(); ++i) {
    const std::string& flag = step.args[i];
    if (flag.rfind("--out", 0) != 0) continue;
    const std::string& value = step.args[i + 1];
    if (flag == "--out-prefix") {
      for (const char* ext : {".json", ".md", ".svg"}) out.push_back(value + ext);
    } else if (flag == "--out" || flag.rfind("--out-", 0) == 0) {
      out.push_back(value);
    }
  }
  // split names its outputs --train-out / --test-out.
  for (std::size_t i = 0; i + 1 < step.args.size(); ++i) {
    if (step.args[i] == "--train-out" || step.args[i] == "--test-out") out.push_back(step.args[i + 1]);
  }
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("HashFailed", "SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) {
  return sha256_hex(ingest::read_binary_file(path));
}

CompletionRecord run_manifest(const std::filesystem::path& path, const StepRunner& runner,
                              const RunOptions& options) {
  const auto bytes = ingest::read_binary_file(path);
  const Manifest m = parse_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                                     bytes.size()));
  const auto record_path = options.record_path.value_or(
      std::filesystem::path(path.string() + ".record.json"));

  CompletionRecord rec;
  rec.manifest_sha256 = sha256_hex(bytes);
  for (std::size_t i = 0; i < m.steps.size(); ++i) {
    Step step = m.steps[i];
    if (options.parallel && step.command == "attack") {
      step.args = with_parallel(std::move(step.args), *options.parallel);
    }
    std::vector<std::string> argv{step.command};
    argv.insert(argv.end(), step.args.begin(), step.args.end());
    spdlog::info("step {}/{}: {}", i + 1, m.steps.size(), step.command);
    try {
      runner(argv);
      StepRecord sr{i + 1, step.command, {}};
      for (const auto& out : step_outputs(step)) sr.outputs.push_back({out, file_sha256(out)});
      rec.steps.push_back(std::move(sr));
    } catch (const Error& e) {
      rec.failed_step = i + 1;
      rec.error = e.what();
      ingest::write_text_file(record_path, run_io::dump(record_to_json(rec, path)));
      throw Error(e.error_class(), e.kind(),
                  "step " + std::to_string(i + 1) + " (" + step.command + "): " + e.message());
    }
  }
  rec.ok = true;
  ingest::write_text_file(record_path, run_io::dump(record_to_json(rec, path)));
  return rec;
}

}  // namespace embinv::manifest
