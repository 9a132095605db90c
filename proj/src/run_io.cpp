#include "embinv/run_io.hpp"

#include <cmath>

#include "embinv/ingest.hpp"

namespace embinv::run_io {

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw DataError("MalformedJson", std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

template <class T>
T get_as(const Json& j, const char* key) {
  try {
    return require(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("MalformedJson", std::string("field '") + key + "': " + e.what());
  }
}

Json position_object(const std::vector<double>& values) {
  Json out = Json::object();
  for (std::size_t i = 0; i < values.size(); ++i) {
    out["P" + std::to_string(i + 1)] = values[i];
  }
  return out;
}

std::vector<double> position_values(const Json& obj, const char* what) {
  if (!obj.is_object() || obj.size() != kWindowLength) {
    throw DataError("PositionCountMismatch",
                    std::string(what) + " must have exactly 20 entries P1..P20");
  }
  std::vector<double> out;
  for (std::size_t i = 1; i <= kWindowLength; ++i) {
    const std::string key = "P" + std::to_string(i);
    if (!obj.contains(key) || !obj.at(key).is_number()) {
      throw DataError("PositionCountMismatch", std::string(what) + " lacks numeric " + key);
    }
    out.push_back(obj.at(key).get<double>());
  }
  return out;
}

}  // namespace

Json config_to_json(const AttackConfig& cfg) {
  Json j;
  j["train_frac"] = cfg.train_frac;
  j["batch_size"] = cfg.batch_size;
  j["epochs"] = cfg.epochs;
  j["hidden_units"] = cfg.hidden_units;
  j["hidden_layers"] = cfg.hidden_layers;
  j["learning_rate"] = cfg.learning_rate;
  j["optimizer"] = {{"name", "adam"},
                    {"beta1", cfg.adam_beta1},
                    {"beta2", cfg.adam_beta2},
                    {"epsilon", cfg.adam_epsilon}};
  j["loss"] = "categorical_cross_entropy";
  j["seed"] = cfg.seed;
  j["bn_epsilon"] = cfg.bn_epsilon;
  j["bn_momentum"] = cfg.bn_momentum;
  j["posenc"] = {{"convention", posenc::convention_name(cfg.posenc.convention)},
                 {"position_base", cfg.posenc.position_base}};
  return j;
}

AttackConfig config_from_json(const Json& j) {
  AttackConfig cfg;
  cfg.train_frac = get_as<double>(j, "train_frac");
  cfg.batch_size = get_as<std::size_t>(j, "batch_size");
  cfg.epochs = get_as<std::size_t>(j, "epochs");
  cfg.hidden_units = get_as<std::size_t>(j, "hidden_units");
  cfg.hidden_layers = get_as<std::size_t>(j, "hidden_layers");
  cfg.learning_rate = get_as<double>(j, "learning_rate");
  const Json& opt = require(j, "optimizer");
  cfg.adam_beta1 = get_as<double>(opt, "beta1");
  cfg.adam_beta2 = get_as<double>(opt, "beta2");
  cfg.adam_epsilon = get_as<double>(opt, "epsilon");
  cfg.seed = get_as<std::uint64_t>(j, "seed");
  cfg.bn_epsilon = get_as<double>(j, "bn_epsilon");
  cfg.bn_momentum = get_as<double>(j, "bn_momentum");
  const Json& pe = require(j, "posenc");
  cfg.posenc.convention = posenc::parse_convention(get_as<std::string>(pe, "convention"));
  cfg.posenc.position_base = get_as<int>(pe, "position_base");
  return cfg;
}

Json run_to_json(const AttackRun& run) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "attack_run";
  j["source_tag"] = run.source_tag;
  j["config"] = config_to_json(run.config);
  j["eval_size"] = run.eval_size;
  j["per_position_accuracy"] = position_object(run.per_position_accuracy);
  Json nuc = Json::object();
  for (Nucleotide n : kAllNucleotides) {
    const auto& v = run.per_nucleotide_accuracy[class_index(n)];
    nuc[std::string(1, to_char(n))] = v ? Json(*v) : Json(nullptr);
  }
  j["per_nucleotide_accuracy"] = std::move(nuc);
  j["average_accuracy"] = run.average_accuracy;
  if (run.published_average) {
    j["published_average"] = *run.published_average;
  }
  if (!run.confusion.empty()) {
    Json conf = Json::object();
    for (std::size_t i = 0; i < run.confusion.size(); ++i) {
      conf["P" + std::to_string(i + 1)] = run.confusion[i].counts;
    }
    j["confusion"] = std::move(conf);
  }
  return j;
}

AttackRun run_from_json(const Json& j) {
  if (!j.is_object()) {
    throw DataError("MalformedJson", "run file is not a JSON object");
  }
  if (!j.contains("format_version") || !j.at("format_version").is_number_integer() ||
      j.at("format_version").get<int>() != kFormatVersion) {
    throw DataError("SchemaVersionMismatch", "expected format_version 1");
  }
  AttackRun run;
  run.source_tag = get_as<std::string>(j, "source_tag");
  run.config = config_from_json(require(j, "config"));
  run.eval_size = get_as<std::size_t>(j, "eval_size");
  run.per_position_accuracy = position_values(require(j, "per_position_accuracy"),
                                              "per_position_accuracy");
  const Json& nuc = require(j, "per_nucleotide_accuracy");
  for (Nucleotide n : kAllNucleotides) {
    const Json& v = require(nuc, std::string(1, to_char(n)).c_str());
    if (!v.is_null()) run.per_nucleotide_accuracy[class_index(n)] = v.get<double>();
  }
  run.average_accuracy = get_as<double>(j, "average_accuracy");
  if (j.contains("published_average")) {
    run.published_average = get_as<double>(j, "published_average");
  }
  if (j.contains("confusion")) {
    const Json& conf = j.at("confusion");
    if (!conf.is_object() || conf.size() != kWindowLength) {
      throw DataError("PositionCountMismatch", "confusion must have 20 entries");
    }
    for (std::size_t i = 1; i <= kWindowLength; ++i) {
      ConfusionMatrix m;
      try {
        m.counts = conf.at("P" + std::to_string(i))
                       .get<std::array<std::array<std::uint64_t, kNumNucleotides>, kNumNucleotides>>();
      } catch (const nlohmann::json::exception& e) {
        throw DataError("MalformedJson", std::string("confusion: ") + e.what());
      }
      run.confusion.push_back(m);
    }
  }
  run.validate();
  return run;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_run(const AttackRun& run, const std::filesystem::path& path) {
  ingest::write_text_file(path, dump(run_to_json(run)));
}

AttackRun read_run(const std::filesystem::path& path) {
  const std::string text = ingest::read_text_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("MalformedJson", path.string() + ": " + e.what());
  }
  return run_from_json(j);
}

Json comparison_to_json(const metrics::PrivacyComparison& cmp) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "privacy_comparison";
  j["pretrained"] = cmp.pretrained_tag;
  j["finetuned"] = cmp.finetuned_tag;
  j["per_position_delta"] = position_object(cmp.per_position_delta);
  j["average_delta"] = cmp.average_delta;
  if (cmp.published_average_delta) {
    j["published_average_delta"] = *cmp.published_average_delta;
  }
  j["random_baseline"] = metrics::random_baseline();
  return j;
}

}  // namespace embinv::run_io
