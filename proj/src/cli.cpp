#include "embinv/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "embinv/attack.hpp"
#include "embinv/core.hpp"
#include "embinv/ingest.hpp"
#include "embinv/manifest.hpp"
#include "embinv/posenc.hpp"
#include "embinv/report.hpp"
#include "embinv/run_io.hpp"
#include "embinv/synthembed.hpp"
#include "embinv/tokenize.hpp"

namespace embinv::cli {

namespace {

struct IngestArgs {
  std::vector<std::string> raw;
  std::vector<std::string> labels;
  std::size_t window_start = 60;
  std::size_t window_len = kWindowLength;
  std::string out;
};

struct SplitArgs {
  std::string in, train_out, test_out;
  std::size_t test_pos = 1000, test_neg = 1000;
  std::optional<std::size_t> train_pos, train_neg;
  std::uint64_t seed = 0;
};

struct TokenizeArgs {
  std::string family, in, out, vocab, merges, scores;
  bool customized = false;
  std::size_t max_length = 60;
};

struct SynthArgs {
  std::string mode, in, out;
  std::size_t dim = 768;
  double noise = 0.01;
  std::uint64_t seed = 0;
  std::vector<int> leak{1, 20};
};

struct PosencArgs {
  std::size_t dim = 768;
  std::string convention = "shifted";
  int position_base = 1;
  std::string out;
};

struct AttackArgs {
  std::string embeddings, sequences, eval_embeddings, eval_sequences, out;
  AttackConfig cfg;
  std::string convention = "shifted";
  std::size_t parallel = 1;
};

struct ReportArgs {
  std::vector<std::string> runs, refs;
  std::string out_md, out_csv;
};

struct CompareArgs {
  std::string pretrained, finetuned, out_prefix;
};

struct RunArgs {
  std::string manifest, record;
  std::optional<std::size_t> parallel;
};

SpliceLabel parse_label(const std::string& s) {
  if (s == "pos" || s == "positive" || s == "1") return SpliceLabel::positive;
  if (s == "neg" || s == "negative" || s == "0") return SpliceLabel::negative;
  throw UsageError("InvalidLabel", "label must be pos or neg, got '" + s + "'");
}

void do_ingest(const IngestArgs& a) {
  if (a.raw.size() != a.labels.size()) {
    throw UsageError("LabelCountMismatch", "give one --labels value per --raw file");
  }
  ingest::WindowExtractionConfig cfg{a.window_start, a.window_len};
  cfg.validate();
  std::vector<ingest::RawLine> lines;
  for (std::size_t i = 0; i < a.raw.size(); ++i) {
    auto more = ingest::read_raw_sequences(a.raw[i], parse_label(a.labels[i]));
    lines.insert(lines.end(), more.begin(), more.end());
  }
  const auto result = ingest::extract_windows(lines, cfg);
  for (const auto& r : result.rejections) {
    spdlog::warn("raw line {} rejected ({}): {}", r.line_index, r.kind, r.detail);
  }
  ingest::write_sequences(result.windows, a.out);
  spdlog::info("ingest: {} windows, {} rejected", result.windows.size(), result.rejections.size());
}

void do_split(const SplitArgs& a) {
  ingest::SplitSpec spec{a.test_pos, a.test_neg, a.train_pos, a.train_neg, a.seed};
  const auto split = ingest::make_split(ingest::read_sequences(a.in), spec);
  ingest::write_sequences(split.train, a.train_out);
  ingest::write_sequences(split.test, a.test_out);
  spdlog::info("split: {} train, {} test", split.train.size(), split.test.size());
}

void do_tokenize(const TokenizeArgs& a) {
  tokenize::TokenizerSpec spec = tokenize::default_spec(tokenize::parse_family(a.family));
  spec.max_length = a.max_length;
  if (!a.vocab.empty()) {
    for (const auto& t : tokenize::parse_vocab_table(ingest::read_text_file(a.vocab))) spec.vocab.add(t);
  }
  if (!a.merges.empty()) spec.merges = tokenize::parse_merge_table(ingest::read_text_file(a.merges));
  if (!a.scores.empty()) {
    spec.piece_scores = tokenize::parse_score_table(ingest::read_text_file(a.scores));
  }
  if (a.customized) spec = tokenize::extend_vocabulary(std::move(spec));
  spec.validate();

  std::string out;
  for (const auto& w : ingest::read_sequences(a.in)) {
    const auto ts = tokenize::tokenize(spec, render_sequence(w.sequence));
    run_io::Json line{{"tokens", ts.tokens}, {"ids", ts.ids}, {"mask", ts.attention_mask}};
    out += line.dump();
    out += '\n';
  }
  ingest::write_text_file(a.out, out);
}

void do_synth(const SynthArgs& a) {
  synth::EmbedderSpec spec;
  spec.mode = synth::parse_mode(a.mode);
  spec.dim = a.dim;
  spec.noise_sigma = a.noise;
  spec.seed = a.seed;
  spec.leak_positions = std::set<int>(a.leak.begin(), a.leak.end());
  spec.validate();
  ingest::write_embeddings(synth::embed(spec, ingest::read_sequences(a.in)), a.out);
}

void do_posenc(const PosencArgs& a, std::ostream& out) {
  posenc::Options opts{posenc::parse_convention(a.convention), a.position_base};
  const std::string csv = posenc::positional_table_csv(a.dim, opts);
  if (a.out.empty()) {
    out << csv;
  } else {
    ingest::write_text_file(a.out, csv);
  }
}

void do_attack(AttackArgs a) {
  a.cfg.posenc.convention = posenc::parse_convention(a.convention);
  a.cfg.validate();
  if (a.eval_embeddings.empty() != a.eval_sequences.empty()) {
    throw UsageError("IncompleteEvalSet", "--eval-embeddings and --eval-sequences go together");
  }
  const Dataset data(ingest::read_sequences(a.sequences), ingest::read_embeddings(a.embeddings));
  std::optional<Dataset> held_out;
  if (!a.eval_embeddings.empty()) {
    held_out.emplace(ingest::read_sequences(a.eval_sequences),
                     ingest::read_embeddings(a.eval_embeddings));
  }
  const AttackRun run =
      attack::run_attack(data, a.cfg, a.parallel, held_out ? &*held_out : nullptr);
  run_io::write_run(run, a.out);
  spdlog::info("attack: average accuracy {:.3f} over {} eval rows", run.average_accuracy,
               run.eval_size);
}

void do_report(const ReportArgs& a, std::ostream& out) {
  if (a.runs.empty() && a.refs.empty()) {
    throw UsageError("NothingToReport", "give at least one --run or --refs");
  }
  std::vector<AttackRun> runs;
  for (const auto& r : a.runs) runs.push_back(report::load_run_source(r));
  const auto rows = report::table_rows(runs, a.refs);
  const std::string md = report::render_markdown(rows, runs);
  if (!a.out_md.empty()) ingest::write_text_file(a.out_md, md);
  if (!a.out_csv.empty()) ingest::write_text_file(a.out_csv, report::render_csv(rows));
  if (a.out_md.empty() && a.out_csv.empty()) out << md;
}

void do_compare(const CompareArgs& a, std::ostream& out) {
  const auto cmp = report::compare_command(a.pretrained, a.finetuned, a.out_prefix);
  out << "mean per-position delta " << report::format_delta(cmp.average_delta);
  if (cmp.published_average_delta) {
    out << ", published average delta " << report::format_delta(*cmp.published_average_delta);
  }
  out << '\n';
}

void do_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  manifest::RunOptions opts;
  opts.parallel = a.parallel;
  if (!a.record.empty()) opts.record_path = a.record;
  const auto rec = manifest::run_manifest(
      a.manifest, [&](const std::vector<std::string>& argv) { execute(argv, out, err); }, opts);
  spdlog::info("manifest completed: {} steps", rec.steps.size());
}

}  // namespace

void configure_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("embinv");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
  });
  const char* env = std::getenv("EMBINV_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

void execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Embedding reconstruction attack toolkit", "embinv"};
  app.set_version_flag("--version", EMBINV_VERSION);
  app.require_subcommand(1);

  IngestArgs ia;
  auto* ingest_cmd = app.add_subcommand("ingest", "Extract 20-base windows from raw sequence files");
  ingest_cmd->add_option("--raw", ia.raw, "Raw sequence file (repeatable)")->required();
  ingest_cmd->add_option("--labels", ia.labels, "pos or neg, one per --raw file")->required();
  ingest_cmd->add_option("--window-start", ia.window_start, "0-based window offset")
      ->capture_default_str();
  ingest_cmd->add_option("--window-len", ia.window_len, "Window length (must be 20)")
      ->capture_default_str();
  ingest_cmd->add_option("--out", ia.out, "Output TSV")->required();

  SplitArgs sa;
  auto* split_cmd = app.add_subcommand("split", "Stratified seeded train/test split");
  split_cmd->add_option("--in", sa.in, "Input TSV")->required();
  split_cmd->add_option("--train-out", sa.train_out, "Train TSV")->required();
  split_cmd->add_option("--test-out", sa.test_out, "Test TSV")->required();
  split_cmd->add_option("--test-pos", sa.test_pos)->capture_default_str();
  split_cmd->add_option("--test-neg", sa.test_neg)->capture_default_str();
  split_cmd->add_option("--train-pos", sa.train_pos, "Default: all remaining positives");
  split_cmd->add_option("--train-neg", sa.train_neg, "Default: all remaining negatives");
  split_cmd->add_option("--seed", sa.seed)->required();

  TokenizeArgs ta;
  auto* tok_cmd = app.add_subcommand("tokenize", "Tokenize sequences to JSON lines");
  tok_cmd->add_option("--family", ta.family, "wp, sp or bpe")->required();
  tok_cmd->add_flag("--customized", ta.customized, "One token per nucleotide");
  tok_cmd->add_option("--in", ta.in, "Input TSV")->required();
  tok_cmd->add_option("--out", ta.out, "Output JSONL")->required();
  tok_cmd->add_option("--vocab", ta.vocab, "Vocabulary table, one token per line");
  tok_cmd->add_option("--merges", ta.merges, "BPE merge table");
  tok_cmd->add_option("--scores", ta.scores, "SentencePiece score table");
  tok_cmd->add_option("--max-length", ta.max_length)->capture_default_str();

  SynthArgs ya;
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic embeddings with controlled leakage");
  synth_cmd->add_option("--mode", ya.mode, "random, leaky, endpoint or pooled")->required();
  synth_cmd->add_option("--dim", ya.dim)->capture_default_str();
  synth_cmd->add_option("--noise", ya.noise, "Gaussian noise sigma")->capture_default_str();
  synth_cmd->add_option("--seed", ya.seed)->required();
  synth_cmd->add_option("--leak", ya.leak, "Leaked positions for endpoint mode")
      ->delimiter(',')
      ->capture_default_str();
  synth_cmd->add_option("--in", ya.in, "Input TSV")->required();
  synth_cmd->add_option("--out", ya.out, "Output EMB1")->required();

  PosencArgs pa;
  auto* pos_cmd = app.add_subcommand("posenc", "Dump positional embeddings as CSV");
  pos_cmd->add_option("--dim", pa.dim)->capture_default_str();
  pos_cmd->add_option("--posenc", pa.convention, "shifted or standard")->capture_default_str();
  pos_cmd->add_option("--position-base", pa.position_base)->capture_default_str();
  pos_cmd->add_option("--out", pa.out, "Output CSV (default stdout)");

  AttackArgs aa;
  auto* attack_cmd = app.add_subcommand("attack", "Train one classifier per position");
  attack_cmd->add_option("--embeddings", aa.embeddings, "EMB1 file")->required();
  attack_cmd->add_option("--sequences", aa.sequences, "TSV aligned with the embeddings")->required();
  attack_cmd->add_option("--eval-embeddings", aa.eval_embeddings, "Held-out EMB1 file");
  attack_cmd->add_option("--eval-sequences", aa.eval_sequences, "Held-out TSV");
  attack_cmd->add_option("--seed", aa.cfg.seed)->required();
  attack_cmd->add_option("--epochs", aa.cfg.epochs)->capture_default_str();
  attack_cmd->add_option("--batch", aa.cfg.batch_size)->capture_default_str();
  attack_cmd->add_option("--hidden", aa.cfg.hidden_units)->capture_default_str();
  attack_cmd->add_option("--layers", aa.cfg.hidden_layers)->capture_default_str();
  attack_cmd->add_option("--lr", aa.cfg.learning_rate)->capture_default_str();
  attack_cmd->add_option("--train-frac", aa.cfg.train_frac)->capture_default_str();
  attack_cmd->add_option("--posenc", aa.convention, "shifted or standard")->capture_default_str();
  attack_cmd->add_option("--position-base", aa.cfg.posenc.position_base)->capture_default_str();
  attack_cmd->add_option("--parallel", aa.parallel, "Worker threads")->capture_default_str();
  attack_cmd->add_option("--out", aa.out, "Run JSON")->required();

  ReportArgs ra;
  auto* report_cmd = app.add_subcommand("report", "Render runs and reference rows as tables");
  report_cmd->add_option("--run", ra.runs, "Run JSON or ref:<model>:<kind> (repeatable)");
  report_cmd->add_option("--refs", ra.refs, "Reference models, comma separated")->delimiter(',');
  report_cmd->add_option("--out-md", ra.out_md, "Markdown output");
  report_cmd->add_option("--out-csv", ra.out_csv, "CSV output");

  CompareArgs ca;
  auto* compare_cmd = app.add_subcommand("compare", "Privacy change between two runs");
  compare_cmd->add_option("--pretrained", ca.pretrained, "Run JSON or ref:<model>:<kind>")
      ->required();
  compare_cmd->add_option("--finetuned", ca.finetuned, "Run JSON or ref:<model>:<kind>")
      ->required();
  compare_cmd->add_option("--out-prefix", ca.out_prefix, "Writes <prefix>.json/.md/.svg")
      ->required();

  RunArgs na;
  auto* run_cmd = app.add_subcommand("run", "Execute a pipeline manifest");
  run_cmd->add_option("manifest", na.manifest, "Manifest JSON")->required();
  run_cmd->add_option("--parallel", na.parallel, "Override attack worker count");
  run_cmd->add_option("--record", na.record, "Completion record path");

  std::vector<const char*> argv{"embinv"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return;
    }
    throw UsageError("InvalidArguments", e.what());
  }

  if (ingest_cmd->parsed()) do_ingest(ia);
  else if (split_cmd->parsed()) do_split(sa);
  else if (tok_cmd->parsed()) do_tokenize(ta);
  else if (synth_cmd->parsed()) do_synth(ya);
  else if (pos_cmd->parsed()) do_posenc(pa, out);
  else if (attack_cmd->parsed()) do_attack(aa);
  else if (report_cmd->parsed()) do_report(ra, out);
  else if (compare_cmd->parsed()) do_compare(ca, out);
  else if (run_cmd->parsed()) do_run(na, out, err);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();
  try {
    execute(args, out, err);
    return 0;
  } catch (const Error& e) {
    err << "embinv: " << e.what() << '\n';
    return exit_code_for(e.error_class());
  } catch (const std::exception& e) {
    err << "embinv: internal error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args) { return run_cli(args, std::cout, std::cerr); }

}  // namespace embinv::cli
