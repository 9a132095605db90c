#include "support.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <sstream>
#include <unistd.h>

#include "embinv/ingest.hpp"
#include "embinv/mlp.hpp"
#include "embinv/tokenize.hpp"

namespace embinv::testing {

std::string random_bases(rng::SplitMix64& gen, std::size_t n) {
  static constexpr char kBases[] = "ACGT";
  std::string s(n, 'A');
  for (auto& c : s) c = kBases[gen.below(4)];
  return s;
}

std::vector<LabeledWindow> random_windows(std::size_t n, std::uint64_t seed) {
  rng::SplitMix64 gen(seed);
  std::vector<LabeledWindow> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({parse_sequence(random_bases(gen, kWindowLength)),
                   gen.below(2) ? SpliceLabel::positive : SpliceLabel::negative});
  }
  return out;
}

TempDir::TempDir(const std::string& stem) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          (stem + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

GradientReport check_mlp_gradients(std::uint64_t seed, double rel_tol, double abs_tol) {
  using attack::Matrix;
  attack::MlpShape shape;
  shape.input_dim = 8;
  shape.hidden_units = 6;
  shape.hidden_layers = 3;
  attack::MlpClassifier clf(shape, seed);

  rng::SplitMix64 gen(rng::hash_key({seed, 7}));
  constexpr Eigen::Index kSamples = 20;
  Matrix x(kSamples, 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gen.uniform(-1.0, 1.0);
  Matrix y = Matrix::Zero(kSamples, 4);
  for (Eigen::Index r = 0; r < kSamples; ++r) y(r, static_cast<Eigen::Index>(gen.below(4))) = 1.0;

  clf.forward(x, attack::Mode::train);
  const auto grads = clf.backward(y);

  GradientReport report;
  constexpr double h = 1e-3;
  auto& params = clf.parameters();
  for (std::size_t t = 0; t < params.tensors.size(); ++t) {
    Matrix& p = params.tensors[t];
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + h;
      const double up = clf.loss(x, y);
      p.data()[i] = saved - h;
      const double down = clf.loss(x, y);
      p.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grads.grads.tensors[t].data()[i];
      const double abs_err = std::abs(numeric - analytic);
      const double rel_err = abs_err / std::max(std::abs(numeric), std::abs(analytic));
      ++report.checked;
      report.worst_abs = std::max(report.worst_abs, abs_err);
      if (abs_err > abs_tol) report.worst_rel = std::max(report.worst_rel, rel_err);
      if (abs_err > abs_tol && rel_err > rel_tol) ++report.failures;
    }
  }
  return report;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& t : v) s += (s.empty() ? "" : ",") + t;
  return s;
}

}  // namespace

std::vector<std::string> tokenizer_conformance(std::size_t trials, std::uint64_t seed) {
  using namespace tokenize;
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  // One token per nucleotide.
  {
    const auto spec = extend_vocabulary(default_spec(Family::word_piece));
    const auto ts = tokenize_customized(spec, "ACGTAACGT");
    const std::vector<std::string> head(ts.tokens.begin(), ts.tokens.begin() + 9);
    expect(join(head) == "A,C,G,T,A,A,C,G,T", "wordpiece fixture tokens: " + join(head));
    expect(ts.tokens.size() == 60, "wordpiece fixture length");
    std::size_t pads = 0;
    for (std::size_t i = 9; i < ts.tokens.size(); ++i) pads += ts.tokens[i] == spec.pad_token;
    expect(pads == 51, "wordpiece fixture pads");
    expect(ts.real_length() == 9, "wordpiece fixture mask");
  }
  {
    const auto spec = extend_vocabulary(default_spec(Family::sentence_piece));
    const auto ts = tokenize_customized(spec, "ACGTAA");
    const std::vector<std::string> head(ts.tokens.begin(), ts.tokens.begin() + 6);
    expect(join(head) == "A,C,G,T,A,A", "sentencepiece fixture tokens: " + join(head));
    expect(ts.real_length() == 6, "sentencepiece fixture mask");
  }
  // Ordered BPE merges on the raw sequence.
  {
    auto spec = default_spec(Family::bpe);
    for (const char* t : {"A", "C", "G", "T", "AC", "TA"}) spec.vocab.add(t);
    spec.merges = {{"A", "C"}, {"T", "A"}};
    spec.padding = Padding::none;
    const auto ts = tokenize_uncustomized(spec, "ACGTAACGT");
    expect(join(ts.tokens) == "AC,G,TA,AC,G,T", "bpe merge fixture: " + join(ts.tokens));
    const auto custom = extend_vocabulary(default_spec(Family::bpe));
    expect(custom.pad_token == "<|endoftext|>", "bpe pads with end-of-sequence token");
  }

  rng::SplitMix64 gen(seed);
  for (Family family : {Family::word_piece, Family::sentence_piece, Family::bpe}) {
    const auto base = default_spec(family);
    const auto spec = extend_vocabulary(base);
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const std::size_t len = 1 + gen.below(80);
      const std::string s = random_bases(gen, len);
      const auto ts = tokenize_customized(spec, s);
      const std::size_t real = std::min(len, spec.max_length);
      bool ok = ts.tokens.size() == spec.max_length && ts.ids.size() == ts.tokens.size() &&
                ts.attention_mask.size() == ts.tokens.size() && ts.real_length() == real &&
                ts.truncation_applied == (len > spec.max_length);
      for (std::size_t i = 0; ok && i < ts.tokens.size(); ++i) {
        if (i < real) {
          ok = ts.tokens[i] == std::string(1, s[i]) && ts.attention_mask[i] == 1 &&
               ts.ids[i] == *spec.vocab.id_of(ts.tokens[i]) &&
               ts.ids[i] >= static_cast<std::int32_t>(base.vocab.size());
        } else {
          ok = ts.tokens[i] == spec.pad_token && ts.attention_mask[i] == 0;
        }
      }
      if (!ok) {
        failures.push_back(std::string(family_name(family)) + " property failed on " + s);
        break;
      }
    }
  }
  return failures;
}

std::vector<std::string> format_round_trips(std::size_t trials, std::uint64_t seed,
                                            const std::filesystem::path& dir) {
  std::vector<std::string> failures;
  rng::SplitMix64 gen(seed);
  const auto emb_path = dir / "roundtrip.emb1";
  const auto tsv_path = dir / "roundtrip.tsv";
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t rows = 1 + gen.below(12);
    const std::size_t dim = 1 + gen.below(16);
    std::vector<float> data(rows * dim);
    for (auto& v : data) {
      do {
        const auto bits = static_cast<std::uint32_t>(gen.next());
        std::memcpy(&v, &bits, sizeof v);
      } while (!std::isfinite(v));
    }
    std::string tag(gen.below(24), ' ');
    for (auto& c : tag) c = static_cast<char>(0x20 + gen.below(0x5f));
    const EmbeddingMatrix m(rows, dim, data, tag);

    const auto bytes = ingest::encode_embeddings(m);
    ingest::write_embeddings(m, emb_path);
    const auto from_file = ingest::read_embeddings(emb_path);
    const auto decoded = ingest::decode_embeddings(bytes);
    for (const auto* back : {&decoded, &from_file}) {
      const bool same = back->n_rows() == rows && back->dim() == dim &&
                        back->source_tag() == tag &&
                        std::memcmp(back->data().data(), data.data(), data.size() * sizeof(float)) == 0;
      if (!same) {
        failures.push_back("EMB1 trial " + std::to_string(trial));
        break;
      }
    }
    if (ingest::encode_embeddings(from_file) != bytes) {
      failures.push_back("EMB1 re-encode trial " + std::to_string(trial));
    }

    const auto windows = random_windows(1 + gen.below(30), gen.next());
    const std::string text = ingest::encode_sequences(windows);
    ingest::write_sequences(windows, tsv_path);
    if (ingest::decode_sequences(text) != windows || ingest::read_sequences(tsv_path) != windows ||
        ingest::read_text_file(tsv_path) != text) {
      failures.push_back("TSV trial " + std::to_string(trial));
    }
  }
  return failures;
}

}  // namespace embinv::testing
