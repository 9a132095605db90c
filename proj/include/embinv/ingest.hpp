#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "embinv/core.hpp"

namespace embinv::ingest {

/// Which slice of each raw sequence becomes the attack window. The default
/// reads the 20 bases at 0-based offsets [60, 80).
struct WindowExtractionConfig {
  std::size_t window_start = 60;
  std::size_t window_len = kWindowLength;

  /// Throws UsageError("UnsupportedWindowLength") unless window_len == 20.
  void validate() const;
};

struct RawLine {
  std::string sequence;
  SpliceLabel label = SpliceLabel::negative;
};

struct Rejection {
  std::size_t line_index = 0;  // 0-based index into the raw input
  std::string kind;            // InputTooShort | WrongLength | AmbiguousBase
  std::string detail;
};

struct ExtractionResult {
  std::vector<LabeledWindow> windows;
  std::vector<Rejection> rejections;
};

/// Bad lines are logged in `rejections` and skipped. Throws
/// DataError("EmptyResult") when nothing survives.
ExtractionResult extract_windows(const std::vector<RawLine>& raw_lines,
                                 const WindowExtractionConfig& cfg);

/// Reads a raw one-sequence-per-line file. Blank lines and lines starting with
/// '#' are skipped; if a line contains ':' only the text after the last ':' is
/// kept, and surrounding whitespace is trimmed.
std::vector<RawLine> read_raw_sequences(const std::filesystem::path& path, SpliceLabel label);

struct SplitSpec {
  std::size_t test_positive = 1000;
  std::size_t test_negative = 1000;
  /// When unset, every sample not drawn for the test set goes to train.
  std::optional<std::size_t> train_positive;
  std::optional<std::size_t> train_negative;
  std::uint64_t seed = 0;
};

/// Split sizes used for the HS3D experiment: 31,680 train (2,880 / 28,800)
/// and a balanced 2,000-row test set.
SplitSpec hs3d_split_spec(std::uint64_t seed);

struct Split {
  std::vector<LabeledWindow> train;
  std::vector<LabeledWindow> test;
};

/// Seeded shuffle within each class, then a stratified take: test first, then
/// train from the remainder. Each split keeps input order. Throws
/// DataError("InsufficientSamples") when a class cannot cover the request.
Split make_split(const std::vector<LabeledWindow>& windows, const SplitSpec& spec);

// EMB1: "EMB1" | u32 n_rows | u32 dim | n_rows*dim f32 | u16 L | L bytes tag,
// all little-endian.
std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& m);
EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes);
void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

// TSV: "<20 bases>\t<0|1>" per line, no header.
std::string encode_sequences(const std::vector<LabeledWindow>& windows);
std::vector<LabeledWindow> decode_sequences(std::string_view text);
void write_sequences(const std::vector<LabeledWindow>& windows, const std::filesystem::path& path);
std::vector<LabeledWindow> read_sequences(const std::filesystem::path& path);

/// Whole-file helpers shared by the other modules.
std::string read_text_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);
void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> content);

}  // namespace embinv::ingest
