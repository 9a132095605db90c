#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace embinv {

// ----------------------------- errors -----------------------------

/// Broad failure classes. Each maps onto one process exit code.
enum class ErrorClass : std::uint8_t {
  usage,        // 2
  data_format,  // 3
  numeric,      // 4
  io,           // 5
};

int exit_code_for(ErrorClass cls) noexcept;

/// Base exception for every failure the toolkit reports. `kind` is a short
/// machine-readable tag such as "AmbiguousBase" or "TruncatedFile".
class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string kind, const std::string& message);

  ErrorClass error_class() const noexcept { return class_; }
  const std::string& kind() const noexcept { return kind_; }
  /// what() without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorClass class_;
  std::string kind_;
  std::string message_;
};

class UsageError : public Error {
 public:
  UsageError(std::string kind, const std::string& message)
      : Error(ErrorClass::usage, std::move(kind), message) {}
};

class DataError : public Error {
 public:
  DataError(std::string kind, const std::string& message)
      : Error(ErrorClass::data_format, std::move(kind), message) {}
};

class NumericError : public Error {
 public:
  NumericError(std::string kind, const std::string& message)
      : Error(ErrorClass::numeric, std::move(kind), message) {}
};

class IoError : public Error {
 public:
  IoError(std::string kind, const std::string& message)
      : Error(ErrorClass::io, std::move(kind), message) {}
};

/// Raised by parse_sequence. `index` is the 0-based offending character for
/// AmbiguousBase, or the observed length for WrongLength.
class SequenceError : public DataError {
 public:
  SequenceError(std::string kind, std::size_t index, const std::string& message)
      : DataError(std::move(kind), message), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// ----------------------------- nucleotides -----------------------------

/// Class index order is fixed: A=0, C=1, G=2, T=3.
enum class Nucleotide : std::uint8_t { A = 0, C = 1, G = 2, T = 3 };

inline constexpr std::size_t kNumNucleotides = 4;
inline constexpr std::size_t kWindowLength = 20;
inline constexpr std::array<Nucleotide, kNumNucleotides> kAllNucleotides{
    Nucleotide::A, Nucleotide::C, Nucleotide::G, Nucleotide::T};

constexpr std::size_t class_index(Nucleotide n) noexcept {
  return static_cast<std::size_t>(n);
}

constexpr Nucleotide nucleotide_from_index(std::size_t idx) {
  if (idx >= kNumNucleotides) {
    throw std::out_of_range("nucleotide class index out of range");
  }
  return static_cast<Nucleotide>(idx);
}

char to_char(Nucleotide n) noexcept;

/// Accepts upper- or lowercase A/C/G/T.
std::optional<Nucleotide> nucleotide_from_char(char c) noexcept;

using Sequence = std::array<Nucleotide, kWindowLength>;

/// Parses exactly 20 canonical bases. Throws SequenceError with kind
/// "WrongLength" or "AmbiguousBase".
Sequence parse_sequence(std::string_view text);

std::string render_sequence(const Sequence& seq);

// ----------------------------- positions -----------------------------

/// 1-based sequence position in [1, 20].
class PositionIndex {
 public:
  explicit PositionIndex(int one_based);

  int value() const noexcept { return value_; }
  std::size_t offset() const noexcept { return static_cast<std::size_t>(value_ - 1); }
  std::string label() const { return "P" + std::to_string(value_); }

  friend bool operator==(PositionIndex, PositionIndex) = default;
  friend auto operator<=>(PositionIndex, PositionIndex) = default;

 private:
  int value_;
};

std::vector<PositionIndex> all_positions();

// ----------------------------- windows and datasets -----------------------------

enum class SpliceLabel : std::uint8_t { negative = 0, positive = 1 };

struct LabeledWindow {
  Sequence sequence{};
  SpliceLabel label = SpliceLabel::negative;

  Nucleotide at(PositionIndex pos) const { return sequence[pos.offset()]; }
  friend bool operator==(const LabeledWindow&, const LabeledWindow&) = default;
};

/// Row-major N x d matrix of finite 32-bit reals.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(std::size_t n_rows, std::size_t dim, std::vector<float> data,
                  std::string source_tag = {});

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::string& source_tag() const noexcept { return source_tag_; }
  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::size_t r) const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t n_rows_;
  std::size_t dim_;
  std::vector<float> data_;
  std::string source_tag_;
};

/// Windows aligned row-by-row with an embedding matrix.
class Dataset {
 public:
  Dataset(std::vector<LabeledWindow> windows, EmbeddingMatrix embeddings);

  std::size_t size() const noexcept { return windows_.size(); }
  const std::vector<LabeledWindow>& windows() const noexcept { return windows_; }
  const EmbeddingMatrix& embeddings() const noexcept { return embeddings_; }

 private:
  std::vector<LabeledWindow> windows_;
  EmbeddingMatrix embeddings_;
};

}  // namespace embinv
