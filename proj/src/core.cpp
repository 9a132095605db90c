#include "embinv/core.hpp"

#include <cmath>

namespace embinv {

int exit_code_for(ErrorClass cls) noexcept {
  switch (cls) {
    case ErrorClass::usage: return 2;
    case ErrorClass::data_format: return 3;
    case ErrorClass::numeric: return 4;
    case ErrorClass::io: return 5;
  }
  return 1;
}

Error::Error(ErrorClass cls, std::string kind, const std::string& message)
    : std::runtime_error(kind + ": " + message), class_(cls), kind_(std::move(kind)), message_(message) {}

char to_char(Nucleotide n) noexcept {
  static constexpr std::array<char, kNumNucleotides> kChars{'A', 'C', 'G', 'T'};
  return kChars[class_index(n)];
}

std::optional<Nucleotide> nucleotide_from_char(char c) noexcept {
  switch (c) {
    case 'A': case 'a': return Nucleotide::A;
    case 'C': case 'c': return Nucleotide::C;
    case 'G': case 'g': return Nucleotide::G;
    case 'T': case 't': return Nucleotide::T;
    default: return std::nullopt;
  }
}

Sequence parse_sequence(std::string_view text) {
  if (text.size() != kWindowLength) {
    throw SequenceError("WrongLength", text.size(),
                        "expected " + std::to_string(kWindowLength) + " bases, got " +
                            std::to_string(text.size()));
  }
  Sequence seq{};
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto n = nucleotide_from_char(text[i]);
    if (!n) {
      throw SequenceError("AmbiguousBase", i,
                          std::string("non-ACGT character '") + text[i] + "' at index " +
                              std::to_string(i));
    }
    seq[i] = *n;
  }
  return seq;
}

std::string render_sequence(const Sequence& seq) {
  std::string out;
  out.reserve(seq.size());
  for (Nucleotide n : seq) {
    out.push_back(to_char(n));
  }
  return out;
}

PositionIndex::PositionIndex(int one_based) : value_(one_based) {
  if (one_based < 1 || one_based > static_cast<int>(kWindowLength)) {
    throw UsageError("PositionOutOfRange",
                     "position " + std::to_string(one_based) + " not in [1, 20]");
  }
}

std::vector<PositionIndex> all_positions() {
  std::vector<PositionIndex> out;
  out.reserve(kWindowLength);
  for (int i = 1; i <= static_cast<int>(kWindowLength); ++i) {
    out.emplace_back(i);
  }
  return out;
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t n_rows, std::size_t dim, std::vector<float> data,
                                 std::string source_tag)
    : n_rows_(n_rows), dim_(dim), data_(std::move(data)), source_tag_(std::move(source_tag)) {
  if (n_rows_ == 0 || dim_ == 0) {
    throw DataError("DimMismatch", "embedding matrix needs n_rows >= 1 and dim >= 1");
  }
  if (data_.size() != n_rows_ * dim_) {
    throw DataError("DimMismatch", "data length " + std::to_string(data_.size()) +
                                       " != " + std::to_string(n_rows_) + " x " +
                                       std::to_string(dim_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw DataError("NonFiniteValue", "non-finite value at row " + std::to_string(i / dim_) +
                                            ", column " + std::to_string(i % dim_));
    }
  }
}

std::span<const float> EmbeddingMatrix::row(std::size_t r) const {
  if (r >= n_rows_) {
    throw std::out_of_range("embedding row out of range");
  }
  return std::span<const float>(data_).subspan(r * dim_, dim_);
}

Dataset::Dataset(std::vector<LabeledWindow> windows, EmbeddingMatrix embeddings)
    : windows_(std::move(windows)), embeddings_(std::move(embeddings)) {
  if (windows_.size() != embeddings_.n_rows()) {
    throw DataError("RowCountMismatch", std::to_string(windows_.size()) + " windows vs " +
                                            std::to_string(embeddings_.n_rows()) +
                                            " embedding rows");
  }
}

}  // namespace embinv
