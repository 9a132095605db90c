#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "embinv/core.hpp"

namespace embinv::tokenize {

enum class Family : std::uint8_t { word_piece, sentence_piece, bpe };

std::string_view family_name(Family f) noexcept;
/// Accepts "wp", "sp", "bpe" (and the long names).
Family parse_family(std::string_view name);

enum class Padding : std::uint8_t { max_length, none };

/// Ordered token table; ids are insertion positions.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(const std::vector<std::string>& tokens);

  /// Appends `token` if absent; returns its id either way.
  std::int32_t add(const std::string& token);
  std::optional<std::int32_t> id_of(std::string_view token) const;
  bool contains(std::string_view token) const { return id_of(token).has_value(); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

struct MergeRule {
  std::string left;
  std::string right;
};

struct TokenizerSpec {
  Family family = Family::word_piece;
  Vocabulary vocab;
  std::vector<MergeRule> merges;                       // BPE, in priority order
  std::unordered_map<std::string, double> piece_scores;  // SentencePiece log-probabilities
  bool customized = false;
  std::size_t max_length = 60;
  Padding padding = Padding::max_length;
  bool truncation = true;
  std::string pad_token;
  std::string unk_token;

  /// Checks the customization and padding invariants; throws DataError.
  void validate() const;
};

/// Default special tokens per family. BPE pads with its end-of-sequence token.
TokenizerSpec default_spec(Family family);

struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<std::int32_t> ids;
  std::vector<std::uint8_t> attention_mask;
  bool truncation_applied = false;

  std::size_t real_length() const;
};

/// "ACGT" -> "A C G T".
std::string preprocess_spacing(std::string_view sequence);

/// Returns `spec` with any missing A/C/G/T appended as new highest ids and the
/// customized flag set. Idempotent.
TokenizerSpec extend_vocabulary(TokenizerSpec spec);

/// One token per nucleotide, then truncation/padding. Throws
/// DataError("VocabularyMissingNucleotide") if the spec was not extended.
TokenSequence tokenize_customized(const TokenizerSpec& spec, std::string_view sequence);

/// Simulated subword tokenization on the raw (unspaced) sequence:
/// WordPiece greedy longest match, BPE ordered merges, SentencePiece unigram
/// Viterbi. Unmatched characters become one UNK each.
TokenSequence tokenize_uncustomized(const TokenizerSpec& spec, std::string_view sequence);

/// Dispatches on spec.customized.
TokenSequence tokenize(const TokenizerSpec& spec, std::string_view sequence);

// Table files: one token per line; merges as "a b"; scores as "piece<TAB>score".
std::vector<std::string> parse_vocab_table(std::string_view text);
std::vector<MergeRule> parse_merge_table(std::string_view text);
std::unordered_map<std::string, double> parse_score_table(std::string_view text);

}  // namespace embinv::tokenize
