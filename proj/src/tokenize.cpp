#include "embinv/tokenize.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace embinv::tokenize {

namespace {

constexpr std::array<std::string_view, 4> kNucleotideTokens{"A", "C", "G", "T"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

std::int32_t require_id(const TokenizerSpec& spec, const std::string& token) {
  auto id = spec.vocab.id_of(token);
  if (!id) {
    throw DataError("MissingSpecialToken", "token '" + token + "' not in vocabulary");
  }
  return *id;
}

std::int32_t id_or_unk(const TokenizerSpec& spec, const std::string& token) {
  if (auto id = spec.vocab.id_of(token)) return *id;
  return require_id(spec, spec.unk_token);
}

/// Applies truncation and padding in place and fills the mask.
TokenSequence finish(const TokenizerSpec& spec, std::vector<std::string> tokens,
                     std::vector<std::int32_t> ids) {
  TokenSequence out;
  if (spec.truncation && tokens.size() > spec.max_length) {
    tokens.resize(spec.max_length);
    ids.resize(spec.max_length);
    out.truncation_applied = true;
  }
  out.attention_mask.assign(tokens.size(), 1);
  if (spec.padding == Padding::max_length && tokens.size() < spec.max_length) {
    const std::int32_t pad_id = require_id(spec, spec.pad_token);
    const std::size_t missing = spec.max_length - tokens.size();
    tokens.insert(tokens.end(), missing, spec.pad_token);
    ids.insert(ids.end(), missing, pad_id);
    out.attention_mask.insert(out.attention_mask.end(), missing, 0);
  }
  out.tokens = std::move(tokens);
  out.ids = std::move(ids);
  return out;
}

std::string normalize_bases(std::string_view sequence) {
  std::string out;
  out.reserve(sequence.size());
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    auto n = nucleotide_from_char(sequence[i]);
    if (!n) {
      throw SequenceError("AmbiguousBase", i,
                          std::string("non-ACGT character '") + sequence[i] + "' at index " +
                              std::to_string(i));
    }
    out.push_back(to_char(*n));
  }
  return out;
}

std::vector<std::string> word_piece_split(const TokenizerSpec& spec, const std::string& text) {
  std::size_t longest = 0;
  for (const auto& t : spec.vocab.tokens()) longest = std::max(longest, t.size());
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = std::min(longest, text.size() - i);
    for (; len > 0; --len) {
      const auto candidate = std::string_view(text).substr(i, len);
      if (candidate != spec.pad_token && candidate != spec.unk_token &&
          spec.vocab.contains(candidate)) {
        break;
      }
    }
    if (len == 0) {
      out.push_back(spec.unk_token);
      ++i;
    } else {
      out.emplace_back(text.substr(i, len));
      i += len;
    }
  }
  return out;
}

std::vector<std::string> bpe_split(const TokenizerSpec& spec, const std::string& text) {
  std::vector<std::string> symbols;
  symbols.reserve(text.size());
  for (char c : text) symbols.emplace_back(1, c);

  std::map<std::pair<std::string, std::string>, std::size_t> rank;
  for (std::size_t r = 0; r < spec.merges.size(); ++r) {
    rank.try_emplace({spec.merges[r].left, spec.merges[r].right}, r);
  }
  while (symbols.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = rank.find({symbols[i], symbols[i + 1]});
      if (it != rank.end()) best_rank = std::min(best_rank, it->second);
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;
    const auto& rule = spec.merges[best_rank];
    std::vector<std::string> merged;
    merged.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (i + 1 < symbols.size() && symbols[i] == rule.left && symbols[i + 1] == rule.right) {
        merged.push_back(rule.left + rule.right);
        ++i;
      } else {
        merged.push_back(symbols[i]);
      }
    }
    symbols = std::move(merged);
  }
  for (auto& s : symbols) {
    if (!spec.vocab.contains(s)) s = spec.unk_token;
  }
  return symbols;
}

std::vector<std::string> unigram_split(const TokenizerSpec& spec, const std::string& text) {
  double min_score = 0.0;
  std::size_t longest = 1;
  for (const auto& [piece, score] : spec.piece_scores) {
    min_score = std::min(min_score, score);
    longest = std::max(longest, piece.size());
  }
  const double unk_score = min_score - 10.0;
  const double neg_inf = -std::numeric_limits<double>::infinity();

  // best[i]: best log-probability of text[0, i); back[i]: start of last piece
  // (a start of i-1 with unk[i] set means an UNK character).
  const std::size_t n = text.size();
  std::vector<double> best(n + 1, neg_inf);
  std::vector<std::size_t> back(n + 1, 0);
  std::vector<bool> unk(n + 1, false);
  best[0] = 0.0;
  for (std::size_t end = 1; end <= n; ++end) {
    for (std::size_t len = std::min(longest, end); len >= 1; --len) {
      const std::size_t start = end - len;
      if (best[start] == neg_inf) continue;
      auto it = spec.piece_scores.find(text.substr(start, len));
      if (it == spec.piece_scores.end()) continue;
      const double cand = best[start] + it->second;
      if (cand > best[end]) {
        best[end] = cand;
        back[end] = start;
        unk[end] = false;
      }
    }
    const double unk_cand = best[end - 1] + unk_score;
    if (unk_cand > best[end]) {
      best[end] = unk_cand;
      back[end] = end - 1;
      unk[end] = true;
    }
  }
  std::vector<std::string> out;
  for (std::size_t end = n; end > 0; end = back[end]) {
    out.push_back(unk[end] ? spec.unk_token : text.substr(back[end], end - back[end]));
  }
  std::reverse(out.begin(), out.end());
  for (auto& s : out) {
    if (!spec.vocab.contains(s)) s = spec.unk_token;
  }
  return out;
}

}  // namespace

std::string_view family_name(Family f) noexcept {
  switch (f) {
    case Family::word_piece: return "wp";
    case Family::sentence_piece: return "sp";
    case Family::bpe: return "bpe";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "wp" || name == "wordpiece") return Family::word_piece;
  if (name == "sp" || name == "sentencepiece") return Family::sentence_piece;
  if (name == "bpe") return Family::bpe;
  throw UsageError("UnknownFamily", "tokenizer family '" + std::string(name) + "'");
}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) add(t);
}

std::int32_t Vocabulary::add(const std::string& token) {
  if (auto id = id_of(token)) return *id;
  const auto id = static_cast<std::int32_t>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

std::optional<std::int32_t> Vocabulary::id_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void TokenizerSpec::validate() const {
  if (customized) {
    for (auto t : kNucleotideTokens) {
      if (!vocab.contains(t)) {
        throw DataError("VocabularyMissingNucleotide",
                        "customized vocabulary lacks '" + std::string(t) + "'");
      }
    }
  }
  if (padding == Padding::max_length && max_length < kWindowLength) {
    throw DataError("MaxLengthTooSmall", "max_length must be >= 20 when padding to max_length");
  }
}

TokenizerSpec default_spec(Family family) {
  TokenizerSpec spec;
  spec.family = family;
  switch (family) {
    case Family::word_piece:
      spec.vocab = Vocabulary({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"});
      spec.pad_token = "[PAD]";
      spec.unk_token = "[UNK]";
      break;
    case Family::sentence_piece:
      spec.vocab = Vocabulary({"<pad>", "<unk>", "<s>", "</s>"});
      spec.pad_token = "<pad>";
      spec.unk_token = "<unk>";
      break;
    case Family::bpe:
      // GPT-2 style: the end-of-sequence token doubles as padding.
      spec.vocab = Vocabulary({"<|endoftext|>", "<unk>"});
      spec.pad_token = "<|endoftext|>";
      spec.unk_token = "<unk>";
      break;
  }
  return spec;
}

std::size_t TokenSequence::real_length() const {
  return static_cast<std::size_t>(std::count(attention_mask.begin(), attention_mask.end(), 1));
}

std::string preprocess_spacing(std::string_view sequence) {
  std::string out;
  out.reserve(sequence.empty() ? 0 : sequence.size() * 2 - 1);
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out.push_back(sequence[i]);
  }
  return out;
}

TokenizerSpec extend_vocabulary(TokenizerSpec spec) {
  for (auto t : kNucleotideTokens) spec.vocab.add(std::string(t));
  spec.customized = true;
  return spec;
}

TokenSequence tokenize_customized(const TokenizerSpec& spec, std::string_view sequence) {
  if (!spec.customized) {
    throw UsageError("NotCustomized", "tokenize_customized requires a customized spec");
  }
  spec.validate();
  const std::string spaced = preprocess_spacing(normalize_bases(sequence));
  std::vector<std::string> tokens;
  std::vector<std::int32_t> ids;
  std::istringstream words(spaced);
  std::string word;
  while (words >> word) {
    ids.push_back(require_id(spec, word));
    tokens.push_back(std::move(word));
  }
  return finish(spec, std::move(tokens), std::move(ids));
}

namespace {

std::vector<std::int32_t> ids_for(const TokenizerSpec& spec, const std::vector<std::string>& tokens) {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id_or_unk(spec, t));
  return ids;
}

}  // namespace

TokenSequence tokenize_uncustomized(const TokenizerSpec& spec, std::string_view sequence) {
  if (spec.customized) {
    throw UsageError("AlreadyCustomized", "tokenize_uncustomized requires an uncustomized spec");
  }
  spec.validate();
  const std::string text = normalize_bases(sequence);
  std::vector<std::string> tokens;
  switch (spec.family) {
    case Family::word_piece: {
      if (spec.vocab.size() <= default_spec(Family::word_piece).vocab.size()) {
        throw DataError("MissingTables", "WordPiece simulation needs a vocabulary table");
      }
      tokens = word_piece_split(spec, text);
      break;
    }
    case Family::bpe:
      if (spec.merges.empty()) {
        throw DataError("MissingTables", "BPE simulation needs a merge table");
      }
      tokens = bpe_split(spec, text);
      break;
    case Family::sentence_piece: {
      if (spec.piece_scores.empty()) {
        throw DataError("MissingTables", "SentencePiece simulation needs a score table");
      }
      // Every scored piece is part of the model vocabulary; ids follow the
      // existing vocabulary, then the pieces in byte order.
      TokenizerSpec scored = spec;
      std::vector<std::string> pieces;
      for (const auto& entry : spec.piece_scores) pieces.push_back(entry.first);
      std::sort(pieces.begin(), pieces.end());
      for (const auto& piece : pieces) scored.vocab.add(piece);
      tokens = unigram_split(scored, text);
      auto ids = ids_for(scored, tokens);
      return finish(scored, std::move(tokens), std::move(ids));
    }
  }
  auto ids = ids_for(spec, tokens);
  return finish(spec, std::move(tokens), std::move(ids));
}

TokenSequence tokenize(const TokenizerSpec& spec, std::string_view sequence) {
  return spec.customized ? tokenize_customized(spec, sequence)
                         : tokenize_uncustomized(spec, sequence);
}

std::vector<std::string> parse_vocab_table(std::string_view text) {
  std::vector<std::string> out;
  for (auto line : lines_of(text)) out.emplace_back(trim(line));
  return out;
}

std::vector<MergeRule> parse_merge_table(std::string_view text) {
  std::vector<MergeRule> out;
  std::size_t line_no = 0;
  for (auto line : lines_of(text)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream in{std::string(line)};
    MergeRule rule;
    std::string extra;
    if (!(in >> rule.left >> rule.right) || (in >> extra)) {
      throw DataError("MalformedLine", "merge table line " + std::to_string(line_no) +
                                           ": expected 'a b'");
    }
    out.push_back(std::move(rule));
  }
  return out;
}

std::unordered_map<std::string, double> parse_score_table(std::string_view text) {
  std::unordered_map<std::string, double> out;
  std::size_t line_no = 0;
  for (auto line : lines_of(text)) {
    ++line_no;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw DataError("MalformedLine", "score table line " + std::to_string(line_no) +
                                           ": expected 'piece<TAB>score'");
    }
    try {
      out[std::string(line.substr(0, tab))] = std::stod(std::string(line.substr(tab + 1)));
    } catch (const std::exception&) {
      throw DataError("MalformedLine", "score table line " + std::to_string(line_no) +
                                           ": bad score");
    }
  }
  return out;
}

}  // namespace embinv::tokenize
