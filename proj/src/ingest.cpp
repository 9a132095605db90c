#include "embinv/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "embinv/rng.hpp"

namespace embinv::ingest {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'E', 'M', 'B', '1'};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
  }
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

}  // namespace

void WindowExtractionConfig::validate() const {
  if (window_len != kWindowLength) {
    throw UsageError("UnsupportedWindowLength",
                     "window length must be 20, got " + std::to_string(window_len));
  }
}

ExtractionResult extract_windows(const std::vector<RawLine>& raw_lines,
                                 const WindowExtractionConfig& cfg) {
  cfg.validate();
  ExtractionResult result;
  const std::size_t needed = cfg.window_start + cfg.window_len;
  for (std::size_t i = 0; i < raw_lines.size(); ++i) {
    const auto& line = raw_lines[i];
    if (line.sequence.size() < needed) {
      result.rejections.push_back({i, "InputTooShort",
                                   "length " + std::to_string(line.sequence.size()) + " < " +
                                       std::to_string(needed)});
      continue;
    }
    try {
      const auto window = std::string_view(line.sequence).substr(cfg.window_start, cfg.window_len);
      result.windows.push_back({parse_sequence(window), line.label});
    } catch (const SequenceError& e) {
      result.rejections.push_back({i, e.kind(), e.message()});
    }
  }
  if (result.windows.empty()) {
    throw DataError("EmptyResult", "no windows survived extraction");
  }
  return result;
}

std::vector<RawLine> read_raw_sequences(const std::filesystem::path& path, SpliceLabel label) {
  const std::string text = read_text_file(path);
  std::vector<RawLine> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') {
      continue;
    }
    if (const auto colon = view.rfind(':'); colon != std::string_view::npos) {
      view = trim(view.substr(colon + 1));
    }
    out.push_back({std::string(view), label});
  }
  return out;
}

SplitSpec hs3d_split_spec(std::uint64_t seed) {
  SplitSpec spec;
  spec.test_positive = 1000;
  spec.test_negative = 1000;
  spec.train_positive = 2880;
  spec.train_negative = 28800;
  spec.seed = seed;
  return spec;
}

Split make_split(const std::vector<LabeledWindow>& windows, const SplitSpec& spec) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    (windows[i].label == SpliceLabel::positive ? pos : neg).push_back(i);
  }

  auto check = [](const char* cls, std::size_t available, std::size_t requested) {
    if (requested > available) {
      throw DataError("InsufficientSamples", std::string(cls) + ": available " +
                                                 std::to_string(available) + ", requested " +
                                                 std::to_string(requested));
    }
  };
  const std::size_t train_pos = spec.train_positive.value_or(
      pos.size() >= spec.test_positive ? pos.size() - spec.test_positive : 0);
  const std::size_t train_neg = spec.train_negative.value_or(
      neg.size() >= spec.test_negative ? neg.size() - spec.test_negative : 0);
  check("positive", pos.size(), spec.test_positive + train_pos);
  check("negative", neg.size(), spec.test_negative + train_neg);

  rng::SplitMix64 pos_rng(rng::hash_key({spec.seed, 1}));
  rng::SplitMix64 neg_rng(rng::hash_key({spec.seed, 0}));
  pos_rng.shuffle(std::span(pos));
  neg_rng.shuffle(std::span(neg));

  std::vector<std::size_t> test_idx;
  std::vector<std::size_t> train_idx;
  auto take = [](const std::vector<std::size_t>& src, std::size_t n_test, std::size_t n_train,
                 std::vector<std::size_t>& test, std::vector<std::size_t>& train) {
    test.insert(test.end(), src.begin(), src.begin() + static_cast<std::ptrdiff_t>(n_test));
    train.insert(train.end(), src.begin() + static_cast<std::ptrdiff_t>(n_test),
                 src.begin() + static_cast<std::ptrdiff_t>(n_test + n_train));
  };
  take(pos, spec.test_positive, train_pos, test_idx, train_idx);
  take(neg, spec.test_negative, train_neg, test_idx, train_idx);
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  Split split;
  split.test.reserve(test_idx.size());
  split.train.reserve(train_idx.size());
  for (auto i : test_idx) split.test.push_back(windows[i]);
  for (auto i : train_idx) split.train.push_back(windows[i]);
  return split;
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& m) {
  if (m.n_rows() > UINT32_MAX || m.dim() > UINT32_MAX) {
    throw DataError("DimMismatch", "matrix too large for EMB1");
  }
  if (m.source_tag().size() > UINT16_MAX) {
    throw DataError("TagTooLong", "source tag exceeds 65535 bytes");
  }
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.reserve(12 + m.data().size() * 4 + 2 + m.source_tag().size());
  put_u32(out, static_cast<std::uint32_t>(m.n_rows()));
  put_u32(out, static_cast<std::uint32_t>(m.dim()));
  for (float v : m.data()) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  put_u16(out, static_cast<std::uint16_t>(m.source_tag().size()));
  out.insert(out.end(), m.source_tag().begin(), m.source_tag().end());
  return out;
}

EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw DataError("BadMagic", "file does not start with EMB1");
  }
  if (bytes.size() < 12) {
    throw DataError("TruncatedFile", "header shorter than 12 bytes");
  }
  const std::size_t n_rows = get_u32(bytes, 4);
  const std::size_t dim = get_u32(bytes, 8);
  if (n_rows == 0 || dim == 0) {
    throw DataError("DimMismatch", "header declares an empty matrix");
  }
  const std::size_t payload = n_rows * dim * 4;
  if (bytes.size() < 12 + payload + 2) {
    throw DataError("TruncatedFile", "header declares " + std::to_string(n_rows) + "x" +
                                         std::to_string(dim) + " but only " +
                                         std::to_string(bytes.size()) + " bytes present");
  }
  const std::size_t tag_len = get_u16(bytes, 12 + payload);
  const std::size_t expected = 12 + payload + 2 + tag_len;
  if (bytes.size() < expected) {
    throw DataError("TruncatedFile", "source tag truncated");
  }
  if (bytes.size() > expected) {
    throw DataError("DimMismatch", std::to_string(bytes.size() - expected) +
                                       " trailing bytes after declared payload");
  }
  std::vector<float> data(n_rows * dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes, 12 + 4 * i));
  }
  const auto* tag_begin = reinterpret_cast<const char*>(bytes.data() + 12 + payload + 2);
  return EmbeddingMatrix(n_rows, dim, std::move(data), std::string(tag_begin, tag_len));
}

void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  write_binary_file(path, encode_embeddings(m));
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(read_binary_file(path));
}

std::string encode_sequences(const std::vector<LabeledWindow>& windows) {
  std::string out;
  out.reserve(windows.size() * (kWindowLength + 3));
  for (const auto& w : windows) {
    out += render_sequence(w.sequence);
    out += '\t';
    out += w.label == SpliceLabel::positive ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::vector<LabeledWindow> decode_sequences(std::string_view text) {
  std::vector<LabeledWindow> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const auto where = "line " + std::to_string(line_no) + ": ";
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw DataError("MalformedLine", where + "missing TAB separator");
    }
    const auto label_text = line.substr(tab + 1);
    if (label_text != "0" && label_text != "1") {
      throw DataError("MalformedLine", where + "label must be 0 or 1");
    }
    try {
      out.push_back({parse_sequence(line.substr(0, tab)),
                     label_text == "1" ? SpliceLabel::positive : SpliceLabel::negative});
    } catch (const SequenceError& e) {
      throw SequenceError(e.kind(), e.index(), where + e.message());
    }
  }
  return out;
}

void write_sequences(const std::vector<LabeledWindow>& windows, const std::filesystem::path& path) {
  write_text_file(path, encode_sequences(windows));
}

std::vector<LabeledWindow> read_sequences(const std::filesystem::path& path) {
  return decode_sequences(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("IoError", "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("IoError", "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("IoError", "cannot write " + path.string());
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw IoError("IoError", "write failed for " + path.string());
  }
}

void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> content) {
  write_text_file(path, std::string_view(reinterpret_cast<const char*>(content.data()),
                                         content.size()));
}

}  // namespace embinv::ingest
