#include "embinv/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string_view>

#include "embinv/ingest.hpp"
#include "embinv/run_io.hpp"
#include "reference_data.inc"

namespace embinv::report {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = line.find(sep, start);
    out.push_back(line.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

std::vector<std::string_view> data_lines(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    out.push_back(line);
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

double require_number(std::string_view s, const char* kind, const std::string& where) {
  auto v = parse_number(s);
  if (!v) throw DataError(kind, where + ": not a number: '" + std::string(s) + "'");
  return *v;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string strip_leading_zero(std::string s) {
  // "0.450" -> ".450", "-0.067" -> "-.067"
  const std::size_t digits = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (s.size() > digits + 1 && s[digits] == '0' && s[digits + 1] == '.') s.erase(digits, 1);
  return s;
}

std::string nucleotide_cell(const std::optional<double>& v) {
  return v ? format_accuracy(*v) : "n/a";
}

}  // namespace

std::string_view kind_name(RowKind k) noexcept {
  switch (k) {
    case RowKind::pretrained: return "pretrained";
    case RowKind::finetuned: return "finetuned";
    case RowKind::pans: return "pans";
  }
  return "pretrained";
}

RowKind parse_kind(std::string_view name) {
  if (name == "pretrained") return RowKind::pretrained;
  if (name == "finetuned") return RowKind::finetuned;
  if (name == "pans") return RowKind::pans;
  throw UsageError("UnknownReferenceKind", "unknown reference kind '" + std::string(name) +
                                               "' (pretrained, finetuned, pans)");
}

double ReferenceRow::positional_mean() const { return metrics::mean(positions); }

ReferenceTable ReferenceTable::parse(std::string_view csv) {
  const auto lines = data_lines(csv);
  if (lines.empty()) throw DataError("MalformedReference", "reference table is empty");
  const auto header = split(lines.front(), ',');
  if (header.size() != 3 + kWindowLength + 1 || header[0] != "model" || header.back() != "Avg") {
    throw DataError("MalformedReference", "unexpected reference header");
  }
  ReferenceTable table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    const std::string where = "reference row " + std::to_string(i);
    if (cells.size() != header.size()) {
      throw DataError("MalformedReference", where + ": expected " + std::to_string(header.size()) +
                                                " cells");
    }
    ReferenceRow row;
    row.model = std::string(cells[0]);
    row.display_name = std::string(cells[1]);
    try {
      row.kind = parse_kind(cells[2]);
    } catch (const UsageError& e) {
      throw DataError("MalformedReference", where + ": " + e.message());
    }
    for (std::size_t p = 0; p < kWindowLength; ++p) {
      row.positions[p] = require_number(cells[3 + p], "MalformedReference", where);
    }
    row.published_average = require_number(cells.back(), "MalformedReference", where);
    table.rows_.push_back(std::move(row));
  }
  return table;
}

const ReferenceTable& ReferenceTable::bundled() {
  static const ReferenceTable table = parse(kReferenceAccuracyCsv);
  return table;
}

std::vector<std::string> ReferenceTable::models() const {
  std::vector<std::string> out;
  for (const auto& r : rows_) {
    if (std::find(out.begin(), out.end(), r.model) == out.end()) out.push_back(r.model);
  }
  return out;
}

bool ReferenceTable::contains(std::string_view model) const {
  return std::any_of(rows_.begin(), rows_.end(), [&](const auto& r) { return r.model == model; });
}

const ReferenceRow& ReferenceTable::row(std::string_view model, RowKind kind) const {
  for (const auto& r : rows_) {
    if (r.model == model && r.kind == kind) return r;
  }
  throw UsageError("UnknownReferenceModel", "no reference row " + std::string(model) + ":" +
                                                std::string(kind_name(kind)));
}

std::vector<const ReferenceRow*> ReferenceTable::rows_for(std::string_view model) const {
  std::vector<const ReferenceRow*> out;
  for (const auto& r : rows_) {
    if (r.model == model) out.push_back(&r);
  }
  return out;
}

std::vector<NucleotideReference> parse_nucleotide_references(std::string_view csv) {
  const auto lines = data_lines(csv);
  std::vector<NucleotideReference> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    const std::string where = "nucleotide reference row " + std::to_string(i);
    if (cells.size() != 5 || cells[1].size() != 1) {
      throw DataError("MalformedReference", where + ": expected model,nucleotide,pre,ft,note");
    }
    NucleotideReference ref;
    ref.model = std::string(cells[0]);
    const auto nuc = nucleotide_from_char(cells[1][0]);
    if (!nuc) throw DataError("MalformedReference", where + ": unknown nucleotide");
    ref.nucleotide = *nuc;
    if (!cells[2].empty()) ref.pretrained = require_number(cells[2], "MalformedReference", where);
    if (!cells[3].empty()) ref.finetuned = require_number(cells[3], "MalformedReference", where);
    ref.note = std::string(cells[4]);
    out.push_back(std::move(ref));
  }
  return out;
}

const std::vector<NucleotideReference>& bundled_nucleotide_references() {
  static const auto refs = parse_nucleotide_references(kReferenceNucleotideCsv);
  return refs;
}

std::vector<AverageGap> average_gaps(const ReferenceTable& table, double slack) {
  std::vector<AverageGap> out;
  for (const auto& r : table.rows()) {
    const double m = r.positional_mean();
    if (std::abs(m - r.published_average) > slack) {
      out.push_back({r.model, r.kind, m, r.published_average});
    }
  }
  return out;
}

AttackRun reference_run(const ReferenceRow& row) {
  AttackRun run;
  run.per_position_accuracy.assign(row.positions.begin(), row.positions.end());
  run.average_accuracy = metrics::mean(run.per_position_accuracy);
  run.published_average = row.published_average;
  run.source_tag = "reference:" + row.model + ":" + std::string(kind_name(row.kind));
  if (row.kind != RowKind::pans) {
    for (const auto& ref : bundled_nucleotide_references()) {
      if (ref.model != row.model) continue;
      run.per_nucleotide_accuracy[class_index(ref.nucleotide)] =
          row.kind == RowKind::pretrained ? ref.pretrained : ref.finetuned;
    }
  }
  run.validate();
  return run;
}

AttackRun reference_run(std::string_view model, RowKind kind) {
  return reference_run(ReferenceTable::bundled().row(model, kind));
}

AttackRun load_run_source(const std::string& source) {
  constexpr std::string_view prefix = "ref:";
  if (source.rfind(prefix, 0) != 0) return run_io::read_run(source);
  const auto parts = split(std::string_view(source).substr(prefix.size()), ':');
  if (parts.size() != 2) {
    throw UsageError("InvalidReference", "expected ref:<model>:<kind>, got '" + source + "'");
  }
  return reference_run(parts[0], parse_kind(parts[1]));
}

std::string format_accuracy(double v) { return strip_leading_zero(fixed3(v)); }

std::string format_delta(double v) {
  std::string s = fixed3(v);
  if (s == "-0.000" || s == "0.000") return ".000";
  if (s[0] != '-') s.insert(s.begin(), '+');
  return strip_leading_zero(s);
}

TableRow row_from_run(const AttackRun& run) {
  TableRow row;
  row.label = run.source_tag;
  row.positions = run.per_position_accuracy;
  row.average = run.published_average.value_or(run.average_accuracy);
  row.marked.assign(row.positions.size(), false);
  return row;
}

TableRow row_from_reference(const ReferenceRow& ref) {
  TableRow row;
  row.label = ref.display_name + " " + std::string(kind_name(ref.kind));
  row.positions.assign(ref.positions.begin(), ref.positions.end());
  row.average = ref.published_average;
  row.marked.assign(row.positions.size(), false);
  return row;
}

void mark_lower(TableRow& finetuned, const TableRow& pretrained) {
  const std::size_t n = std::min(finetuned.positions.size(), pretrained.positions.size());
  finetuned.marked.assign(finetuned.positions.size(), false);
  for (std::size_t i = 0; i < n; ++i) {
    finetuned.marked[i] = finetuned.positions[i] < pretrained.positions[i];
  }
}

std::vector<TableRow> table_rows(const std::vector<AttackRun>& runs,
                                 const std::vector<std::string>& ref_models,
                                 const ReferenceTable& table) {
  std::vector<TableRow> rows;
  for (const auto& run : runs) rows.push_back(row_from_run(run));
  for (const auto& model : ref_models) {
    const auto refs = table.rows_for(model);
    if (refs.empty()) {
      throw UsageError("UnknownReferenceModel", "no bundled reference rows for '" + model + "'");
    }
    std::optional<TableRow> pretrained;
    for (const auto* ref : refs) {
      if (ref->kind == RowKind::pretrained) pretrained = row_from_reference(*ref);
    }
    for (const auto* ref : refs) {
      TableRow row = row_from_reference(*ref);
      if (ref->kind == RowKind::finetuned && pretrained) mark_lower(row, *pretrained);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string render_markdown(const std::vector<TableRow>& rows, const std::vector<AttackRun>& runs) {
  std::ostringstream out;
  out << "| Row |";
  for (std::size_t p = 1; p <= kWindowLength; ++p) out << " P" << p << " |";
  out << " Avg |\n|---|";
  for (std::size_t p = 0; p <= kWindowLength; ++p) out << "---:|";
  out << '\n';
  for (const auto& row : rows) {
    out << "| " << row.label << " |";
    for (std::size_t p = 0; p < row.positions.size(); ++p) {
      out << ' ' << format_accuracy(row.positions[p]) << (row.marked[p] ? "*" : "") << " |";
    }
    out << ' ' << format_accuracy(row.average) << " |\n";
  }
  if (std::any_of(rows.begin(), rows.end(), [](const TableRow& r) {
        return std::find(r.marked.begin(), r.marked.end(), true) != r.marked.end();
      })) {
    out << "\n`*` fine-tuned accuracy below the pretrained value at that position.\n";
  }
  if (!runs.empty()) {
    out << "\n| Run | A | C | G | T |\n|---|---:|---:|---:|---:|\n";
    for (const auto& run : runs) {
      out << "| " << run.source_tag << " |";
      for (const auto& v : run.per_nucleotide_accuracy) out << ' ' << nucleotide_cell(v) << " |";
      out << '\n';
    }
  }
  out << "\nRandom baseline: " << format_accuracy(metrics::random_baseline()) << '\n';
  return out.str();
}

std::string render_csv(const std::vector<TableRow>& rows) {
  std::ostringstream out;
  out << "source_tag";
  for (std::size_t p = 1; p <= kWindowLength; ++p) out << ",P" << p;
  out << ",Avg\n";
  for (const auto& row : rows) {
    out << row.label;
    for (double v : row.positions) out << ',' << fixed3(v);
    out << ',' << fixed3(row.average) << '\n';
  }
  return out.str();
}

std::vector<TableRow> parse_csv(std::string_view text) {
  const auto lines = data_lines(text);
  if (lines.empty() || split(lines.front(), ',').size() != kWindowLength + 2) {
    throw DataError("MalformedCsv", "missing or malformed CSV header");
  }
  std::vector<TableRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    // The tag may itself contain commas, so numbers are taken from the right.
    const auto cells = split(lines[i], ',');
    const std::string where = "line " + std::to_string(i + 1);
    if (cells.size() < kWindowLength + 2) {
      throw DataError("MalformedCsv", where + ": expected " + std::to_string(kWindowLength + 2) +
                                          " cells");
    }
    const std::size_t first = cells.size() - kWindowLength - 1;
    TableRow row;
    for (std::size_t c = 0; c < first; ++c) {
      if (c) row.label += ',';
      row.label += cells[c];
    }
    for (std::size_t p = 0; p < kWindowLength; ++p) {
      row.positions.push_back(require_number(cells[first + p], "MalformedCsv", where));
    }
    row.average = require_number(cells.back(), "MalformedCsv", where);
    row.marked.assign(kWindowLength, false);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_privacy_chart(const metrics::PrivacyComparison& cmp) {
  constexpr double width = 800.0;
  constexpr double height = 400.0;
  constexpr double left = 60.0;
  constexpr double right = 20.0;
  constexpr double top = 40.0;
  constexpr double bottom = 40.0;
  constexpr double half = (height - top - bottom) / 2.0;
  constexpr double zero_y = top + half;
  const double slot = (width - left - right) / static_cast<double>(kWindowLength);

  double scale = 0.0;
  for (double d : cmp.per_position_delta) scale = std::max(scale, std::abs(d));
  if (scale == 0.0) scale = 1.0;

  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"400\" "
         "viewBox=\"0 0 800 400\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"400\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">Privacy change per position (avg "
      << format_delta(cmp.published_average_delta.value_or(cmp.average_delta)) << ")</text>\n";
  out << "<text x=\"" << num(left - 8) << "\" y=\"" << num(top + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
      << format_delta(scale) << "</text>\n";
  out << "<text x=\"" << num(left - 8) << "\" y=\"" << num(height - bottom + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
      << format_delta(-scale) << "</text>\n";
  for (std::size_t i = 0; i < cmp.per_position_delta.size(); ++i) {
    const double d = cmp.per_position_delta[i];
    const double h = std::abs(d) / scale * half;
    const double x = left + static_cast<double>(i) * slot + slot * 0.15;
    const double y = d > 0.0 ? zero_y - h : zero_y;
    const char* fill = d > 0.0 ? "#2e7d32" : (d < 0.0 ? "#c62828" : "#9e9e9e");
    char delta[32];
    std::snprintf(delta, sizeof delta, "%.6f", d);
    out << "<rect data-position=\"P" << i + 1 << "\" data-delta=\"" << delta << "\" x=\""
        << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(slot * 0.7) << "\" height=\""
        << num(h) << "\" fill=\"" << fill << "\"/>\n";
    out << "<text x=\"" << num(x + slot * 0.35) << "\" y=\"" << num(height - bottom + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">P" << i + 1
        << "</text>\n";
  }
  out << "<line x1=\"" << num(left) << "\" y1=\"" << num(zero_y) << "\" x2=\"" << num(width - right)
      << "\" y2=\"" << num(zero_y) << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  out << "</svg>\n";
  return out.str();
}

std::string render_comparison_markdown(const AttackRun& pretrained, const AttackRun& finetuned,
                                       const metrics::PrivacyComparison& cmp) {
  TableRow pre = row_from_run(pretrained);
  TableRow ft = row_from_run(finetuned);
  mark_lower(ft, pre);
  std::ostringstream out;
  out << render_markdown({pre, ft}, {pretrained, finetuned});
  out << "\n| Delta |";
  for (std::size_t p = 1; p <= kWindowLength; ++p) out << " P" << p << " |";
  out << "\n|---|";
  for (std::size_t p = 0; p < kWindowLength; ++p) out << "---:|";
  out << "\n| pretrained - finetuned |";
  for (double d : cmp.per_position_delta) out << ' ' << format_delta(d) << " |";
  out << "\n\nMean per-position delta: " << format_delta(cmp.average_delta) << '\n';
  if (cmp.published_average_delta) {
    out << "Delta of published averages: " << format_delta(*cmp.published_average_delta) << '\n';
  }
  return out.str();
}

metrics::PrivacyComparison compare_command(const std::string& pretrained_source,
                                           const std::string& finetuned_source,
                                           const std::filesystem::path& out_prefix) {
  const AttackRun pre = load_run_source(pretrained_source);
  const AttackRun ft = load_run_source(finetuned_source);
  const auto cmp = metrics::privacy_change(pre, ft);
  auto with_ext = [&](const char* ext) {
    auto p = out_prefix;
    p += ext;
    return p;
  };
  ingest::write_text_file(with_ext(".json"), run_io::dump(run_io::comparison_to_json(cmp)));
  ingest::write_text_file(with_ext(".md"), render_comparison_markdown(pre, ft, cmp));
  ingest::write_text_file(with_ext(".svg"), render_privacy_chart(cmp));
  return cmp;
}

}  // namespace embinv::report
