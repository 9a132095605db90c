#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "embinv/core.hpp"
#include "embinv/metrics.hpp"
#include "embinv/run.hpp"

namespace embinv::report {

enum class RowKind : std::uint8_t { pretrained, finetuned, pans };

std::string_view kind_name(RowKind k) noexcept;
/// Throws UsageError("UnknownReferenceKind").
RowKind parse_kind(std::string_view name);

struct ReferenceRow {
  std::string model;         // lowercase key, e.g. "bert"
  std::string display_name;  // e.g. "BERT-base"
  RowKind kind = RowKind::pretrained;
  std::array<double, kWindowLength> positions{};
  double published_average = 0.0;

  double positional_mean() const;
};

struct NucleotideReference {
  std::string model;
  Nucleotide nucleotide = Nucleotide::A;
  std::optional<double> pretrained;
  std::optional<double> finetuned;
  std::string note;
};

class ReferenceTable {
 public:
  /// Parses `model,display_name,kind,P1..P20,Avg`; '#' lines are comments.
  /// Throws DataError("MalformedReference").
  static ReferenceTable parse(std::string_view csv);
  /// The table compiled into the library.
  static const ReferenceTable& bundled();

  const std::vector<ReferenceRow>& rows() const noexcept { return rows_; }
  std::vector<std::string> models() const;
  bool contains(std::string_view model) const;
  /// Throws UsageError("UnknownReferenceModel") when the model or the kind for
  /// that model is absent.
  const ReferenceRow& row(std::string_view model, RowKind kind) const;
  std::vector<const ReferenceRow*> rows_for(std::string_view model) const;

 private:
  std::vector<ReferenceRow> rows_;
};

std::vector<NucleotideReference> parse_nucleotide_references(std::string_view csv);
const std::vector<NucleotideReference>& bundled_nucleotide_references();

/// Rows whose published average differs from the mean of their positions by
/// more than `slack`.
struct AverageGap {
  std::string model;
  RowKind kind;
  double positional_mean;
  double published_average;
};
std::vector<AverageGap> average_gaps(const ReferenceTable& table, double slack = 0.002);

/// AttackRun view of a reference row. average_accuracy is the positional mean;
/// published_average carries the Avg column. Pretrained/finetuned runs also
/// carry any quoted per-nucleotide values. Tag: "reference:<model>:<kind>".
AttackRun reference_run(const ReferenceRow& row);
AttackRun reference_run(std::string_view model, RowKind kind);

/// Accepts "ref:<model>:<kind>" or a run JSON path.
AttackRun load_run_source(const std::string& source);

/// Three decimals without the leading zero: ".450", "1.000".
std::string format_accuracy(double v);
/// Signed variant for deltas: "+.078", "-.067", ".000".
std::string format_delta(double v);

struct TableRow {
  std::string label;
  std::vector<double> positions;  // 20 entries
  double average = 0.0;
  std::vector<bool> marked;       // 20 entries; true renders a '*'
};

/// Uses the published average when the run carries one.
TableRow row_from_run(const AttackRun& run);
TableRow row_from_reference(const ReferenceRow& row);
/// Marks positions where `finetuned` is below `pretrained`.
void mark_lower(TableRow& finetuned, const TableRow& pretrained);

/// Run rows first, then every bundled row of each requested model with
/// fine-tuned rows marked against the pretrained row. Throws
/// UsageError("UnknownReferenceModel").
std::vector<TableRow> table_rows(const std::vector<AttackRun>& runs,
                                 const std::vector<std::string>& ref_models,
                                 const ReferenceTable& table = ReferenceTable::bundled());

std::string render_markdown(const std::vector<TableRow>& rows,
                            const std::vector<AttackRun>& runs = {});

/// `source_tag,P1,...,P20,Avg`, three-decimal fixed.
std::string render_csv(const std::vector<TableRow>& rows);
/// Inverse of render_csv. Markers are not stored. Throws
/// DataError("MalformedCsv").
std::vector<TableRow> parse_csv(std::string_view text);

/// 800x400 bar chart of per-position deltas. Bars carry data-position and
/// data-delta attributes.
std::string render_privacy_chart(const metrics::PrivacyComparison& cmp);

std::string render_comparison_markdown(const AttackRun& pretrained, const AttackRun& finetuned,
                                       const metrics::PrivacyComparison& cmp);

/// Loads both sources, writes <prefix>.json, <prefix>.md and <prefix>.svg.
metrics::PrivacyComparison compare_command(const std::string& pretrained_source,
                                           const std::string& finetuned_source,
                                           const std::filesystem::path& out_prefix);

}  // namespace embinv::report
