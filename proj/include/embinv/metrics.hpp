#pragma once

#include <optional>
#include <span>
#include <vector>

#include "embinv/core.hpp"
#include "embinv/run.hpp"

namespace embinv::metrics {

struct PredictionRecord {
  PositionIndex position;
  Nucleotide truth;
  Nucleotide predicted;
};

/// Fraction of records whose prediction matches. Throws
/// DataError("EmptyRecords") for an empty span.
double position_accuracy(std::span<const PredictionRecord> records);

/// Accuracy among records whose true class is `nuc`, pooled over positions.
/// nullopt when no such record exists.
std::optional<double> nucleotide_accuracy(std::span<const PredictionRecord> records,
                                          Nucleotide nuc);

/// Same quantity computed from per-position confusion tables.
std::optional<double> nucleotide_accuracy(std::span<const ConfusionMatrix> tables,
                                          Nucleotide nuc);

double mean(std::span<const double> values);

/// Accuracy of uniform guessing over four nucleotides.
constexpr double random_baseline() noexcept { return 0.25; }

struct PrivacyComparison {
  std::vector<double> per_position_delta;  // pretrained - finetuned, P1..P20
  double average_delta = 0.0;              // mean of per_position_delta
  /// Difference of the two runs' published averages, when both carry one.
  std::optional<double> published_average_delta;
  std::string pretrained_tag;
  std::string finetuned_tag;
};

/// Positive deltas mean fine-tuning lowered reconstruction accuracy. Throws
/// DataError("PositionCountMismatch") unless both runs have 20 positions.
PrivacyComparison privacy_change(const AttackRun& pretrained, const AttackRun& finetuned);

}  // namespace embinv::metrics
