#include "embinv/metrics.hpp"

#include <cmath>
#include <numeric>

namespace embinv {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts) {
    for (auto c : row) n += c;
  }
  return n;
}

std::uint64_t ConfusionMatrix::correct() const {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < kNumNucleotides; ++i) n += counts[i][i];
  return n;
}

std::uint64_t ConfusionMatrix::true_count(Nucleotide nuc) const {
  const auto& row = counts[class_index(nuc)];
  return std::accumulate(row.begin(), row.end(), std::uint64_t{0});
}

double ConfusionMatrix::accuracy() const {
  const auto n = total();
  if (n == 0) {
    throw DataError("EmptyRecords", "confusion table is empty");
  }
  return static_cast<double>(correct()) / static_cast<double>(n);
}

void AttackRun::validate() const {
  if (per_position_accuracy.size() != kWindowLength) {
    throw DataError("PositionCountMismatch",
                    "run has " + std::to_string(per_position_accuracy.size()) + " positions");
  }
  for (double a : per_position_accuracy) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw DataError("InvalidAccuracy", "accuracy outside [0, 1]");
    }
  }
  if (std::abs(metrics::mean(per_position_accuracy) - average_accuracy) > 1e-9) {
    throw DataError("InconsistentAverage", "average_accuracy is not the per-position mean");
  }
  if (!confusion.empty()) {
    if (confusion.size() != kWindowLength) {
      throw DataError("PositionCountMismatch", "confusion tables must cover 20 positions");
    }
    for (const auto& c : confusion) {
      if (c.total() != eval_size) {
        throw DataError("InconsistentConfusion", "confusion total differs from eval size");
      }
    }
  }
}

}  // namespace embinv

namespace embinv::metrics {

double position_accuracy(std::span<const PredictionRecord> records) {
  if (records.empty()) {
    throw DataError("EmptyRecords", "no prediction records");
  }
  std::size_t hits = 0;
  for (const auto& r : records) hits += r.truth == r.predicted ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

std::optional<double> nucleotide_accuracy(std::span<const PredictionRecord> records,
                                          Nucleotide nuc) {
  std::size_t total = 0;
  std::size_t hits = 0;
  for (const auto& r : records) {
    if (r.truth != nuc) continue;
    ++total;
    hits += r.predicted == nuc ? 1 : 0;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::optional<double> nucleotide_accuracy(std::span<const ConfusionMatrix> tables,
                                          Nucleotide nuc) {
  std::uint64_t total = 0;
  std::uint64_t hits = 0;
  for (const auto& t : tables) {
    total += t.true_count(nuc);
    hits += t.counts[class_index(nuc)][class_index(nuc)];
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

double mean(std::span<const double> values) {
  if (values.empty()) {
    throw DataError("EmptyRecords", "mean of no values");
  }
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

PrivacyComparison privacy_change(const AttackRun& pretrained, const AttackRun& finetuned) {
  if (pretrained.per_position_accuracy.size() != kWindowLength ||
      finetuned.per_position_accuracy.size() != kWindowLength) {
    throw DataError("PositionCountMismatch", "privacy change needs two 20-position runs");
  }
  PrivacyComparison out;
  out.per_position_delta.resize(kWindowLength);
  for (std::size_t i = 0; i < kWindowLength; ++i) {
    out.per_position_delta[i] =
        pretrained.per_position_accuracy[i] - finetuned.per_position_accuracy[i];
  }
  out.average_delta = mean(out.per_position_delta);
  if (pretrained.published_average && finetuned.published_average) {
    out.published_average_delta = *pretrained.published_average - *finetuned.published_average;
  }
  out.pretrained_tag = pretrained.source_tag;
  out.finetuned_tag = finetuned.source_tag;
  return out;
}

}  // namespace embinv::metrics
