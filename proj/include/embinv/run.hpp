#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "embinv/core.hpp"
#include "embinv/posenc.hpp"

namespace embinv {

struct AttackConfig {
  double train_frac = 0.8;
  std::size_t batch_size = 128;
  std::size_t epochs = 5;
  std::size_t hidden_units = 200;
  std::size_t hidden_layers = 3;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  double bn_epsilon = 1e-5;
  double bn_momentum = 0.1;
  posenc::Options posenc;

  /// Throws UsageError("InvalidConfig").
  void validate() const;
};

/// counts[true][predicted], class order A, C, G, T.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumNucleotides>, kNumNucleotides> counts{};

  void add(Nucleotide truth, Nucleotide predicted) {
    ++counts[class_index(truth)][class_index(predicted)];
  }
  std::uint64_t total() const;
  std::uint64_t correct() const;
  std::uint64_t true_count(Nucleotide n) const;
  double accuracy() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Result of attacking all 20 positions. Runs loaded from reference tables
/// carry no confusion tables and may carry the published average, which is
/// not always the mean of the published per-position values.
struct AttackRun {
  AttackConfig config;
  std::vector<double> per_position_accuracy;                         // 20 entries, P1..P20
  std::array<std::optional<double>, kNumNucleotides> per_nucleotide_accuracy{};
  std::vector<ConfusionMatrix> confusion;                            // 20 entries or empty
  double average_accuracy = 0.0;
  std::size_t eval_size = 0;
  std::string source_tag;
  std::optional<double> published_average;

  /// Checks the shape, averaging and confusion-count invariants; throws DataError.
  void validate() const;
};

}  // namespace embinv
