#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "embinv/core.hpp"
#include "embinv/metrics.hpp"
#include "embinv/mlp.hpp"
#include "embinv/run.hpp"

namespace embinv::attack {

struct PositionResult {
  MlpClassifier classifier;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  std::vector<metrics::PredictionRecord> records;
};

/// Seed for the classifier of one position, derived from the run seed.
std::uint64_t position_seed(std::uint64_t run_seed, PositionIndex pos);

/// Builds the B x 2d input block: embedding row followed by the positional
/// embedding for `pos`.
Matrix build_inputs(const EmbeddingMatrix& embeddings, std::span<const std::size_t> rows,
                    PositionIndex pos, const posenc::Options& opts);

/// Row indices of the train and eval partitions. The partition depends only on
/// the run seed, so every position is evaluated on the same rows.
struct Partition {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};
Partition partition_rows(std::size_t n_rows, const AttackConfig& cfg);

/// Mini-batches of at most batch_size rows. A trailing batch of one row is
/// merged into the previous batch.
std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> rows,
                                                   std::size_t batch_size);

/// Trains and evaluates the classifier for one position. With `held_out`, all
/// of `data` is used for training and `held_out` for evaluation; otherwise
/// `data` is partitioned by cfg.train_frac. Throws DataError("DatasetTooSmall")
/// for fewer than 10 rows.
PositionResult train_position(const Dataset& data, PositionIndex pos, const AttackConfig& cfg,
                              const Dataset* held_out = nullptr);

/// Attacks P1..P20 with up to `parallel` worker threads. Output does not depend
/// on `parallel`.
AttackRun run_attack(const Dataset& data, const AttackConfig& cfg, std::size_t parallel = 1,
                     const Dataset* held_out = nullptr);

}  // namespace embinv::attack
