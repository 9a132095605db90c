#include "embinv/attack.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include <spdlog/spdlog.h>

#include "embinv/rng.hpp"

namespace embinv {

void AttackConfig::validate() const {
  auto fail = [](const std::string& msg) { throw UsageError("InvalidConfig", msg); };
  if (!(train_frac > 0.0 && train_frac < 1.0)) fail("train_frac must be in (0, 1)");
  if (batch_size < 2) fail("batch_size must be >= 2 (batch norm needs two rows)");
  if (epochs < 1) fail("epochs must be >= 1");
  if (hidden_layers > 0 && hidden_units < 1) fail("hidden_units must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
  if (!(bn_epsilon > 0.0)) fail("bn_epsilon must be > 0");
  if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) fail("bn_momentum must be in (0, 1]");
}

}  // namespace embinv

namespace embinv::attack {

namespace {

constexpr std::uint64_t kSplitStream = 0x5350;   // "SP"
constexpr std::uint64_t kInitStream = 0x494e;    // "IN"
constexpr std::uint64_t kEpochStream = 0x4550;   // "EP"

Matrix one_hot_targets(const std::vector<LabeledWindow>& windows,
                       std::span<const std::size_t> rows, PositionIndex pos) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), kNumNucleotides);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    y(static_cast<Eigen::Index>(r),
      static_cast<Eigen::Index>(class_index(windows[rows[r]].at(pos)))) = 1.0;
  }
  return y;
}

}  // namespace

std::uint64_t position_seed(std::uint64_t run_seed, PositionIndex pos) {
  return rng::hash_key({run_seed, static_cast<std::uint64_t>(pos.value())});
}

Matrix build_inputs(const EmbeddingMatrix& embeddings, std::span<const std::size_t> rows,
                    PositionIndex pos, const posenc::Options& opts) {
  const std::size_t d = embeddings.dim();
  const auto pe = posenc::positional_embedding(pos, d, opts);
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(2 * d));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto emb = embeddings.row(rows[r]);
    const auto rr = static_cast<Eigen::Index>(r);
    for (std::size_t c = 0; c < d; ++c) {
      x(rr, static_cast<Eigen::Index>(c)) = static_cast<double>(emb[c]);
      x(rr, static_cast<Eigen::Index>(d + c)) = pe[c];
    }
  }
  return x;
}

Partition partition_rows(std::size_t n_rows, const AttackConfig& cfg) {
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng::SplitMix64 gen(rng::hash_key({cfg.seed, kSplitStream}));
  gen.shuffle(std::span(order));
  const auto n_train = static_cast<std::size_t>(std::floor(cfg.train_frac * static_cast<double>(n_rows)));
  if (n_train < 2 || n_train >= n_rows) {
    throw DataError("DatasetTooSmall", "train_frac leaves an empty partition for " +
                                           std::to_string(n_rows) + " rows");
  }
  Partition p;
  p.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  p.eval.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return p;
}

std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> rows,
                                                   std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < rows.size(); start += batch_size) {
    const std::size_t end = std::min(rows.size(), start + batch_size);
    if (end - start < 2 && !batches.empty()) {
      batches.back().insert(batches.back().end(), rows.begin() + static_cast<std::ptrdiff_t>(start),
                            rows.begin() + static_cast<std::ptrdiff_t>(end));
    } else {
      batches.emplace_back(rows.begin() + static_cast<std::ptrdiff_t>(start),
                           rows.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  return batches;
}

PositionResult train_position(const Dataset& data, PositionIndex pos, const AttackConfig& cfg,
                              const Dataset* held_out) {
  cfg.validate();
  if (data.size() < 10) {
    throw DataError("DatasetTooSmall", "need at least 10 rows, got " + std::to_string(data.size()));
  }
  if (held_out && held_out->embeddings().dim() != data.embeddings().dim()) {
    throw DataError("DimMismatch", "held-out embeddings have a different dimension");
  }

  Partition part;
  if (held_out) {
    part.train.resize(data.size());
    std::iota(part.train.begin(), part.train.end(), std::size_t{0});
    part.eval.resize(held_out->size());
    std::iota(part.eval.begin(), part.eval.end(), std::size_t{0});
  } else {
    part = partition_rows(data.size(), cfg);
  }
  const Dataset& eval_data = held_out ? *held_out : data;

  const std::uint64_t seed = position_seed(cfg.seed, pos);
  MlpShape shape;
  shape.input_dim = 2 * data.embeddings().dim();
  shape.hidden_units = cfg.hidden_units;
  shape.hidden_layers = cfg.hidden_layers;
  shape.bn_epsilon = cfg.bn_epsilon;
  shape.bn_momentum = cfg.bn_momentum;
  MlpClassifier clf(shape, rng::hash_key({seed, kInitStream}));
  AdamOptimizer adam(clf.parameters(), {cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
                                        cfg.adam_epsilon});

  std::vector<std::size_t> order = part.train;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng::SplitMix64 gen(rng::hash_key({seed, kEpochStream, epoch}));
    gen.shuffle(std::span(order));
    for (const auto& batch : make_batches(order, cfg.batch_size)) {
      const Matrix x = build_inputs(data.embeddings(), batch, pos, cfg.posenc);
      const Matrix y = one_hot_targets(data.windows(), batch, pos);
      clf.forward(x, Mode::train);
      Gradients g = clf.backward(y);
      adam.step(clf.parameters(), g.grads);
    }
  }

  const Matrix x_eval = build_inputs(eval_data.embeddings(), part.eval, pos, cfg.posenc);
  const Matrix probs = clf.forward(x_eval, Mode::eval);
  PositionResult result{std::move(clf), 0.0, {}, {}};
  result.records.reserve(part.eval.size());
  for (std::size_t r = 0; r < part.eval.size(); ++r) {
    const Nucleotide truth = eval_data.windows()[part.eval[r]].at(pos);
    const Nucleotide pred = nucleotide_from_index(argmax_row(probs, static_cast<Eigen::Index>(r)));
    result.confusion.add(truth, pred);
    result.records.push_back({pos, truth, pred});
  }
  result.accuracy = metrics::position_accuracy(result.records);
  return result;
}

AttackRun run_attack(const Dataset& data, const AttackConfig& cfg, std::size_t parallel,
                     const Dataset* held_out) {
  cfg.validate();
  const auto positions = all_positions();
  std::vector<std::optional<PositionResult>> results(positions.size());
  std::vector<std::exception_ptr> errors(positions.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < positions.size(); i = next.fetch_add(1)) {
      try {
        results[i] = train_position(data, positions[i], cfg, held_out);
        spdlog::debug("{}: accuracy {:.3f}", positions[i].label(), results[i]->accuracy);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(parallel, 1, positions.size());
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!errors[i]) continue;
    const std::string where = positions[i].label() + ": ";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(e.error_class(), e.kind(), where + e.message());
    }
  }

  AttackRun run;
  run.config = cfg;
  run.source_tag = data.embeddings().source_tag();
  run.eval_size = results.front()->records.size();
  for (auto& r : results) {
    run.per_position_accuracy.push_back(r->accuracy);
    run.confusion.push_back(r->confusion);
  }
  for (Nucleotide n : kAllNucleotides) {
    run.per_nucleotide_accuracy[class_index(n)] =
        metrics::nucleotide_accuracy(std::span<const ConfusionMatrix>(run.confusion), n);
  }
  run.average_accuracy = metrics::mean(run.per_position_accuracy);
  run.validate();
  return run;
}

}  // namespace embinv::attack
