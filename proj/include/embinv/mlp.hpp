#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace embinv::attack {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

struct MlpShape {
  std::size_t input_dim = 0;
  std::size_t hidden_units = 200;
  std::size_t hidden_layers = 3;
  std::size_t num_classes = 4;
  double bn_epsilon = 1e-5;
  double bn_momentum = 0.1;
};

enum class Mode : std::uint8_t { train, eval };

/// Trainable tensors in a fixed order: for each hidden layer
/// {weight (in x out), bias (1 x out), bn scale, bn shift}, then the output
/// layer {weight, bias}. Gradients use the same layout.
struct ParameterSet {
  std::vector<Matrix> tensors;

  std::size_t scalar_count() const;
  bool all_finite() const;
};

struct Gradients {
  ParameterSet grads;
  double loss = 0.0;
};

/// Hidden block: linear -> batch norm -> sigmoid, repeated hidden_layers
/// times, then a linear layer to num_classes logits and a softmax.
class MlpClassifier {
 public:
  MlpClassifier(const MlpShape& shape, std::uint64_t init_seed);

  const MlpShape& shape() const noexcept { return shape_; }
  ParameterSet& parameters() noexcept { return params_; }
  const ParameterSet& parameters() const noexcept { return params_; }
  const std::vector<RowVector>& running_mean() const noexcept { return running_mean_; }
  const std::vector<RowVector>& running_var() const noexcept { return running_var_; }

  /// Row-wise class probabilities. Train mode normalizes with batch
  /// statistics (B >= 2), updates running statistics and caches activations
  /// for backward(). Eval mode uses running statistics only.
  Matrix forward(const Matrix& batch, Mode mode);

  /// Mean categorical cross-entropy gradients for the last train-mode
  /// forward(). `targets` is one-hot, B x num_classes. Throws
  /// NumericError("NonFiniteLoss") on a non-finite loss.
  Gradients backward(const Matrix& targets) const;

  /// Train-mode loss for the current parameters without touching running
  /// statistics or the cache.
  double loss(const Matrix& batch, const Matrix& targets) const;

  /// Normalized (pre scale/shift) values of hidden layer `layer` from the
  /// last train-mode forward().
  const Matrix& cached_normalized(std::size_t layer) const;

 private:
  struct LayerCache {
    Matrix input;
    Matrix normalized;
    RowVector inv_std;
    Matrix activation;
    RowVector batch_mean;
    RowVector batch_var;
  };
  struct ForwardCache {
    std::vector<LayerCache> layers;
    Matrix probabilities;
    bool valid = false;
  };

  Matrix run(const Matrix& batch, Mode mode, ForwardCache* cache) const;
  void check_width(const Matrix& batch) const;

  MlpShape shape_;
  ParameterSet params_;
  std::vector<RowVector> running_mean_;
  std::vector<RowVector> running_var_;
  ForwardCache cache_;
};

Matrix softmax_rows(const Matrix& logits);

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax_row(const Matrix& m, Eigen::Index row);

double cross_entropy(const Matrix& probabilities, const Matrix& targets);

struct AdamSettings {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamOptimizer {
 public:
  AdamOptimizer(const ParameterSet& like, AdamSettings settings);

  /// One bias-corrected Adam update. Throws NumericError("NonFiniteParameter")
  /// if any parameter leaves the finite range.
  void step(ParameterSet& params, const ParameterSet& grads);

  std::uint64_t steps() const noexcept { return t_; }

 private:
  AdamSettings settings_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::uint64_t t_ = 0;
};

}  // namespace embinv::attack
