#include "embinv/mlp.hpp"

#include <cmath>
#include <string>

#include "embinv/core.hpp"
#include "embinv/rng.hpp"

namespace embinv::attack {

namespace {

Matrix xavier_uniform(std::size_t fan_in, std::size_t fan_out, rng::SplitMix64& gen) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      w(r, c) = gen.uniform(-bound, bound);
    }
  }
  return w;
}

Matrix sigmoid(const Matrix& x) {
  return (1.0 + (-x.array()).exp()).inverse().matrix();
}

}  // namespace

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += static_cast<std::size_t>(t.size());
  return n;
}

bool ParameterSet::all_finite() const {
  for (const auto& t : tensors) {
    if (!t.allFinite()) return false;
  }
  return true;
}

MlpClassifier::MlpClassifier(const MlpShape& shape, std::uint64_t init_seed) : shape_(shape) {
  if (shape_.input_dim == 0 || shape_.num_classes < 2 ||
      (shape_.hidden_layers > 0 && shape_.hidden_units == 0)) {
    throw UsageError("InvalidShape", "MLP needs input_dim >= 1, hidden_units >= 1, classes >= 2");
  }
  rng::SplitMix64 gen(init_seed);
  std::size_t fan_in = shape_.input_dim;
  const auto units = static_cast<Eigen::Index>(shape_.hidden_units);
  for (std::size_t l = 0; l < shape_.hidden_layers; ++l) {
    params_.tensors.push_back(xavier_uniform(fan_in, shape_.hidden_units, gen));
    params_.tensors.push_back(Matrix::Zero(1, units));
    params_.tensors.push_back(Matrix::Ones(1, units));
    params_.tensors.push_back(Matrix::Zero(1, units));
    running_mean_.push_back(RowVector::Zero(units));
    running_var_.push_back(RowVector::Ones(units));
    fan_in = shape_.hidden_units;
  }
  params_.tensors.push_back(xavier_uniform(fan_in, shape_.num_classes, gen));
  params_.tensors.push_back(Matrix::Zero(1, static_cast<Eigen::Index>(shape_.num_classes)));
}

void MlpClassifier::check_width(const Matrix& batch) const {
  if (static_cast<std::size_t>(batch.cols()) != shape_.input_dim) {
    throw UsageError("WidthMismatch", "batch width " + std::to_string(batch.cols()) +
                                          " != input width " + std::to_string(shape_.input_dim));
  }
}

Matrix MlpClassifier::run(const Matrix& batch, Mode mode, ForwardCache* cache) const {
  check_width(batch);
  const Eigen::Index b = batch.rows();
  if (mode == Mode::train && b < 2) {
    throw UsageError("BatchTooSmall", "train-mode batch needs at least 2 rows");
  }
  if (cache) {
    cache->layers.clear();
    cache->valid = false;
  }

  Matrix x = batch;
  for (std::size_t l = 0; l < shape_.hidden_layers; ++l) {
    const Matrix& w = params_.tensors[4 * l];
    const Matrix& bias = params_.tensors[4 * l + 1];
    const Matrix& gamma = params_.tensors[4 * l + 2];
    const Matrix& beta = params_.tensors[4 * l + 3];

    Matrix z = x * w;
    z.rowwise() += bias.row(0);

    RowVector mean;
    RowVector var;
    if (mode == Mode::train) {
      mean = z.colwise().mean();
      var = (z.rowwise() - mean).array().square().colwise().mean().matrix();
    } else {
      mean = running_mean_[l];
      var = running_var_[l];
    }
    const RowVector inv_std = (var.array() + shape_.bn_epsilon).rsqrt().matrix();
    Matrix normalized = ((z.rowwise() - mean).array().rowwise() * inv_std.array()).matrix();
    Matrix y = (normalized.array().rowwise() * gamma.row(0).array()).matrix();
    y.rowwise() += beta.row(0);
    Matrix a = sigmoid(y);

    if (cache) {
      cache->layers.push_back({std::move(x), std::move(normalized), inv_std, a, mean, var});
    }
    x = std::move(a);
  }

  const Matrix& w_out = params_.tensors[4 * shape_.hidden_layers];
  const Matrix& b_out = params_.tensors[4 * shape_.hidden_layers + 1];
  Matrix logits = x * w_out;
  logits.rowwise() += b_out.row(0);
  Matrix probs = softmax_rows(logits);
  if (cache) {
    // The output layer's input is the last hidden activation (or the batch).
    cache->layers.push_back({std::move(x), Matrix(), RowVector(), Matrix(), RowVector(), RowVector()});
    cache->probabilities = probs;
    cache->valid = true;
  }
  return probs;
}

Matrix MlpClassifier::forward(const Matrix& batch, Mode mode) {
  if (mode == Mode::eval) {
    return run(batch, mode, nullptr);
  }
  Matrix probs = run(batch, mode, &cache_);
  // Running variance is tracked unbiased; normalization uses the biased
  // batch variance.
  const double m = shape_.bn_momentum;
  const double b = static_cast<double>(batch.rows());
  for (std::size_t l = 0; l < shape_.hidden_layers; ++l) {
    const auto& c = cache_.layers[l];
    running_mean_[l] = (1.0 - m) * running_mean_[l] + m * c.batch_mean;
    running_var_[l] = (1.0 - m) * running_var_[l] + (m * b / (b - 1.0)) * c.batch_var;
  }
  return probs;
}

Gradients MlpClassifier::backward(const Matrix& targets) const {
  if (!cache_.valid) {
    throw UsageError("NoForwardCache", "backward() needs a preceding train-mode forward()");
  }
  const Matrix& probs = cache_.probabilities;
  if (targets.rows() != probs.rows() || targets.cols() != probs.cols()) {
    throw UsageError("WidthMismatch", "target shape does not match batch");
  }
  Gradients out;
  out.loss = cross_entropy(probs, targets);
  if (!std::isfinite(out.loss)) {
    throw NumericError("NonFiniteLoss", "cross-entropy is not finite");
  }
  const double inv_b = 1.0 / static_cast<double>(probs.rows());
  const std::size_t hidden = shape_.hidden_layers;
  out.grads.tensors.resize(params_.tensors.size());

  Matrix delta = (probs - targets) * inv_b;  // d loss / d logits
  const Matrix& out_input = cache_.layers[hidden].input;
  out.grads.tensors[4 * hidden] = out_input.transpose() * delta;
  out.grads.tensors[4 * hidden + 1] = delta.colwise().sum();
  Matrix upstream = delta * params_.tensors[4 * hidden].transpose();

  for (std::size_t l = hidden; l-- > 0;) {
    const LayerCache& c = cache_.layers[l];
    const Matrix& gamma = params_.tensors[4 * l + 2];
    const double b = static_cast<double>(c.input.rows());

    const Matrix dy = (upstream.array() * c.activation.array() * (1.0 - c.activation.array())).matrix();
    out.grads.tensors[4 * l + 2] = (dy.array() * c.normalized.array()).colwise().sum().matrix();
    out.grads.tensors[4 * l + 3] = dy.colwise().sum();

    const Matrix dxhat = (dy.array().rowwise() * gamma.row(0).array()).matrix();
    const RowVector sum_dxhat = dxhat.colwise().sum();
    const RowVector sum_dxhat_xhat = (dxhat.array() * c.normalized.array()).colwise().sum().matrix();
    Matrix dz = (b * dxhat.array()).matrix();
    dz.rowwise() -= sum_dxhat;
    dz -= (c.normalized.array().rowwise() * sum_dxhat_xhat.array()).matrix();
    dz = ((dz.array().rowwise() * c.inv_std.array()) / b).matrix();

    out.grads.tensors[4 * l] = c.input.transpose() * dz;
    out.grads.tensors[4 * l + 1] = dz.colwise().sum();
    if (l > 0) {
      upstream = dz * params_.tensors[4 * l].transpose();
    }
  }
  return out;
}

double MlpClassifier::loss(const Matrix& batch, const Matrix& targets) const {
  ForwardCache scratch;
  return cross_entropy(run(batch, Mode::train, &scratch), targets);
}

const Matrix& MlpClassifier::cached_normalized(std::size_t layer) const {
  if (!cache_.valid || layer >= shape_.hidden_layers) {
    throw UsageError("NoForwardCache", "no cached hidden layer " + std::to_string(layer));
  }
  return cache_.layers[layer].normalized;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix shifted = logits.colwise() - logits.rowwise().maxCoeff();
  Matrix e = shifted.array().exp().matrix();
  const Eigen::VectorXd sums = e.rowwise().sum();
  return e.array().colwise() / sums.array();
}

std::size_t argmax_row(const Matrix& m, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < m.cols(); ++c) {
    if (m(row, c) > m(row, best)) best = c;
  }
  return static_cast<std::size_t>(best);
}

double cross_entropy(const Matrix& probabilities, const Matrix& targets) {
  // Clamp keeps log() finite when a probability underflows to exactly zero.
  const Matrix logp = probabilities.array().max(1e-300).log().matrix();
  return -(targets.array() * logp.array()).sum() / static_cast<double>(probabilities.rows());
}

AdamOptimizer::AdamOptimizer(const ParameterSet& like, AdamSettings settings)
    : settings_(settings) {
  for (const auto& t : like.tensors) {
    m_.push_back(Matrix::Zero(t.rows(), t.cols()));
    v_.push_back(Matrix::Zero(t.rows(), t.cols()));
  }
}

void AdamOptimizer::step(ParameterSet& params, const ParameterSet& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(settings_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(settings_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    const Matrix& g = grads.tensors[i];
    m_[i] = settings_.beta1 * m_[i] + (1.0 - settings_.beta1) * g;
    v_[i] = settings_.beta2 * v_[i] + (1.0 - settings_.beta2) * g.cwiseProduct(g);
    params.tensors[i].array() -= settings_.learning_rate * (m_[i].array() / bc1) /
                                 ((v_[i].array() / bc2).sqrt() + settings_.epsilon);
  }
  if (!params.all_finite()) {
    throw NumericError("NonFiniteParameter", "parameter left the finite range at step " +
                                                 std::to_string(t_));
  }
}

}  // namespace embinv::attack
