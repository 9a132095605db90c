#include "doctest.h"

#include <cmath>

#include "embinv/mlp.hpp"
#include "support.hpp"

using namespace embinv;
using namespace embinv::attack;
using embinv::testing::error_kind;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
  rng::SplitMix64 gen(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = gen.uniform(-scale, scale);
  return m;
}

Matrix random_targets(Eigen::Index rows, std::uint64_t seed) {
  rng::SplitMix64 gen(seed);
  Matrix y = Matrix::Zero(rows, 4);
  for (Eigen::Index r = 0; r < rows; ++r) y(r, static_cast<Eigen::Index>(gen.below(4))) = 1.0;
  return y;
}

MlpShape small_shape(std::size_t layers = 3) {
  MlpShape s;
  s.input_dim = 8;
  s.hidden_units = 16;
  s.hidden_layers = layers;
  return s;
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("softmax rows sum to one") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix p = softmax_rows(random_matrix(10, 4, seed, 50.0));
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      REQUIRE(std::abs(p.row(r).sum() - 1.0) < 1e-6);
      REQUIRE(p.row(r).minCoeff() >= 0.0);
    }
  }
  const Matrix huge = softmax_rows(Matrix::Constant(1, 4, 1e300));
  CHECK(huge(0, 0) == doctest::Approx(0.25));
}

TEST_CASE("zero weights give a uniform prediction") {
  MlpClassifier clf(small_shape(), 1);
  for (auto& t : clf.parameters().tensors) t.setZero();
  const Matrix p = clf.forward(random_matrix(5, 8, 2), Mode::eval);
  for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p.data()[i] == doctest::Approx(0.25));
}

TEST_CASE("eval mode treats rows independently") {
  MlpClassifier clf(small_shape(), 3);
  clf.forward(random_matrix(32, 8, 4), Mode::train);
  const Matrix batch = random_matrix(6, 8, 5);
  const Matrix all = clf.forward(batch, Mode::eval);
  const Matrix single = clf.forward(batch.row(2), Mode::eval);
  for (Eigen::Index c = 0; c < 4; ++c) CHECK(single(0, c) == doctest::Approx(all(2, c)).epsilon(1e-12));
}

TEST_CASE("without hidden layers the weight gradient is x^T (p - y) / B") {
  MlpClassifier clf(small_shape(0), 6);
  const Matrix x = random_matrix(3, 8, 7);
  const Matrix y = random_targets(3, 8);
  const Matrix p = clf.forward(x, Mode::train);
  const auto g = clf.backward(y);
  const Matrix expected_w = x.transpose() * (p - y) / 3.0;
  const Matrix expected_b = (p - y).colwise().mean();
  CHECK((g.grads.tensors[0] - expected_w).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((g.grads.tensors[1] - expected_b).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(g.loss == doctest::Approx(cross_entropy(p, y)));
}

TEST_CASE("analytic gradients match central finite differences") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto report = embinv::testing::check_mlp_gradients(seed);
    INFO("seed " << seed << " worst abs " << report.worst_abs << " worst rel " << report.worst_rel);
    CHECK(report.checked == 202);
    CHECK(report.failures == 0);
  }
}

TEST_CASE("train-mode batch norm standardizes each feature") {
  auto check = [](const Matrix& z, double var_tol) {
    const double b = static_cast<double>(z.rows());
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      const double mean = z.col(c).mean();
      const double var = (z.col(c).array() - mean).square().sum() / b;
      REQUIRE(std::abs(mean) < 1e-6);
      REQUIRE(std::abs(var - 1.0) < var_tol);
    }
  };
  SUBCASE("first layer, default epsilon") {
    MlpClassifier clf(small_shape(), 9);
    clf.forward(random_matrix(64, 8, 10, 30.0), Mode::train);
    check(clf.cached_normalized(0), 1e-4);
  }
  SUBCASE("every layer, negligible epsilon") {
    auto shape = small_shape();
    shape.bn_epsilon = 1e-12;
    MlpClassifier clf(shape, 9);
    clf.forward(random_matrix(64, 8, 10), Mode::train);
    for (std::size_t l = 0; l < shape.hidden_layers; ++l) check(clf.cached_normalized(l), 1e-4);
  }
}

TEST_CASE("running statistics use momentum and the unbiased variance") {
  MlpClassifier clf(small_shape(1), 11);
  const Matrix x = random_matrix(10, 8, 12);
  clf.forward(x, Mode::train);
  Matrix z = x * clf.parameters().tensors[0];
  const RowVector mean = z.colwise().mean();
  const RowVector var_unbiased = (z.rowwise() - mean).array().square().colwise().sum() / 9.0;
  CHECK((clf.running_mean()[0] - 0.1 * mean).cwiseAbs().maxCoeff() < 1e-12);
  const RowVector expected_var = (0.9 * RowVector::Ones(16) + 0.1 * var_unbiased);
  CHECK((clf.running_var()[0] - expected_var).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cross-entropy limits") {
  const Matrix y = random_targets(4, 13);
  CHECK(cross_entropy(y, y) == doctest::Approx(0.0));
  CHECK(cross_entropy(Matrix::Constant(4, 4, 0.25), y) == doctest::Approx(std::log(4.0)));
  CHECK(std::isfinite(cross_entropy(Matrix::Zero(4, 4), y)));
}

TEST_CASE("argmax ties go to the lower class") {
  Matrix m(2, 4);
  m << 0.1, 0.4, 0.4, 0.1, 0.25, 0.25, 0.25, 0.25;
  CHECK(argmax_row(m, 0) == 1);
  CHECK(argmax_row(m, 1) == 0);
}

TEST_CASE("initialization is Xavier-bounded and seeded") {
  MlpClassifier a(small_shape(), 5);
  MlpClassifier b(small_shape(), 5);
  CHECK(a.parameters().tensors[0] == b.parameters().tensors[0]);
  const double bound = std::sqrt(6.0 / (8.0 + 16.0));
  CHECK(a.parameters().tensors[0].cwiseAbs().maxCoeff() <= bound);
  CHECK(a.parameters().scalar_count() == (8 * 16 + 3 * 16) + 2 * (16 * 16 + 3 * 16) + 16 * 4 + 4);
}

TEST_CASE("usage errors") {
  MlpClassifier clf(small_shape(), 1);
  CHECK(error_kind([&] { clf.forward(random_matrix(1, 8, 1), Mode::train); }) == "BatchTooSmall");
  CHECK(error_kind([&] { clf.forward(random_matrix(4, 7, 1), Mode::eval); }) == "WidthMismatch");
  CHECK(error_kind([&] { clf.backward(random_targets(4, 1)); }) == "NoForwardCache");
}

TEST_CASE("Adam's first step moves each parameter by about the learning rate") {
  MlpClassifier clf(small_shape(), 14);
  const Matrix x = random_matrix(16, 8, 15);
  clf.forward(x, Mode::train);
  const auto g = clf.backward(random_targets(16, 16));
  const ParameterSet before = clf.parameters();
  AdamOptimizer adam(clf.parameters(), {});
  adam.step(clf.parameters(), g.grads);
  const Matrix delta = clf.parameters().tensors[0] - before.tensors[0];
  const Matrix& grad = g.grads.tensors[0];
  for (Eigen::Index i = 0; i < delta.size(); ++i) {
    const double gi = grad.data()[i];
    REQUIRE(delta.data()[i] == doctest::Approx(-1e-3 * gi / (std::abs(gi) + 1e-8)).epsilon(1e-9));
  }
  CHECK(adam.steps() == 1);
}

TEST_CASE("training lowers the loss on a learnable problem") {
  MlpClassifier clf(small_shape(), 17);
  const Matrix x = random_matrix(64, 8, 18);
  Matrix y = Matrix::Zero(64, 4);
  for (Eigen::Index r = 0; r < 64; ++r) y(r, x(r, 0) > 0 ? 0 : 3) = 1.0;
  AdamOptimizer adam(clf.parameters(), {1e-2, 0.9, 0.999, 1e-8});
  const double initial = clf.loss(x, y);
  for (int step = 0; step < 200; ++step) {
    clf.forward(x, Mode::train);
    adam.step(clf.parameters(), clf.backward(y).grads);
  }
  CHECK(clf.loss(x, y) < 0.5 * initial);
}

}
