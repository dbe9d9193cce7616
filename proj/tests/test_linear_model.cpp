#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "cascadeforge/linear_model.hpp"
#include "cascadeforge/rng.hpp"

using namespace cascadeforge;

namespace {

FeatureVector fv(std::vector<std::pair<std::uint32_t, double>> entries) {
  FeatureVector v;
  v.entries = std::move(entries);
  return v;
}

struct Instance {
  std::vector<FeatureVector> vectors;
  std::vector<int> labels;
  SampleWeights weights;
  LogisticModel model;
  double l2 = 0.0;
};

Instance random_instance(Rng& rng, std::size_t max_samples, std::size_t max_dim) {
  Instance inst;
  std::size_t n = 2 + rng.below(max_samples - 1);
  std::size_t dim = 1 + rng.below(max_dim);
  inst.model.weights.resize(dim);
  for (double& w : inst.model.weights) w = rng.uniform(-1.0, 1.0);
  inst.model.bias = rng.uniform(-1.0, 1.0);
  inst.l2 = rng.below(2) ? rng.uniform(0.0, 0.5) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector v;
    for (std::uint32_t d = 0; d < dim; ++d) {
      if (rng.below(2)) v.entries.emplace_back(d, rng.uniform(0.1, 2.0));
    }
    inst.vectors.push_back(std::move(v));
    inst.labels.push_back(static_cast<int>(rng.below(2)));
    inst.weights.push_back(rng.uniform(0.0, 3.0));
  }
  return inst;
}

}  // namespace

TEST_CASE("balanced class weights follow n over 2n_c") {
  auto [wp, wn] = balanced_class_weights(std::vector<int>{1, 1, 1, 0});
  CHECK(wp == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(wn == 2.0);

  auto [bp, bn] = balanced_class_weights(std::vector<int>{1, 0});
  CHECK(bp == 1.0);
  CHECK(bn == 1.0);
}

TEST_CASE("balanced class weights satisfy the mass identity") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 2 + rng.below(40);
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.below(2)));
    labels[0] = 1;
    labels[1] = 0;
    auto [wp, wn] = balanced_class_weights(labels);
    double n_pos = 0.0;
    for (int y : labels) n_pos += y;
    double mass = wp * n_pos + wn * (static_cast<double>(n) - n_pos);
    CHECK(mass == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
  }
}

TEST_CASE("balanced class weights need both classes") {
  CHECK_THROWS_AS(balanced_class_weights(std::vector<int>{1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(balanced_class_weights(std::vector<int>{0}), std::invalid_argument);
}

TEST_CASE("loss of the zero model is log 2") {
  LogisticModel zero;
  zero.weights.assign(3, 0.0);
  std::vector<FeatureVector> vecs{fv({{0, 1.0}}), fv({{1, 2.0}, {2, 0.5}}), fv({})};
  std::vector<int> labels{1, 0, 1};
  SampleWeights ones(3, 1.0);
  CHECK(loss(zero, vecs, labels, ones, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("zero sample weights reduce the loss to its l2 term") {
  LogisticModel model;
  model.weights = {3.0, -4.0};
  model.bias = 2.0;  // bias excluded from l2
  std::vector<FeatureVector> vecs{fv({{0, 1.0}}), fv({{1, 1.0}})};
  std::vector<int> labels{1, 0};
  SampleWeights zeros(2, 0.0);
  CHECK(loss(model, vecs, labels, zeros, 0.0) == 0.0);
  CHECK(loss(model, vecs, labels, zeros, 0.2) == doctest::Approx(0.1 * 25.0).epsilon(1e-12));
}

TEST_CASE("single-sample weighted loss matches the hand computation") {
  LogisticModel model;
  model.weights = {std::log(4.0)};  // sigmoid(log 4) = 0.8
  std::vector<FeatureVector> vecs{fv({{0, 1.0}})};
  std::vector<int> labels{1};
  SampleWeights weights{2.0};
  CHECK(loss(model, vecs, labels, weights, 0.0) ==
        doctest::Approx(0.446287).epsilon(1e-5));
}

TEST_CASE("loss validates lengths") {
  LogisticModel model;
  model.weights = {0.0};
  std::vector<FeatureVector> vecs{fv({{0, 1.0}})};
  std::vector<int> labels{1, 0};
  SampleWeights w{1.0};
  CHECK_THROWS_AS(loss(model, vecs, labels, w, 0.0), std::invalid_argument);
}

TEST_CASE("gradient with zero weights collapses to the l2 part") {
  LogisticModel model;
  model.weights = {1.0, -2.0};
  model.bias = 0.5;
  std::vector<FeatureVector> vecs{fv({{0, 1.0}}), fv({{1, 1.0}})};
  std::vector<int> labels{1, 0};
  SampleWeights zeros(2, 0.0);
  LossGradient g0 = gradient(model, vecs, labels, zeros, 0.0);
  CHECK(g0.weights[0] == 0.0);
  CHECK(g0.weights[1] == 0.0);
  CHECK(g0.bias == 0.0);
  LossGradient g = gradient(model, vecs, labels, zeros, 0.3);
  CHECK(g.weights[0] == doctest::Approx(0.3 * 1.0).epsilon(1e-15));
  CHECK(g.weights[1] == doctest::Approx(0.3 * -2.0).epsilon(1e-15));
  CHECK(g.bias == 0.0);
}

TEST_CASE("analytic gradient matches central finite differences") {
  Rng rng(47);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    Instance inst = random_instance(rng, 20, 10);
    LossGradient g = gradient(inst.model, inst.vectors, inst.labels, inst.weights, inst.l2);

    auto check_close = [&](double analytic, double numeric) {
      double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      REQUIRE(std::abs(analytic - numeric) / scale <= 1e-5);
    };

    for (std::size_t d = 0; d < inst.model.dim(); ++d) {
      LogisticModel up = inst.model, down = inst.model;
      up.weights[d] += h;
      down.weights[d] -= h;
      double numeric = (loss(up, inst.vectors, inst.labels, inst.weights, inst.l2) -
                        loss(down, inst.vectors, inst.labels, inst.weights, inst.l2)) /
                       (2.0 * h);
      check_close(g.weights[d], numeric);
    }
    LogisticModel up = inst.model, down = inst.model;
    up.bias += h;
    down.bias -= h;
    double numeric = (loss(up, inst.vectors, inst.labels, inst.weights, inst.l2) -
                      loss(down, inst.vectors, inst.labels, inst.weights, inst.l2)) /
                     (2.0 * h);
    check_close(g.bias, numeric);
  }
}

TEST_CASE("training separates a 2-point problem") {
  std::vector<FeatureVector> vecs{fv({{0, 1.0}}), fv({})};
  std::vector<int> labels{1, 0};
  SampleWeights ones(2, 1.0);
  TrainConfig config;
  config.epochs = 200;
  config.l2 = 0.0;
  LogisticModel m = train(vecs, labels, ones, 1, config);
  CHECK(m.score(vecs[0]) > 0.5);
  CHECK(m.score(vecs[1]) < 0.5);
}

TEST_CASE("doubled weights with halved learning rate trace the same path") {
  Rng rng(53);
  Instance inst = random_instance(rng, 16, 6);
  TrainConfig a;
  a.learning_rate = 0.1;
  a.epochs = 25;
  a.l2 = 0.0;
  a.batch_size = 4;
  a.seed = 9;
  TrainConfig b = a;
  b.learning_rate = 0.05;

  SampleWeights doubled = inst.weights;
  for (double& w : doubled) w *= 2.0;

  std::size_t dim = inst.model.dim();
  LogisticModel ma = train(inst.vectors, inst.labels, inst.weights, dim, a);
  LogisticModel mb = train(inst.vectors, inst.labels, doubled, dim, b);
  REQUIRE(ma.dim() == mb.dim());
  for (std::size_t d = 0; d < dim; ++d) CHECK(ma.weights[d] == mb.weights[d]);
  CHECK(ma.bias == mb.bias);
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
  Rng rng(59);
  Instance inst = random_instance(rng, 20, 8);
  TrainConfig config;
  config.epochs = 10;
  config.seed = 1234;
  std::size_t dim = inst.model.dim();
  LogisticModel a = train(inst.vectors, inst.labels, inst.weights, dim, config);
  LogisticModel b = train(inst.vectors, inst.labels, inst.weights, dim, config);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
}

TEST_CASE("full-batch loss is non-increasing at a small learning rate") {
  Rng rng(61);
  std::vector<FeatureVector> vecs;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    FeatureVector v;
    for (std::uint32_t d = 0; d < 4; ++d) {
      if (rng.below(2)) v.entries.emplace_back(d, rng.uniform(0.2, 1.5));
    }
    vecs.push_back(std::move(v));
    labels.push_back(static_cast<int>(rng.below(2)));
  }
  labels[0] = 1;
  labels[1] = 0;
  SampleWeights ones(20, 1.0);

  TrainConfig config;
  config.learning_rate = 0.01;
  config.epochs = 60;
  config.batch_size = 20;  // single batch per epoch
  config.l2 = 1e-4;
  config.seed = 5;

  std::vector<double> losses;
  train(vecs, labels, ones, 4, config, [&](int, const LogisticModel& m) {
    losses.push_back(loss(m, vecs, labels, ones, config.l2));
  });
  REQUIRE(losses.size() == 60);
  for (std::size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] <= losses[i - 1] + 1e-12);
}

TEST_CASE("l2 shrinks the trained parameter norm") {
  Rng rng(67);
  Instance inst = random_instance(rng, 20, 6);
  std::size_t dim = inst.model.dim();
  SampleWeights ones(inst.vectors.size(), 1.0);
  TrainConfig plain;
  plain.epochs = 40;
  plain.l2 = 0.0;
  plain.seed = 3;
  TrainConfig ridge = plain;
  ridge.l2 = 0.1;

  LogisticModel free = train(inst.vectors, inst.labels, ones, dim, plain);
  LogisticModel shrunk = train(inst.vectors, inst.labels, ones, dim, ridge);

  auto norm = [](const LogisticModel& m) {
    double s = 0.0;
    for (double w : m.weights) s += w * w;
    return s;
  };
  CHECK(norm(shrunk) <= norm(free) + 1e-12);
}

TEST_CASE("divergence is reported with the epoch number") {
  std::vector<FeatureVector> vecs{fv({{0, 1.0}}), fv({{0, 0.5}})};
  std::vector<int> labels{1, 0};
  SampleWeights ones(2, 1.0);
  TrainConfig config;
  config.learning_rate = 2.0;
  config.l2 = 2.0;  // lr*l2 = 4 makes the l2 step expansive
  config.epochs = 2000;
  config.batch_size = 1;
  try {
    train(vecs, labels, ones, 1, config);
    FAIL("expected divergence");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("training validates its inputs") {
  std::vector<FeatureVector> vecs{fv({{0, 1.0}})};
  std::vector<int> labels{1};
  SampleWeights ones(1, 1.0);
  TrainConfig config;
  CHECK_THROWS_AS(train(vecs, labels, ones, 1, config), std::invalid_argument);

  std::vector<FeatureVector> two{fv({{0, 1.0}}), fv({{0, 1.0}})};
  std::vector<int> same{1, 1};
  SampleWeights w2(2, 1.0);
  CHECK_THROWS_AS(train(two, same, w2, 1, config), std::invalid_argument);

  std::vector<int> ok{1, 0};
  SampleWeights negative{1.0, -0.5};
  CHECK_THROWS_AS(train(two, ok, negative, 1, config), std::invalid_argument);

  TrainConfig bad;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = TrainConfig{};
  bad.epochs = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = TrainConfig{};
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = TrainConfig{};
  bad.l2 = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("scores live strictly inside (0,1)") {
  LogisticModel m;
  m.weights = {30.0};
  m.bias = 10.0;
  double high = m.score(fv({{0, 10.0}}));
  CHECK(high > 0.0);
  CHECK(high <= 1.0);
  m.weights = {-30.0};
  double low = m.score(fv({{0, 10.0}}));
  CHECK(low >= 0.0);
  CHECK(low < 1.0);
}

TEST_CASE("score of the zero model is one half, empty input reads the bias") {
  LogisticModel zero;
  zero.weights.assign(4, 0.0);
  CHECK(zero.score(fv({{2, 3.0}})) == 0.5);
  LogisticModel biased;
  biased.weights.assign(2, 0.0);
  biased.bias = 1.0;
  CHECK(biased.score(fv({})) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-15));
}

TEST_CASE("score rejects out-of-range indices") {
  LogisticModel m;
  m.weights = {1.0, 2.0};
  CHECK_THROWS_AS(m.score(fv({{2, 1.0}})), std::out_of_range);
}

TEST_CASE("model save/load round-trips bitwise") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "cf_test_linear_model";
  fs::create_directories(dir);
  fs::path path = dir / "model.txt";

  LogisticModel m;
  m.weights = {0.1, -2.0 / 3.0, 1e-17, 0.0};
  m.bias = -0.125;
  m.save(path.string());
  LogisticModel back = LogisticModel::load(path.string());
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);
  fs::remove_all(dir);
}
