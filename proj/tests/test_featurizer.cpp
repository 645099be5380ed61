#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "mdood/featurizer.hpp"

using namespace mdood;

TEST_CASE("tanh_transform") {
  Eigen::Vector3d v(0.0, 1000.0, -0.3);
  const Eigen::Vector3d t = tanh_transform(v);
  CHECK(t(0) == 0.0);
  CHECK(t(1) == 1.0);
  CHECK(t(2) == -std::tanh(0.3));
  CHECK(tanh_transform(-v) == -t);
}

TEST_CASE("calibrated training features average one per layer") {
  std::mt19937_64 rng(1);
  auto train = testing::random_set(rng, 300, 3, 5);
  // Give layers very different scales.
  train.embeddings.middleCols(5, 5) *= 10.f;
  train.embeddings.middleCols(10, 5) *= 0.1f;
  for (bool use_tanh : {false, true}) {
    FeaturizerConfig cfg;
    cfg.tanh = use_tanh;
    const auto model = fit_layer_stats(train, cfg);
    const FeatureMatrix f = featurize(model, train);
    for (Eigen::Index k = 0; k < 3; ++k) {
      CHECK(std::abs(f.col(k).mean() - 1.0) <= 1e-9);
    }
    CHECK((f.array() >= 0).all());
  }
}

TEST_CASE("no calibration keeps unit scales") {
  std::mt19937_64 rng(2);
  const auto train = testing::random_set(rng, 100, 2, 4);
  FeaturizerConfig cfg;
  cfg.calibrate_w = false;
  cfg.tanh = false;
  const auto model = fit_layer_stats(train, cfg);
  CHECK(model.w == Vector<double>::Ones(2));
  const FeatureMatrix f = featurize(model, train);
  // Raw training-mean identity d(n-1)/n.
  CHECK(f.col(0).mean() == doctest::Approx(4.0 * 99 / 100).epsilon(1e-10));
}

TEST_CASE("probe at the mean scores zero") {
  std::mt19937_64 rng(3);
  auto train = testing::random_set(rng, 80, 2, 3);
  train.embeddings *= 0.3f;
  const auto model = fit_layer_stats(train);
  EmbeddingSet probe;
  probe.k_layers = 2;
  probe.dim = 3;
  probe.embeddings.resize(1, 6);
  for (std::uint32_t k = 0; k < 2; ++k) {
    probe.embeddings.row(0).segment(3 * k, 3) =
        model.per_layer[k].mean.array().atanh().matrix().transpose().cast<float>();
  }
  const FeatureMatrix f = featurize(model, probe);
  CHECK(f.maxCoeff() < 1e-8);
}

TEST_CASE("whitened ray scales as t^2 w |u|^2") {
  std::mt19937_64 rng(4);
  const auto train = testing::random_set(rng, 200, 1, 4);
  FeaturizerConfig cfg;
  cfg.tanh = false;
  const auto model = fit_layer_stats(train, cfg);
  const auto& fit = model.per_layer[0];
  const double w = model.w(0);
  const Matrix<double> raw_chol = fit.chol_lower * std::sqrt(w);

  const Vector<double> e1 = Vector<double>::Unit(4, 0);
  for (double t : {0.5, 1.0, 3.0, 7.0}) {
    const Vector<double> u = testing::random_normal(rng, 4, 1);
    EmbeddingSet probe;
    probe.k_layers = 1;
    probe.dim = 4;
    probe.embeddings.resize(2, 4);
    probe.embeddings.row(0) = (fit.mean + t * raw_chol * u).transpose().cast<float>();
    probe.embeddings.row(1) = (fit.mean + 3.0 * raw_chol * e1).transpose().cast<float>();
    const FeatureMatrix f = featurize(model, probe);
    // Float storage of the probe limits the agreement.
    CHECK(f(0, 0) == doctest::Approx(t * t * w * u.squaredNorm()).epsilon(1e-5));
    CHECK(f(1, 0) == doctest::Approx(9.0 * w).epsilon(1e-5));
  }
}

TEST_CASE("featurize is row-wise") {
  std::mt19937_64 rng(5);
  const auto train = testing::random_set(rng, 50, 2, 3);
  const auto test = testing::random_set(rng, 20, 2, 3);
  const auto model = fit_layer_stats(train);
  const FeatureMatrix f = featurize(model, test);

  std::vector<Eigen::Index> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  EmbeddingSet shuffled = test;
  for (Eigen::Index i = 0; i < 20; ++i) shuffled.embeddings.row(i) = test.embeddings.row(perm[i]);
  const FeatureMatrix g = featurize(model, shuffled);
  for (Eigen::Index i = 0; i < 20; ++i) CHECK(g.row(i) == f.row(perm[i]));

  CHECK(featurize(model, test, 4) == f);
}

TEST_CASE("fit is independent of the thread count") {
  std::mt19937_64 rng(6);
  const auto train = testing::random_set(rng, 70, 5, 3);
  FeaturizerConfig one;
  FeaturizerConfig many;
  many.threads = 8;
  CHECK(fit_layer_stats(train, one) == fit_layer_stats(train, many));
}

TEST_CASE("featurizer errors") {
  std::mt19937_64 rng(7);
  auto train = testing::random_set(rng, 10, 2, 3);
  train.labels = std::vector<std::int32_t>{0, 1, 0, 1, 0, -1, 0, 1, 0, 1};
  try {
    fit_layer_stats(train);
    FAIL("expected OodInTrainingSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OodInTrainingSet);
  }

  const auto ok = testing::random_set(rng, 10, 2, 3);
  const auto model = fit_layer_stats(ok);
  const auto other = testing::random_set(rng, 3, 2, 4);
  try {
    featurize(model, other);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}
