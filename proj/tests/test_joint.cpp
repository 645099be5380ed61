#include <doctest.h>

#include <limits>

#include "helpers.hpp"
#include "mdood/joint.hpp"
#include "mdood/synth.hpp"

using namespace mdood;

namespace {

EmbeddingSet with_logits(std::mt19937_64& rng, Eigen::Index n) {
  auto set = testing::random_set(rng, n, 2, 3);
  set.logits = testing::random_normal(rng, n, 4).cast<float>();
  return set;
}

}  // namespace

TEST_CASE("decide") {
  const Eigen::Vector3d logits(0.1, 2.0, 0.3);
  CHECK(decide(logits, 0.5, 0.7).label == 1);
  CHECK(decide(logits, 0.9, 0.7).label == 3);
  CHECK(decide(logits, 0.7, 0.7).label == 1);
  CHECK(decide(logits, 0.9, 0.7).rejection_score == 0.9);
  CHECK(decide(Eigen::Vector2d(1, 1), 0, 1).label == 0);
  CHECK_THROWS_AS(decide(Eigen::VectorXd::Constant(1, 1.0), 0, 1), Error);
}

TEST_CASE("decide_batch") {
  std::mt19937_64 rng(1);
  const auto train = testing::random_set(rng, 80, 2, 3);
  const auto model = fit_model(train);
  const auto test = with_logits(rng, 30);

  SUBCASE("infinite thresholds") {
    const auto accept = decide_batch(test, model, std::numeric_limits<double>::infinity());
    const auto reject = decide_batch(test, model, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < accept.size(); ++i) {
      CHECK(accept[i].label ==
            argmax_label(test.logits->row(static_cast<Eigen::Index>(i)).transpose().cast<double>()));
      CHECK(reject[i].label == 4);
    }
  }

  SUBCASE("default threshold and scores") {
    const auto out = decide_batch(test, model);
    const Vector<double> g = rejection_scores(model, test);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      CHECK(out[i].rejection_score == g(row));
      CHECK((out[i].label == 4) == (g(row) > model.knn.delta));
    }
  }

  SUBCASE("shifting logits keeps decisions") {
    auto shifted = test;
    shifted.logits->array() += 3.5f;
    const auto a = decide_batch(test, model);
    const auto b = decide_batch(shifted, model);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].label == b[i].label);
  }

  SUBCASE("batch is row-wise") {
    const auto whole = decide_batch(test, model, std::nullopt, 4);
    const auto head = decide_batch(slice_rows(test, 0, 11), model);
    const auto tail = decide_batch(slice_rows(test, 11, 30), model);
    REQUIRE(head.size() + tail.size() == whole.size());
    for (std::size_t i = 0; i < whole.size(); ++i) {
      const auto& part = i < head.size() ? head[i] : tail[i - head.size()];
      CHECK(whole[i].label == part.label);
      CHECK(whole[i].rejection_score == part.rejection_score);
    }
  }

  SUBCASE("missing logits") {
    try {
      decide_batch(train, model);
      FAIL("expected MissingLogits");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingLogits);
    }
  }
}

TEST_CASE("far-shifted unknown rows are mostly rejected") {
  SynthConfig cfg;
  cfg.seed = 2;
  cfg.n_train = 2000;
  cfg.n_test_id = 1000;
  cfg.n_test_ood = 1000;
  const auto data = generate(cfg);
  const auto model = fit_model(data.train);
  const auto out = decide_batch(data.test, model);
  int rejected_unknown = 0;
  for (std::size_t i = 1000; i < out.size(); ++i) rejected_unknown += out[i].label == 4;
  CHECK(rejected_unknown / 1000.0 > 0.9);
}
