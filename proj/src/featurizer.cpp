#include "mdood/featurizer.hpp"

#include <cmath>

#include "mdood/parallel.hpp"

namespace mdood {

namespace {

Matrix<double> layer_inputs(const EmbeddingSet& set, std::uint32_t k, bool apply_tanh) {
  Matrix<double> X = set.layer_block(k).cast<double>();
  if (apply_tanh) X = tanh_transform(X);
  return X;
}

}  // namespace

LayerStatsModel fit_layer_stats(const EmbeddingSet& train, const FeaturizerConfig& config) {
  validate(train);
  if (train.n() < 2) {
    throw Error(ErrorCode::InsufficientSamples, "need at least two training utterances");
  }
  if (train.labels) {
    for (std::size_t i = 0; i < train.labels->size(); ++i) {
      if ((*train.labels)[i] == kUnknownLabel) {
        throw Error(ErrorCode::OodInTrainingSet,
                    "training row " + std::to_string(i) + " is labeled unknown");
      }
    }
  }

  LayerStatsModel model;
  model.k_layers = train.k_layers;
  model.dim = train.dim;
  model.tanh_enabled = config.tanh;
  model.per_layer.resize(train.k_layers);
  model.w = Vector<double>::Ones(train.k_layers);

  parallel_for(train.k_layers, config.threads, [&](std::size_t k) {
    const Matrix<double> X = layer_inputs(train, static_cast<std::uint32_t>(k), config.tanh);
    GaussianFit<double> fit = fit_gaussian(X, 1.0, config.ridge0);
    if (config.calibrate_w) {
      const double mean_raw = maha_sq_rows(fit, X).mean();
      if (mean_raw > 0 && std::isfinite(mean_raw)) {
        const double w = 1.0 / mean_raw;
        fit.chol_lower /= std::sqrt(w);
        model.w(static_cast<Eigen::Index>(k)) = w;
      }
    }
    model.per_layer[k] = std::move(fit);
  });
  return model;
}

FeatureMatrix featurize(const LayerStatsModel& model, const EmbeddingSet& set, int threads) {
  if (set.k_layers != model.k_layers || set.dim != model.dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "model expects K=" + std::to_string(model.k_layers) +
                    " d=" + std::to_string(model.dim) + ", data has K=" +
                    std::to_string(set.k_layers) + " d=" + std::to_string(set.dim));
  }
  FeatureMatrix features(set.embeddings.rows(), model.k_layers);
  parallel_for(static_cast<std::size_t>(set.embeddings.rows()), threads, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (std::uint32_t k = 0; k < model.k_layers; ++k) {
      Vector<double> h = set.layer(row, k).transpose().cast<double>();
      if (model.tanh_enabled) h = tanh_transform(h);
      features(row, k) = maha_sq(model.per_layer[k], h);
    }
  });
  return features;
}

}  // namespace mdood
