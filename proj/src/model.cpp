#include "mdood/model.hpp"

namespace mdood {

bool ModelArtifact::operator==(const ModelArtifact& other) const {
  const auto& a = layer_stats;
  const auto& b = other.layer_stats;
  if (a.k_layers != b.k_layers || a.dim != b.dim || a.tanh_enabled != b.tanh_enabled ||
      !same_values(a.w, b.w) || a.per_layer.size() != b.per_layer.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.per_layer.size(); ++k) {
    if (!same_values(a.per_layer[k].mean, b.per_layer[k].mean) ||
        !same_values(a.per_layer[k].chol_lower, b.per_layer[k].chol_lower)) {
      return false;
    }
  }
  return knn == other.knn && ridge0 == other.ridge0 && version == other.version;
}

ModelArtifact fit_model(const EmbeddingSet& train, const FitConfig& config) {
  ModelArtifact model;
  model.ridge0 = config.featurizer.ridge0;
  model.layer_stats = fit_layer_stats(train, config.featurizer);
  const FeatureMatrix features = featurize(model.layer_stats, train, config.featurizer.threads);
  model.knn = fit_knn(features, config.k_neighbors, config.contamination, config.featurizer.threads);
  return model;
}

Vector<double> rejection_scores(const ModelArtifact& model, const EmbeddingSet& set, int threads) {
  return knn_scores(model.knn, featurize(model.layer_stats, set, threads), threads);
}

}  // namespace mdood
