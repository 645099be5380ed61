#ifndef MDOOD_FEATURIZER_HPP
#define MDOOD_FEATURIZER_HPP

#include <cstdint>
#include <vector>

#include "mdood/embedding_io.hpp"
#include "mdood/linalg.hpp"

namespace mdood {

/// One row per utterance, one column per layer.
using FeatureMatrix = RowMatrix<double>;

/// Element-wise hyperbolic tangent.
template <typename Derived>
auto tanh_transform(const Eigen::MatrixBase<Derived>& e) {
  return e.array().tanh().matrix();
}

struct FeaturizerConfig {
  bool tanh = true;
  bool calibrate_w = true;
  double ridge0 = kDefaultRidge0;
  int threads = 1;
};

/**
 * @brief Per-layer Gaussian statistics of the training embeddings.
 *
 * `per_layer[k].chol_lower` is the factor of the scaled covariance
 * `Sigma_raw / w[k]`, so `maha_sq(per_layer[k], h)` already equals
 * `w[k] * raw` and no separate multiply happens at scoring time.
 */
struct LayerStatsModel {
  std::uint32_t k_layers = 0;
  std::uint32_t dim = 0;
  bool tanh_enabled = true;
  std::vector<GaussianFit<double>> per_layer;
  Vector<double> w;

  bool operator==(const LayerStatsModel& other) const {
    return k_layers == other.k_layers && dim == other.dim && tanh_enabled == other.tanh_enabled &&
           per_layer == other.per_layer && same_values(w, other.w);
  }
};

/**
 * @brief Fits mean and covariance per layer on in-distribution training data.
 *
 * With `calibrate_w` the layer scale is `1 / mean(raw training scores)`,
 * which puts every layer's training scores at unit mean before they are
 * combined into one feature vector. Rows labeled unknown are rejected.
 */
LayerStatsModel fit_layer_stats(const EmbeddingSet& train, const FeaturizerConfig& config = {});

/// Squared, layer-scaled Mahalanobis score of every utterance at every layer.
FeatureMatrix featurize(const LayerStatsModel& model, const EmbeddingSet& set, int threads = 1);

}  // namespace mdood

#endif  // MDOOD_FEATURIZER_HPP
