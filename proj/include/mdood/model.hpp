#ifndef MDOOD_MODEL_HPP
#define MDOOD_MODEL_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mdood/detector.hpp"
#include "mdood/featurizer.hpp"

namespace mdood {

inline constexpr char kModelMagic[4] = {'M', 'D', 'L', '1'};
inline constexpr std::uint32_t kModelVersion = 1;

struct FitConfig {
  FeaturizerConfig featurizer;
  int k_neighbors = kDefaultNeighbors;
  double contamination = kDefaultContamination;
};

/**
 * @brief Everything needed to score new utterances: per-layer statistics
 * plus the fitted outlier detector.
 *
 * The neighbor count, contamination and tanh flag live in `knn` and
 * `layer_stats`; only the ridge base needs its own slot. Equality compares
 * what the MDL1 file stores, which excludes each layer's applied ridge.
 */
struct ModelArtifact {
  LayerStatsModel layer_stats;
  KnnModel knn;
  double ridge0 = kDefaultRidge0;
  std::uint32_t version = kModelVersion;

  bool operator==(const ModelArtifact& other) const;
};

/// Fits layer statistics on `train`, featurizes it, and fits the detector on
/// those features.
ModelArtifact fit_model(const EmbeddingSet& train, const FitConfig& config = {});

/// Rejection score of every utterance in `set`.
Vector<double> rejection_scores(const ModelArtifact& model, const EmbeddingSet& set,
                                int threads = 1);

std::vector<std::uint8_t> serialize_model(const ModelArtifact& model);
ModelArtifact parse_model(std::span<const std::uint8_t> bytes);

void save_model(const ModelArtifact& model, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

}  // namespace mdood

#endif  // MDOOD_MODEL_HPP
