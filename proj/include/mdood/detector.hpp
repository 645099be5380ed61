#ifndef MDOOD_DETECTOR_HPP
#define MDOOD_DETECTOR_HPP

#include "mdood/featurizer.hpp"

namespace mdood {

inline constexpr int kDefaultNeighbors = 5;
inline constexpr double kDefaultContamination = 0.01;

/**
 * @brief Exact k-nearest-neighbor outlier detector over feature vectors.
 *
 * The rejection score of a query is its Euclidean distance to the
 * `k_neighbors`-th nearest stored training row. `delta` is the upper
 * `contamination` quantile of the training rows' own scores.
 */
struct KnnModel {
  FeatureMatrix train_features;
  int k_neighbors = kDefaultNeighbors;
  double contamination = kDefaultContamination;
  double delta = 0;

  bool operator==(const KnnModel& other) const {
    return same_values(train_features, other.train_features) && k_neighbors == other.k_neighbors &&
           contamination == other.contamination && delta == other.delta;
  }
};

/// Stores `features` and calibrates `delta` from their self-scores
/// (a training row counts as its own neighbor).
KnnModel fit_knn(const FeatureMatrix& features, int k_neighbors = kDefaultNeighbors,
                 double contamination = kDefaultContamination, int threads = 1);

double knn_score(const KnnModel& model, const Eigen::Ref<const Vector<double>>& f);

Vector<double> knn_scores(const KnnModel& model, const FeatureMatrix& queries, int threads = 1);

/// Nearest-rank upper quantile: the `ceil((1 - contamination) * n)`-th
/// smallest score.
double calibrate_threshold(const Eigen::Ref<const Vector<double>>& scores, double contamination);

}  // namespace mdood

#endif  // MDOOD_DETECTOR_HPP
