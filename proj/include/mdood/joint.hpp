#ifndef MDOOD_JOINT_HPP
#define MDOOD_JOINT_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "mdood/model.hpp"

namespace mdood {

/**
 * @brief Classify-or-reject outcome for one utterance.
 *
 * Labels are 0-based: `0 .. M-1` are the known classes and `M` is the reject
 * class.
 */
struct JointPrediction {
  std::int32_t label = 0;
  double rejection_score = 0;
  std::optional<Vector<double>> class_scores;
};

/// Index of the largest logit; ties go to the lowest index.
std::int32_t argmax_label(const Eigen::Ref<const Vector<double>>& logits);

/// Known-class argmax when `g <= delta`, otherwise the reject label `M`.
JointPrediction decide(const Eigen::Ref<const Vector<double>>& logits, double g, double delta);

/**
 * @brief Featurize, score and decide every utterance of `set`.
 *
 * `delta_override` replaces the calibrated threshold stored in the model.
 * Output order matches row order.
 */
std::vector<JointPrediction> decide_batch(const EmbeddingSet& set, const ModelArtifact& model,
                                          std::optional<double> delta_override = std::nullopt,
                                          int threads = 1);

}  // namespace mdood

#endif  // MDOOD_JOINT_HPP
