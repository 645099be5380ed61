#include "mdood/joint.hpp"

namespace mdood {

std::int32_t argmax_label(const Eigen::Ref<const Vector<double>>& logits) {
  if (logits.size() < 1) {
    throw Error(ErrorCode::EmptyLogits, "no class scores to take the argmax of");
  }
  Eigen::Index best = 0;
  for (Eigen::Index m = 1; m < logits.size(); ++m) {
    if (logits(m) > logits(best)) best = m;
  }
  return static_cast<std::int32_t>(best);
}

JointPrediction decide(const Eigen::Ref<const Vector<double>>& logits, double g, double delta) {
  if (logits.size() < 2) {
    throw Error(ErrorCode::EmptyLogits, "decision needs at least two class scores");
  }
  JointPrediction out;
  out.rejection_score = g;
  out.class_scores = logits;
  out.label = g <= delta ? argmax_label(logits) : static_cast<std::int32_t>(logits.size());
  return out;
}

std::vector<JointPrediction> decide_batch(const EmbeddingSet& set, const ModelArtifact& model,
                                          std::optional<double> delta_override, int threads) {
  if (!set.logits) {
    throw Error(ErrorCode::MissingLogits, "joint decision needs classifier logits");
  }
  const Vector<double> scores = rejection_scores(model, set, threads);
  const double delta = delta_override.value_or(model.knn.delta);

  std::vector<JointPrediction> out;
  out.reserve(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    out.push_back(decide(set.logits->row(i).transpose().cast<double>(), scores(i), delta));
  }
  return out;
}

}  // namespace mdood
