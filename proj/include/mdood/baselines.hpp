#ifndef MDOOD_BASELINES_HPP
#define MDOOD_BASELINES_HPP

#include <cstdint>
#include <optional>

#include "mdood/embedding_io.hpp"
#include "mdood/linalg.hpp"

// Single-layer comparison scores. All are oriented so that higher means more
// out-of-distribution, and none applies tanh.

namespace mdood {

/**
 * @brief Class-conditional Gaussians with one tied covariance, plus an
 * optional class-agnostic background Gaussian for the relative variant.
 */
struct MdModel {
  std::uint32_t layer = 0;
  Matrix<double> class_means;  ///< d x M, one column per class
  Matrix<double> shared_chol;  ///< lower factor of the pooled covariance
  double applied_ridge = 0;
  std::optional<GaussianFit<double>> background;

  Eigen::Index num_classes() const { return class_means.cols(); }
  Eigen::Index dim() const { return class_means.rows(); }
};

/// Fits on `layer` (default: the last one). Class count comes from the
/// logits when present, otherwise from the largest label.
MdModel fit_md(const EmbeddingSet& train, std::optional<std::uint32_t> layer = std::nullopt,
               double ridge0 = kDefaultRidge0, bool with_background = true);

/// Smallest squared distance to a class mean under the shared covariance.
double md_score(const MdModel& model, const Eigen::Ref<const Vector<double>>& e);

/// `md_score` minus the squared distance under the background Gaussian.
double rmd_score(const MdModel& model, const Eigen::Ref<const Vector<double>>& e);

/// Negated largest softmax probability.
double max_softmax_score(const Eigen::Ref<const Vector<double>>& logits);

Vector<double> md_scores(const MdModel& model, const EmbeddingSet& set);
Vector<double> rmd_scores(const MdModel& model, const EmbeddingSet& set);
Vector<double> max_softmax_scores(const EmbeddingSet& set);

}  // namespace mdood

#endif  // MDOOD_BASELINES_HPP
