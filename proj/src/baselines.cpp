#include "mdood/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mdood {

MdModel fit_md(const EmbeddingSet& train, std::optional<std::uint32_t> layer, double ridge0,
               bool with_background) {
  validate(train);
  if (!train.labels) {
    throw Error(ErrorCode::MissingLabels, "class-conditional fit needs labels");
  }
  const auto& labels = *train.labels;
  std::int32_t max_label = -1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kUnknownLabel) {
      throw Error(ErrorCode::OodInTrainingSet,
                  "training row " + std::to_string(i) + " is labeled unknown");
    }
    max_label = std::max(max_label, labels[i]);
  }
  const auto num_classes =
      train.logits ? static_cast<Eigen::Index>(train.num_classes()) : Eigen::Index{max_label} + 1;
  if (num_classes < 2) {
    throw Error(ErrorCode::ClassTooSmall, "need at least two classes");
  }

  MdModel model;
  model.layer = layer.value_or(train.k_layers - 1);
  if (model.layer >= train.k_layers) {
    throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(model.layer) +
                                                  " out of range for K=" +
                                                  std::to_string(train.k_layers));
  }
  const Matrix<double> X = train.layer_block(model.layer).cast<double>();
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();

  std::vector<Eigen::Index> counts(static_cast<std::size_t>(num_classes), 0);
  model.class_means = Matrix<double>::Zero(d, num_classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = labels[static_cast<std::size_t>(i)];
    model.class_means.col(c) += X.row(i).transpose();
    ++counts[static_cast<std::size_t>(c)];
  }
  for (Eigen::Index c = 0; c < num_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] < 2) {
      throw Error(ErrorCode::ClassTooSmall,
                  "class " + std::to_string(c) + " has fewer than two training rows");
    }
    model.class_means.col(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }

  Matrix<double> centered(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    centered.row(i) = X.row(i) - model.class_means.col(labels[static_cast<std::size_t>(i)]).transpose();
  }
  Matrix<double> lower = Matrix<double>::Zero(d, d);
  lower.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  Matrix<double> pooled = lower.selfadjointView<Eigen::Lower>();
  pooled /= static_cast<double>(n - num_classes);

  auto factor = cholesky_spd(pooled, ridge0);
  model.shared_chol = std::move(factor.chol_lower);
  model.applied_ridge = factor.applied_ridge;
  if (with_background) {
    model.background = fit_gaussian(X, 1.0, ridge0);
  }
  return model;
}

double md_score(const MdModel& model, const Eigen::Ref<const Vector<double>>& e) {
  if (e.size() != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "vector has " + std::to_string(e.size()) + " dims, model has " +
                    std::to_string(model.dim()));
  }
  double best = std::numeric_limits<double>::infinity();
  const auto L = model.shared_chol.triangularView<Eigen::Lower>();
  for (Eigen::Index c = 0; c < model.num_classes(); ++c) {
    Vector<double> z = e - model.class_means.col(c);
    L.solveInPlace(z);
    best = std::min(best, z.squaredNorm());
  }
  return best;
}

double rmd_score(const MdModel& model, const Eigen::Ref<const Vector<double>>& e) {
  if (!model.background) {
    throw Error(ErrorCode::MissingBackground, "relative score needs a background fit");
  }
  // The background term does not depend on the class, so the minimum over
  // classes of the difference is the class minimum minus that term.
  return md_score(model, e) - maha_sq(*model.background, e);
}

double max_softmax_score(const Eigen::Ref<const Vector<double>>& logits) {
  if (logits.size() < 2) {
    throw Error(ErrorCode::EmptyLogits, "softmax needs at least two logits");
  }
  const double top = logits.maxCoeff();
  const double denom = (logits.array() - top).exp().sum();
  return -1.0 / denom;
}

Vector<double> md_scores(const MdModel& model, const EmbeddingSet& set) {
  if (model.layer >= set.k_layers || set.dim != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "data shape does not match the fitted baseline");
  }
  Vector<double> out(set.embeddings.rows());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = md_score(model, set.layer(i, model.layer).transpose().cast<double>());
  }
  return out;
}

Vector<double> rmd_scores(const MdModel& model, const EmbeddingSet& set) {
  if (model.layer >= set.k_layers || set.dim != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "data shape does not match the fitted baseline");
  }
  Vector<double> out(set.embeddings.rows());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = rmd_score(model, set.layer(i, model.layer).transpose().cast<double>());
  }
  return out;
}

Vector<double> max_softmax_scores(const EmbeddingSet& set) {
  if (!set.logits) {
    throw Error(ErrorCode::MissingLogits, "max-softmax score needs classifier logits");
  }
  Vector<double> out(set.logits->rows());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = max_softmax_score(set.logits->row(i).transpose().cast<double>());
  }
  return out;
}

}  // namespace mdood
