#include "mdood/detector.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mdood/parallel.hpp"

namespace mdood {

namespace {

void check_contamination(double contamination) {
  if (!(contamination > 0.0 && contamination < 0.5)) {
    throw Error(ErrorCode::BadContamination,
                "contamination must lie in (0, 0.5), got " + std::to_string(contamination));
  }
}

// Distance from `query` to the k-th nearest row of `stored`.
double kth_distance(const FeatureMatrix& stored, const Eigen::Ref<const Vector<double>>& query,
                    int k, std::vector<double>& scratch) {
  const Eigen::Index n = stored.rows();
  scratch.resize(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    scratch[static_cast<std::size_t>(j)] = (stored.row(j).transpose() - query).squaredNorm();
  }
  auto kth = scratch.begin() + (k - 1);
  std::nth_element(scratch.begin(), kth, scratch.end());
  return std::sqrt(*kth);
}

}  // namespace

KnnModel fit_knn(const FeatureMatrix& features, int k_neighbors, double contamination,
                 int threads) {
  check_contamination(contamination);
  if (k_neighbors < 1 || features.rows() < k_neighbors) {
    throw Error(ErrorCode::InsufficientSamples,
                "k_neighbors=" + std::to_string(k_neighbors) + " needs at least that many rows, got " +
                    std::to_string(features.rows()));
  }
  if (!features.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "feature matrix contains NaN or Inf");
  }

  KnnModel model;
  model.train_features = features;
  model.k_neighbors = k_neighbors;
  model.contamination = contamination;
  const Vector<double> self_scores = knn_scores(model, features, threads);
  model.delta = calibrate_threshold(self_scores, contamination);
  return model;
}

double knn_score(const KnnModel& model, const Eigen::Ref<const Vector<double>>& f) {
  if (f.size() != model.train_features.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "feature has " + std::to_string(f.size()) + " entries, model expects " +
                    std::to_string(model.train_features.cols()));
  }
  std::vector<double> scratch;
  return kth_distance(model.train_features, f, model.k_neighbors, scratch);
}

Vector<double> knn_scores(const KnnModel& model, const FeatureMatrix& queries, int threads) {
  if (queries.cols() != model.train_features.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "features have " + std::to_string(queries.cols()) + " columns, model expects " +
                    std::to_string(model.train_features.cols()));
  }
  Vector<double> scores(queries.rows());
  parallel_for(static_cast<std::size_t>(queries.rows()), threads, [&](std::size_t i) {
    thread_local std::vector<double> scratch;
    const auto row = static_cast<Eigen::Index>(i);
    scores(row) = kth_distance(model.train_features, queries.row(row).transpose(),
                               model.k_neighbors, scratch);
  });
  return scores;
}

double calibrate_threshold(const Eigen::Ref<const Vector<double>>& scores, double contamination) {
  check_contamination(contamination);
  const auto n = scores.size();
  if (n < 1) {
    throw Error(ErrorCode::EmptyInput, "no scores to calibrate against");
  }
  std::vector<double> sorted(scores.data(), scores.data() + n);
  std::sort(sorted.begin(), sorted.end());

  // The slack keeps products like 0.99 * 100 from rounding up a rank.
  const double exact = (1.0 - contamination) * static_cast<double>(n);
  auto rank = static_cast<Eigen::Index>(std::ceil(exact - 1e-9));
  rank = std::clamp<Eigen::Index>(rank, 1, n);
  return sorted[static_cast<std::size_t>(rank - 1)];
}

}  // namespace mdood
