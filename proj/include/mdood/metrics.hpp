#ifndef MDOOD_METRICS_HPP
#define MDOOD_METRICS_HPP

#include <cstdint>
#include <optional>
#include <span>

#include "mdood/linalg.hpp"

/**
 * @file metrics.hpp
 *
 * @brief Threshold-free detection metrics and closed-set classification
 * quality.
 *
 * Scores are oriented so that larger means "more out-of-distribution", and
 * `is_ood` marks the ground-truth unknown rows. All detection metrics depend
 * on the scores only through their ordering.
 */

namespace mdood {

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

enum class Positive { In, Out };

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  bool operator==(const ConfusionCounts&) const = default;
};

struct EerResult {
  double eer = 0;
  double threshold = 0;
  ConfusionCounts counts;  ///< unknown rows are the positive class
};

struct ClosedSetScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct EvalReport {
  double auroc = 0;
  double aupr_in = 0;
  double aupr_out = 0;
  double eer = 0;
  double eer_threshold = 0;
  std::optional<double> closed_precision;
  std::optional<double> closed_recall;
  std::optional<double> closed_f1;
  ConfusionCounts counts;
  std::int64_t n_test = 0;
};

/// Mann-Whitney estimate of P(score_ood > score_id), ties counted one half.
double auroc(const Eigen::Ref<const Vector<double>>& scores, const Mask& is_ood);

/**
 * @brief Average precision with tied scores forming a single cut point.
 *
 * With `Positive::In` the known rows are the positive class and the score
 * order is reversed.
 */
double aupr(const Eigen::Ref<const Vector<double>>& scores, const Mask& is_ood, Positive positive);

/**
 * @brief Equal error rate on the discrete threshold sweep.
 *
 * A row is flagged unknown when its score is strictly above the threshold.
 * Every distinct score is tried; the one minimizing |FPR - FNR| wins, then
 * the lower error count, then the lower threshold. The returned rate is
 * `(FP + FN) / n` at that threshold.
 */
EerResult eer(const Eigen::Ref<const Vector<double>>& scores, const Mask& is_ood);

/// Macro-averaged precision, recall and F1 over `num_classes` classes, with
/// 0/0 taken as 0. F1 is the mean of per-class F1 values.
ClosedSetScores closed_set_prf(std::span<const std::int32_t> pred,
                               std::span<const std::int32_t> truth, int num_classes);

/// All of the above in one report. Closed-set fields are filled only when
/// `num_classes > 0`.
EvalReport evaluate(const Eigen::Ref<const Vector<double>>& scores, const Mask& is_ood,
                    std::span<const std::int32_t> pred_known,
                    std::span<const std::int32_t> truth_known, int num_classes);

}  // namespace mdood

#endif  // MDOOD_METRICS_HPP
