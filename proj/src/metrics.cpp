#include "mdood/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <vector>

namespace mdood {

namespace {

struct ClassCounts {
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
};

ClassCounts count_classes(const Eigen::Ref<const Vector<double>>& scores, const Mask& is_ood) {
  if (scores.size() != is_ood.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scores and labels differ in length");
  }
  if (!scores.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "scores contain NaN or Inf");
  }
  ClassCounts c;
  c.positives = is_ood.count();
  c.negatives = is_ood.size() - c.positives;
  return c;
}

void require_both(const ClassCounts& c) {
  if (c.positives == 0 || c.negatives == 0) {
    throw Error(ErrorCode::OneClassOnly, "need both unknown and known rows");
  }
}

std::vector<Eigen::Index> order_by(const Vector<double>& values, bool descending) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (descending) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  } else {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return values(a) < values(b); });
  }
  return idx;
}

}  // namespace

double auroc(const Eigen::Ref<const Vector<double>>& scores, const Mask& is_ood) {
  const auto c = count_classes(scores, is_ood);
  require_both(c);

  const auto idx = order_by(scores, false);
  // Twice the rank sum of the unknown rows, kept integral: a tie group
  // occupying 0-based positions [a, b) has midrank (a + 1 + b) / 2.
  std::int64_t twice_rank_sum = 0;
  std::size_t a = 0;
  while (a < idx.size()) {
    std::size_t b = a + 1;
    while (b < idx.size() && scores(idx[b]) == scores(idx[a])) ++b;
    std::int64_t pos_in_group = 0;
    for (std::size_t i = a; i < b; ++i) pos_in_group += is_ood(idx[i]) ? 1 : 0;
    twice_rank_sum += pos_in_group * static_cast<std::int64_t>(a + 1 + b);
    a = b;
  }
  const std::int64_t twice_u = twice_rank_sum - c.positives * (c.positives + 1);
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(c.positives) * static_cast<double>(c.negatives));
}

double aupr(const Eigen::Ref<const Vector<double>>& scores, const Mask& is_ood, Positive positive) {
  const auto c = count_classes(scores, is_ood);
  const bool out = positive == Positive::Out;
  const Vector<double> oriented = out ? Vector<double>(scores) : Vector<double>(-scores);
  const Mask is_pos = out ? Mask(is_ood) : Mask(!is_ood);
  const std::int64_t total_pos = out ? c.positives : c.negatives;
  if (total_pos == 0) {
    throw Error(ErrorCode::OneClassOnly, "no positive rows under the chosen orientation");
  }
  if (total_pos == is_pos.size()) {
    std::clog << "warning: every row is positive; average precision is trivially 1\n";
  }

  const auto idx = order_by(oriented, true);
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  double prev_recall = 0;
  double ap = 0;
  std::size_t a = 0;
  while (a < idx.size()) {
    std::size_t b = a;
    while (b < idx.size() && oriented(idx[b]) == oriented(idx[a])) {
      (is_pos(idx[b]) ? tp : fp) += 1;
      ++b;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    a = b;
  }
  return ap;
}

EerResult eer(const Eigen::Ref<const Vector<double>>& scores, const Mask& is_ood) {
  const auto c = count_classes(scores, is_ood);
  require_both(c);

  const auto idx = order_by(scores, false);
  // Running counts of rows with score <= the current threshold.
  std::int64_t id_below = 0;
  std::int64_t ood_below = 0;
  EerResult best;
  double best_gap = std::numeric_limits<double>::infinity();
  std::int64_t best_errors = 0;
  std::size_t a = 0;
  while (a < idx.size()) {
    std::size_t b = a;
    while (b < idx.size() && scores(idx[b]) == scores(idx[a])) {
      (is_ood(idx[b]) ? ood_below : id_below) += 1;
      ++b;
    }
    const std::int64_t fp = c.negatives - id_below;
    const std::int64_t fn = ood_below;
    const double fpr = static_cast<double>(fp) / static_cast<double>(c.negatives);
    const double fnr = static_cast<double>(fn) / static_cast<double>(c.positives);
    const double gap = std::abs(fpr - fnr);
    const std::int64_t errors = fp + fn;
    if (gap < best_gap || (gap == best_gap && errors < best_errors)) {
      best_gap = gap;
      best_errors = errors;
      best.threshold = scores(idx[a]);
      best.counts = {c.positives - fn, id_below, fp, fn};
    }
    a = b;
  }
  best.eer = static_cast<double>(best_errors) / static_cast<double>(scores.size());
  return best;
}

ClosedSetScores closed_set_prf(std::span<const std::int32_t> pred,
                               std::span<const std::int32_t> truth, int num_classes) {
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction and truth lengths differ");
  }
  if (num_classes < 1) {
    throw Error(ErrorCode::BadConfig, "need at least one class");
  }
  const auto m = static_cast<std::size_t>(num_classes);
  std::vector<std::int64_t> hit(m, 0), predicted(m, 0), actual(m, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto p = pred[i];
    const auto t = truth[i];
    if (p < 0 || p >= num_classes || t < 0 || t >= num_classes) {
      throw Error(ErrorCode::LabelOutOfRange,
                  "row " + std::to_string(i) + " has a label outside [0, " +
                      std::to_string(num_classes) + ")");
    }
    ++predicted[static_cast<std::size_t>(p)];
    ++actual[static_cast<std::size_t>(t)];
    if (p == t) ++hit[static_cast<std::size_t>(p)];
  }

  auto ratio = [](std::int64_t num, std::int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  ClosedSetScores out;
  for (std::size_t k = 0; k < m; ++k) {
    const double p = ratio(hit[k], predicted[k]);
    const double r = ratio(hit[k], actual[k]);
    out.precision += p;
    out.recall += r;
    out.f1 += (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  out.precision /= static_cast<double>(m);
  out.recall /= static_cast<double>(m);
  out.f1 /= static_cast<double>(m);
  return out;
}

EvalReport evaluate(const Eigen::Ref<const Vector<double>>& scores, const Mask& is_ood,
                    std::span<const std::int32_t> pred_known,
                    std::span<const std::int32_t> truth_known, int num_classes) {
  EvalReport report;
  report.n_test = scores.size();
  report.auroc = auroc(scores, is_ood);
  report.aupr_in = aupr(scores, is_ood, Positive::In);
  report.aupr_out = aupr(scores, is_ood, Positive::Out);
  const auto e = eer(scores, is_ood);
  report.eer = e.eer;
  report.eer_threshold = e.threshold;
  report.counts = e.counts;
  if (num_classes > 0) {
    const auto prf = closed_set_prf(pred_known, truth_known, num_classes);
    report.closed_precision = prf.precision;
    report.closed_recall = prf.recall;
    report.closed_f1 = prf.f1;
  }
  return report;
}

}  // namespace mdood
