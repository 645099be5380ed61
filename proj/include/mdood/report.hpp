#ifndef MDOOD_REPORT_HPP
#define MDOOD_REPORT_HPP

#include <string>
#include <utility>
#include <vector>

#include "mdood/joint.hpp"
#include "mdood/metrics.hpp"

namespace mdood {

/// `value` printed with 9 significant digits (`%.9g`).
std::string format_sig9(double value);

/// JSON object with the EvalReport field names, sorted keys, 9 significant
/// digits, closed-set fields null when absent.
std::string report_to_json(const EvalReport& report);

/// `{"methods": {name: report, ...}}` for a side-by-side comparison.
std::string comparison_to_json(const std::vector<std::pair<std::string, EvalReport>>& rows);

/// Aligned text table: one row per method, columns EER, AUROC, AUPR (IN),
/// AUPR (OUT), four decimals.
std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows);

/// `index,label,rejection_score` rows; the reject class is label `M`.
std::string decisions_to_csv(const std::vector<JointPrediction>& predictions);

/// `index,rejection_score` rows, for data without logits.
std::string scores_to_csv(const Eigen::Ref<const Vector<double>>& scores);

}  // namespace mdood

#endif  // MDOOD_REPORT_HPP
