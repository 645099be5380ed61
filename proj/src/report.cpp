#include "mdood/report.hpp"

#include <cstdio>
#include <cstdlib>

#include <json.hpp>

namespace mdood {

namespace {

// nlohmann prints the shortest round-trip form, so a value that came from
// "%.9g" is printed back with at most nine digits.
nlohmann::json sig9(double value) { return std::strtod(format_sig9(value).c_str(), nullptr); }

nlohmann::json sig9(const std::optional<double>& value) {
  return value ? sig9(*value) : nlohmann::json(nullptr);
}

nlohmann::json report_object(const EvalReport& r) {
  return {
      {"auroc", sig9(r.auroc)},
      {"aupr_in", sig9(r.aupr_in)},
      {"aupr_out", sig9(r.aupr_out)},
      {"eer", sig9(r.eer)},
      {"eer_threshold", sig9(r.eer_threshold)},
      {"closed_precision", sig9(r.closed_precision)},
      {"closed_recall", sig9(r.closed_recall)},
      {"closed_f1", sig9(r.closed_f1)},
      {"counts", {{"tp", r.counts.tp}, {"tn", r.counts.tn}, {"fp", r.counts.fp}, {"fn", r.counts.fn}}},
      {"n_test", r.n_test},
  };
}

}  // namespace

std::string format_sig9(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

std::string report_to_json(const EvalReport& report) {
  return report_object(report).dump(2) + "\n";
}

std::string comparison_to_json(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  nlohmann::json methods = nlohmann::json::object();
  for (const auto& [name, report] : rows) methods[name] = report_object(report);
  return nlohmann::json{{"methods", methods}}.dump(2) + "\n";
}

std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::size_t width = 7;
  for (const auto& row : rows) width = std::max(width, row.first.size());

  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-*s | %8s | %8s | %9s | %10s\n", static_cast<int>(width),
                "Methods", "EER", "AUROC", "AUPR (IN)", "AUPR (OUT)");
  out += buf;
  out += std::string(width, '-') + "-+----------+----------+-----------+-----------\n";
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s | %8.4f | %8.4f | %9.4f | %10.4f\n",
                  static_cast<int>(width), name.c_str(), r.eer, r.auroc, r.aupr_in, r.aupr_out);
    out += buf;
  }
  return out;
}

std::string decisions_to_csv(const std::vector<JointPrediction>& predictions) {
  std::string out = "index,label,rejection_score\n";
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(predictions[i].label) + "," +
           format_sig9(predictions[i].rejection_score) + "\n";
  }
  return out;
}

std::string scores_to_csv(const Eigen::Ref<const Vector<double>>& scores) {
  std::string out = "index,rejection_score\n";
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    out += std::to_string(i) + "," + format_sig9(scores(i)) + "\n";
  }
  return out;
}

}  // namespace mdood
