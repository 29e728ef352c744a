#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace reviewnet {

/// counts[true][predicted]
using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 int classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  // Set when the corresponding denominator was zero and the value was
  // reported as 0 instead of NaN.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct ClassificationReport {
  std::vector<ClassMetrics> per_class;
  ClassMetrics weighted;  // support-weighted means; support = total
};

/// 2PR / (P + R), 0 when P + R == 0.
double f1_score(double precision, double recall);

/// Σ value_i·support_i / Σ support_i.
double support_weighted_mean(std::span<const std::pair<double, std::size_t>> values);

/// precision_c = M[c][c]/colsum_c, recall_c = M[c][c]/rowsum_c. Throws
/// std::invalid_argument for non-square input.
ClassificationReport precision_recall_f1(const ConfusionMatrix& m);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), (0,0) .. (1,1)
  double auc = 0.0;
};

/// Threshold sweep from the highest score down, one step per distinct score;
/// trapezoidal area. Needs at least one positive and one negative label.
RocCurve roc_auc(std::span<const int> labels, std::span<const double> scores);

struct MetricsReport {
  std::vector<std::string> class_names;
  ClassificationReport classes;
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  std::optional<double> mean_loss;
  std::size_t total = 0;
  std::optional<RocCurve> roc;
};

/// Builds the report from labels and argmax predictions.
MetricsReport make_report(std::span<const int> truth, std::span<const int> predicted,
                          std::vector<std::string> class_names);

/// Predicts the training split's most frequent class (lowest index on ties)
/// for every evaluation example.
MetricsReport majority_baseline(std::span<const int> train_labels,
                                std::span<const int> eval_labels,
                                std::vector<std::string> class_names);

nlohmann::ordered_json to_json(const MetricsReport& report);

void write_confusion_csv(std::ostream& out, const MetricsReport& report);
void write_roc_csv(std::ostream& out, const RocCurve& roc);

}  // namespace reviewnet
