#include "reviewnet/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "reviewnet/analytics.hpp"

namespace reviewnet {

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 int classes) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("confusion_matrix: label and prediction counts differ");
  if (classes < 1) throw std::invalid_argument("confusion_matrix: need at least one class");
  ConfusionMatrix m(static_cast<std::size_t>(classes),
                    std::vector<std::size_t>(static_cast<std::size_t>(classes), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= classes || predicted[i] < 0 || predicted[i] >= classes)
      throw std::out_of_range("confusion_matrix: class index out of range at example " +
                              std::to_string(i));
    ++m[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  return m;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

double support_weighted_mean(std::span<const std::pair<double, std::size_t>> values) {
  double num = 0.0;
  std::size_t den = 0;
  for (const auto& [v, n] : values) {
    num += v * static_cast<double>(n);
    den += n;
  }
  return den ? num / static_cast<double>(den) : 0.0;
}

ClassificationReport precision_recall_f1(const ConfusionMatrix& m) {
  const std::size_t k = m.size();
  for (const auto& row : m)
    if (row.size() != k)
      throw std::invalid_argument("precision_recall_f1: confusion matrix must be square");

  ClassificationReport r;
  std::vector<std::pair<double, std::size_t>> p, rc, f;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t tp = m[c][c];
    const std::size_t row = std::accumulate(m[c].begin(), m[c].end(), std::size_t{0});
    std::size_t col = 0;
    for (std::size_t i = 0; i < k; ++i) col += m[i][c];

    ClassMetrics cm;
    cm.support = row;
    cm.precision_undefined = col == 0;
    cm.recall_undefined = row == 0;
    cm.precision = col ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    cm.recall = row ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    cm.f1_undefined = cm.precision + cm.recall == 0.0;
    cm.f1 = f1_score(cm.precision, cm.recall);
    p.emplace_back(cm.precision, row);
    rc.emplace_back(cm.recall, row);
    f.emplace_back(cm.f1, row);
    r.per_class.push_back(cm);
    r.weighted.support += row;
  }
  r.weighted.precision = support_weighted_mean(p);
  r.weighted.recall = support_weighted_mean(rc);
  r.weighted.f1 = support_weighted_mean(f);
  return r;
}

RocCurve roc_auc(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size())
    throw std::invalid_argument("roc_auc: label and score counts differ");
  std::size_t pos = 0, neg = 0;
  for (int l : labels) {
    if (l == 1) ++pos;
    else if (l == 0) ++neg;
    else throw std::invalid_argument("roc_auc: labels must be 0 or 1");
  }
  if (pos == 0 || neg == 0)
    throw std::invalid_argument("roc_auc: need at least one positive and one negative example");

  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0;
  double area = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    const std::size_t tp0 = tp, fp0 = fp;
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      if (labels[order[i]] == 1) ++tp;
      else ++fp;
    }
    area += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0) / 2.0;
    roc.points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos));
  }
  roc.auc = area / (static_cast<double>(pos) * static_cast<double>(neg));
  return roc;
}

MetricsReport make_report(std::span<const int> truth, std::span<const int> predicted,
                          std::vector<std::string> class_names) {
  MetricsReport rep;
  const int k = static_cast<int>(class_names.size());
  rep.class_names = std::move(class_names);
  rep.confusion = confusion_matrix(truth, predicted, k);
  rep.classes = precision_recall_f1(rep.confusion);
  rep.total = truth.size();
  std::size_t trace = 0;
  for (int c = 0; c < k; ++c) trace += rep.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
  rep.accuracy = rep.total ? static_cast<double>(trace) / static_cast<double>(rep.total) : 0.0;
  return rep;
}

MetricsReport majority_baseline(std::span<const int> train_labels,
                                std::span<const int> eval_labels,
                                std::vector<std::string> class_names) {
  if (train_labels.empty() || eval_labels.empty())
    throw std::invalid_argument("majority_baseline: empty split");
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (int l : train_labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= counts.size())
      throw std::out_of_range("majority_baseline: label out of range");
    ++counts[static_cast<std::size_t>(l)];
  }
  const int mode = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  const std::vector<int> predicted(eval_labels.size(), mode);
  return make_report(eval_labels, predicted, std::move(class_names));
}

nlohmann::ordered_json to_json(const MetricsReport& r) {
  using nlohmann::ordered_json;
  auto metrics_json = [](const ClassMetrics& m) {
    ordered_json j;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["support"] = m.support;
    ordered_json flags = ordered_json::array();
    if (m.precision_undefined) flags.push_back("precision_undefined");
    if (m.recall_undefined) flags.push_back("recall_undefined");
    if (m.f1_undefined) flags.push_back("f1_undefined");
    j["flags"] = flags;
    return j;
  };
  ordered_json j;
  j["total"] = r.total;
  j["accuracy"] = r.accuracy;
  j["mean_loss"] = r.mean_loss ? ordered_json(*r.mean_loss) : ordered_json(nullptr);
  ordered_json classes = ordered_json::array();
  for (std::size_t c = 0; c < r.classes.per_class.size(); ++c) {
    auto cj = metrics_json(r.classes.per_class[c]);
    cj["class"] = r.class_names[c];
    classes.push_back(cj);
  }
  j["classes"] = classes;
  j["weighted_average"] = metrics_json(r.classes.weighted);
  j["confusion_matrix"] = r.confusion;
  if (r.roc) {
    j["roc_auc"] = r.roc->auc;
    ordered_json pts = ordered_json::array();
    for (const auto& [x, y] : r.roc->points) pts.push_back({x, y});
    j["roc_points"] = pts;
  }
  return j;
}

void write_confusion_csv(std::ostream& out, const MetricsReport& r) {
  out << "true\\predicted";
  for (const auto& n : r.class_names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    out << r.class_names[i];
    for (auto v : r.confusion[i]) out << ',' << v;
    out << '\n';
  }
}

void write_roc_csv(std::ostream& out, const RocCurve& roc) {
  out << "fpr,tpr\n";
  for (const auto& [x, y] : roc.points)
    out << analytics::format_number(x) << ',' << analytics::format_number(y) << '\n';
}

}  // namespace reviewnet
