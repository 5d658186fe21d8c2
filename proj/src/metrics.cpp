#include "cfh/metrics.hpp"

namespace cfh {

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const std::size_t c : counts) n += c;
  return n;
}

std::size_t ConfusionMatrix::row_sum(std::size_t label) const {
  std::size_t n = 0;
  for (std::size_t j = 0; j < num_labels; ++j) n += at(label, j);
  return n;
}

std::size_t ConfusionMatrix::col_sum(std::size_t label) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < num_labels; ++i) n += at(i, label);
  return n;
}

MetricTriplet compute_metrics(const ConfusionMatrix& cm, std::optional<std::size_t> walking_label) {
  const std::size_t n = cm.total();
  if (n == 0) throw Error("compute_metrics: empty confusion matrix");
  MetricTriplet m;

  std::size_t correct = 0;
  for (std::size_t i = 0; i < cm.num_labels; ++i) correct += cm.at(i, i);
  m.accuracy = static_cast<double>(correct) / static_cast<double>(n);

  double f1_sum = 0.0;
  for (std::size_t i = 0; i < cm.num_labels; ++i) {
    const std::size_t tp = cm.at(i, i);
    const std::size_t fn = cm.row_sum(i) - tp;
    const std::size_t fp = cm.col_sum(i) - tp;
    if (tp + fn + fp == 0) {
      m.warnings.push_back("label " + std::to_string(i) +
                           " absent from ground truth and predictions; scored as F1 = 0");
      continue;  // contributes 0 to the sum
    }
    if (tp > 0) {
      f1_sum += 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    }
  }
  m.macro_f1 = f1_sum / static_cast<double>(cm.num_labels);

  if (walking_label) {
    const std::size_t support = cm.row_sum(*walking_label);
    if (support > 0) {
      m.walking_recall = static_cast<double>(cm.at(*walking_label, *walking_label)) /
                         static_cast<double>(support);
    }
  }
  return m;
}

}  // namespace cfh
