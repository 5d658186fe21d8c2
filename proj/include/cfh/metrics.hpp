#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cfh/errors.hpp"

namespace cfh {

/// Row-major K x K confusion matrix: entry (i, j) counts windows with true
/// label i predicted as j.
struct ConfusionMatrix {
  std::size_t num_labels = 0;
  std::vector<std::size_t> counts;

  explicit ConfusionMatrix(std::size_t k) : num_labels(k), counts(k * k, 0) {}

  std::size_t& at(std::size_t true_label, std::size_t predicted) {
    return counts[true_label * num_labels + predicted];
  }
  std::size_t at(std::size_t true_label, std::size_t predicted) const {
    return counts[true_label * num_labels + predicted];
  }
  std::size_t total() const;
  std::size_t row_sum(std::size_t label) const;
  std::size_t col_sum(std::size_t label) const;
};

struct MetricTriplet {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  // Absent when the scheme lacks a Walking label or the test set has no
  // Walking windows.
  std::optional<double> walking_recall;
  std::vector<std::string> warnings;  // labels scored as F1 = 0
};

/// Accuracy, macro F1 (absent labels count as F1 = 0 with a warning), and
/// Walking-class recall. `walking_label` is the scheme's Walking index, or
/// nullopt when the scheme has no Walking label.
MetricTriplet compute_metrics(const ConfusionMatrix& cm, std::optional<std::size_t> walking_label);

}  // namespace cfh
