#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfh/metrics.hpp"

namespace cfh {

struct Fingerprint {
  std::string scheme;
  std::string architecture;
  std::string fusion;
  std::uint64_t seed = 0;

  std::string column_key() const { return architecture + "/" + fusion; }
  bool operator==(const Fingerprint&) const = default;
};

struct FoldMetrics {
  std::string test_session;
  MetricTriplet metrics;
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample stddev (n-1)
};

/// Per-fold metric triplets plus their mean and sample standard deviation.
struct ExperimentReport {
  Fingerprint fingerprint;
  std::vector<FoldMetrics> per_fold;
  MeanStd accuracy;
  MeanStd macro_f1;
  std::optional<MeanStd> walking_recall;  // absent when any fold lacks it

  nlohmann::json to_json() const;
  static ExperimentReport from_json(const nlohmann::json& doc);
};

MeanStd mean_std(const std::vector<double>& values);  // requires >= 2 values

/// Fills in the aggregate fields from per_fold.
ExperimentReport aggregate(const Fingerprint& fingerprint, const std::vector<FoldMetrics>& folds);

/// "62.70 ± 2.66": percent with two decimals.
std::string format_percent(const MeanStd& ms);

/// Text table over one or more reports: rows grouped by scheme with one
/// line per metric, columns keyed by architecture/fusion.
std::string render_report_table(const std::vector<ExperimentReport>& reports);

/// Side-by-side comparison; all reports must share a scheme and carry
/// pairwise-distinct fingerprints.
std::string render_comparison(const std::vector<ExperimentReport>& reports);

}  // namespace cfh
