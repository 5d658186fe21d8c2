#include "cfh/report.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

namespace cfh {

MeanStd mean_std(const std::vector<double>& values) {
  if (values.size() < 2) throw Error("mean_std: need at least 2 values for a sample stddev");
  MeanStd ms;
  for (const double v : values) ms.mean += v;
  ms.mean /= static_cast<double>(values.size());
  double sq = 0.0;
  for (const double v : values) sq += (v - ms.mean) * (v - ms.mean);
  ms.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  return ms;
}

ExperimentReport aggregate(const Fingerprint& fingerprint, const std::vector<FoldMetrics>& folds) {
  if (folds.size() < 2) throw Error("aggregate: need at least 2 folds");
  ExperimentReport report;
  report.fingerprint = fingerprint;
  report.per_fold = folds;
  std::vector<double> acc, f1, wr;
  bool all_have_walking = true;
  for (const auto& f : folds) {
    acc.push_back(f.metrics.accuracy);
    f1.push_back(f.metrics.macro_f1);
    if (f.metrics.walking_recall) wr.push_back(*f.metrics.walking_recall);
    else all_have_walking = false;
  }
  report.accuracy = mean_std(acc);
  report.macro_f1 = mean_std(f1);
  if (all_have_walking) report.walking_recall = mean_std(wr);
  return report;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : per_fold) {
    nlohmann::json fm = {{"test_session", f.test_session},
                         {"accuracy", f.metrics.accuracy},
                         {"macro_f1", f.metrics.macro_f1}};
    if (f.metrics.walking_recall) fm["walking_recall"] = *f.metrics.walking_recall;
    else fm["walking_recall"] = nullptr;
    folds.push_back(std::move(fm));
  }
  nlohmann::json mean = {{"accuracy", accuracy.mean}, {"macro_f1", macro_f1.mean}};
  nlohmann::json std_ = {{"accuracy", accuracy.stddev}, {"macro_f1", macro_f1.stddev}};
  if (walking_recall) {
    mean["walking_recall"] = walking_recall->mean;
    std_["walking_recall"] = walking_recall->stddev;
  } else {
    mean["walking_recall"] = nullptr;
    std_["walking_recall"] = nullptr;
  }
  return {{"fingerprint",
           {{"scheme", fingerprint.scheme},
            {"architecture", fingerprint.architecture},
            {"fusion", fingerprint.fusion},
            {"seed", fingerprint.seed}}},
          {"per_fold", folds},
          {"mean", mean},
          {"std", std_}};
}

ExperimentReport ExperimentReport::from_json(const nlohmann::json& doc) {
  ExperimentReport report;
  const auto& fp = doc.at("fingerprint");
  report.fingerprint = {fp.at("scheme").get<std::string>(), fp.at("architecture").get<std::string>(),
                        fp.at("fusion").get<std::string>(), fp.at("seed").get<std::uint64_t>()};
  std::vector<FoldMetrics> folds;
  for (const auto& f : doc.at("per_fold")) {
    FoldMetrics fm;
    fm.test_session = f.at("test_session").get<std::string>();
    fm.metrics.accuracy = f.at("accuracy").get<double>();
    fm.metrics.macro_f1 = f.at("macro_f1").get<double>();
    if (!f.at("walking_recall").is_null()) {
      fm.metrics.walking_recall = f.at("walking_recall").get<double>();
    }
    folds.push_back(std::move(fm));
  }
  return aggregate(report.fingerprint, folds);
}

std::string format_percent(const MeanStd& ms) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << ms.mean * 100.0 << " ± " << ms.stddev * 100.0;
  return out.str();
}

namespace {

constexpr int kLabelWidth = 10;
constexpr int kMetricWidth = 16;
constexpr int kCellWidth = 16;

std::string pad(const std::string& s, int width) {
  if (static_cast<int>(s.size()) >= width) return s;
  return s + std::string(width - static_cast<int>(s.size()), ' ');
}

// "±" is two bytes in UTF-8; pad by display width.
std::string pad_cell(const std::string& s, int width) {
  const std::size_t plus_minus = s.find("±") != std::string::npos ? 1 : 0;
  const int display = static_cast<int>(s.size()) - static_cast<int>(plus_minus);
  if (display >= width) return s;
  return s + std::string(width - display, ' ');
}

std::string cell_or_dash(const std::optional<MeanStd>& ms) {
  return ms ? format_percent(*ms) : "-";
}

std::string grid(const std::vector<std::string>& columns,
                 const std::function<const ExperimentReport*(const std::string& scheme,
                                                             const std::string& column)>& lookup,
                 const std::vector<std::string>& schemes) {
  std::ostringstream out;
  out << pad("Scheme", kLabelWidth) << pad("Metric", kMetricWidth);
  for (const auto& c : columns) out << pad(c, kCellWidth);
  out << "\n";
  const int rule_width = kLabelWidth + kMetricWidth + kCellWidth * static_cast<int>(columns.size());
  out << std::string(rule_width, '-') << "\n";
  for (const auto& scheme : schemes) {
    const std::vector<std::pair<std::string, int>> metric_rows = {
        {"Accuracy", 0}, {"Macro F1", 1}, {"Walking Acc.", 2}};
    for (const auto& [metric_name, metric_id] : metric_rows) {
      out << pad(metric_id == 0 ? scheme : "", kLabelWidth) << pad(metric_name, kMetricWidth);
      for (const auto& col : columns) {
        const ExperimentReport* r = lookup(scheme, col);
        std::string cell = "-";
        if (r) {
          if (metric_id == 0) cell = format_percent(r->accuracy);
          else if (metric_id == 1) cell = format_percent(r->macro_f1);
          else cell = cell_or_dash(r->walking_recall);
        }
        out << pad_cell(cell, kCellWidth);
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace

std::string render_report_table(const std::vector<ExperimentReport>& reports) {
  if (reports.empty()) throw Error("render_report_table: no reports");
  std::vector<std::string> schemes, columns;
  for (const auto& r : reports) {
    if (std::find(schemes.begin(), schemes.end(), r.fingerprint.scheme) == schemes.end()) {
      schemes.push_back(r.fingerprint.scheme);
    }
    const std::string col = r.fingerprint.column_key();
    if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
  }
  auto lookup = [&](const std::string& scheme, const std::string& col) -> const ExperimentReport* {
    for (const auto& r : reports) {
      if (r.fingerprint.scheme == scheme && r.fingerprint.column_key() == col) return &r;
    }
    return nullptr;
  };
  return grid(columns, lookup, schemes);
}

std::string render_comparison(const std::vector<ExperimentReport>& reports) {
  if (reports.size() < 2) throw Error("render_comparison: need at least 2 reports");
  const std::string scheme = reports.front().fingerprint.scheme;
  for (const auto& r : reports) {
    if (r.fingerprint.scheme != scheme) {
      throw Error("render_comparison: mismatched schemes ('" + scheme + "' vs '" +
                  r.fingerprint.scheme + "')");
    }
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = i + 1; j < reports.size(); ++j) {
      if (reports[i].fingerprint == reports[j].fingerprint) {
        throw Error("render_comparison: duplicate fingerprint '" +
                    reports[i].fingerprint.column_key() + "'");
      }
    }
  }
  return render_report_table(reports);
}

}  // namespace cfh
