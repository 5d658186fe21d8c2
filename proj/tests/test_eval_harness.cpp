#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "cfh/folds.hpp"
#include "cfh/metrics.hpp"
#include "cfh/report.hpp"
#include "cfh/train.hpp"

using namespace cfh;

TEST_CASE("LOSO folds over five sessions") {
  const std::vector<std::string> sessions{"S1", "S2", "S3", "S4", "S5"};
  const FoldPlan plan = make_loso_folds(sessions);
  REQUIRE(plan.folds.size() == 5);
  CHECK(plan.folds[0].test_session == "S1");
  CHECK(plan.folds[0].val_session == "S2");
  CHECK(plan.folds[0].train_sessions == std::vector<std::string>{"S3", "S4", "S5"});
  CHECK(plan.folds[4].test_session == "S5");
  CHECK(plan.folds[4].val_session == "S1");
  std::set<std::string> tests;
  for (const auto& fold : plan.folds) {
    CHECK(fold.train_sessions.size() == 3);
    CHECK(fold.val_session != fold.test_session);
    for (const auto& t : fold.train_sessions) {
      CHECK(t != fold.test_session);
      CHECK(t != fold.val_session);
    }
    tests.insert(fold.test_session);
  }
  CHECK(tests == std::set<std::string>(sessions.begin(), sessions.end()));
}

TEST_CASE("LOSO minimal case and rejection") {
  const FoldPlan plan = make_loso_folds({"A", "B", "C"});
  REQUIRE(plan.folds.size() == 3);
  for (const auto& fold : plan.folds) CHECK(fold.train_sessions.size() == 1);
  CHECK_THROWS_AS(make_loso_folds({"A", "B"}), Error);
}

TEST_CASE("metrics: perfect predictions") {
  ConfusionMatrix cm(3);
  cm.at(0, 0) = 5;
  cm.at(1, 1) = 7;
  cm.at(2, 2) = 2;
  const MetricTriplet m = compute_metrics(cm, 0);
  CHECK(m.accuracy == 1.0);
  CHECK(m.macro_f1 == 1.0);
  REQUIRE(m.walking_recall.has_value());
  CHECK(*m.walking_recall == 1.0);
}

TEST_CASE("metrics: worked 2-label example") {
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 8;
  cm.at(0, 1) = 2;
  cm.at(1, 0) = 3;
  cm.at(1, 1) = 7;
  const MetricTriplet m = compute_metrics(cm, 0);
  CHECK(m.accuracy == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.macro_f1 == doctest::Approx(0.7494).epsilon(1e-4 / 0.7494));
  const double f1_walking = 8.0 / (8.0 + 0.5 * (2.0 + 3.0));
  const double f1_non = 7.0 / (7.0 + 0.5 * (3.0 + 2.0));
  CHECK(m.macro_f1 == doctest::Approx((f1_walking + f1_non) / 2.0).epsilon(1e-12));
  REQUIRE(m.walking_recall.has_value());
  CHECK(*m.walking_recall == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("metrics: degenerate one-column predictor") {
  ConfusionMatrix cm(3);
  cm.at(0, 0) = 4;
  cm.at(1, 0) = 3;
  cm.at(2, 0) = 3;
  const MetricTriplet m = compute_metrics(cm, std::nullopt);
  CHECK(m.accuracy == doctest::Approx(0.4));
  // F1(0) = 2*4/(2*4+6+0); labels 1 and 2 score zero.  They do appear in the
  // ground truth, so no "absent from both" warnings are emitted.
  CHECK(m.macro_f1 == doctest::Approx((8.0 / 14.0) / 3.0).epsilon(1e-12));
  CHECK(m.warnings.empty());
  CHECK(!m.walking_recall.has_value());
}

TEST_CASE("metrics: walking recall absent when the test set has no walking windows") {
  ConfusionMatrix cm(2);
  cm.at(1, 1) = 10;
  const MetricTriplet m = compute_metrics(cm, 0);
  CHECK(!m.walking_recall.has_value());
}

TEST_CASE("metric brute-force oracle over random confusion matrices") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t K = 2 + rng() % 6;
    ConfusionMatrix cm(K);
    for (auto& c : cm.counts) c = rng() % 12;
    if (cm.total() == 0) cm.at(0, 0) = 1;
    const std::size_t walking = rng() % K;
    const MetricTriplet m = compute_metrics(cm, walking);

    // Brute-force recomputation.
    double correct = 0.0, total = 0.0;
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j) {
        total += static_cast<double>(cm.at(i, j));
        if (i == j) correct += static_cast<double>(cm.at(i, j));
      }
    CHECK(std::abs(m.accuracy - correct / total) < 1e-12);

    double f1_sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double tp = static_cast<double>(cm.at(k, k));
      double fp = 0.0, fn = 0.0;
      for (std::size_t i = 0; i < K; ++i) {
        if (i != k) {
          fp += static_cast<double>(cm.at(i, k));
          fn += static_cast<double>(cm.at(k, i));
        }
      }
      f1_sum += (2.0 * tp + fp + fn) > 0.0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
    }
    CHECK(std::abs(m.macro_f1 - f1_sum / static_cast<double>(K)) < 1e-12);

    double walking_row = 0.0;
    for (std::size_t j = 0; j < K; ++j) walking_row += static_cast<double>(cm.at(walking, j));
    if (walking_row > 0.0) {
      REQUIRE(m.walking_recall.has_value());
      CHECK(std::abs(*m.walking_recall - static_cast<double>(cm.at(walking, walking)) / walking_row) < 1e-12);
    } else {
      CHECK(!m.walking_recall.has_value());
    }
  }
}

TEST_CASE("mean and sample stddev") {
  const MeanStd ms = mean_std({0.60, 0.70});
  CHECK(ms.mean == doctest::Approx(0.65).epsilon(1e-12));
  CHECK(ms.stddev == doctest::Approx(std::sqrt(0.005)).epsilon(1e-12));
  CHECK(format_percent(ms) == "65.00 ± 7.07");

  const MeanStd same = mean_std({0.5, 0.5, 0.5});
  CHECK(format_percent(same) == "50.00 ± 0.00");

  // Independent spreadsheet-style oracle on five folds.
  const std::vector<double> folds{0.61, 0.58, 0.66, 0.63, 0.60};
  const MeanStd five = mean_std(folds);
  double mean = 0.0;
  for (const double v : folds) mean += v;
  mean /= 5.0;
  double ss = 0.0;
  for (const double v : folds) ss += (v - mean) * (v - mean);
  CHECK(std::abs(five.mean - mean) < 1e-9);
  CHECK(std::abs(five.stddev - std::sqrt(ss / 4.0)) < 1e-9);
}

TEST_CASE("aggregate and report JSON round-trip") {
  Fingerprint fp{"Binary2", "mccnn", "late", 42};
  std::vector<FoldMetrics> folds;
  for (int i = 0; i < 3; ++i) {
    MetricTriplet m;
    m.accuracy = 0.6 + 0.1 * i;
    m.macro_f1 = 0.5 + 0.1 * i;
    m.walking_recall = 0.7 + 0.05 * i;
    folds.push_back({"S" + std::to_string(i + 1), m});
  }
  const ExperimentReport report = aggregate(fp, folds);
  CHECK(report.accuracy.mean == doctest::Approx(0.7).epsilon(1e-12));
  REQUIRE(report.walking_recall.has_value());
  const nlohmann::json doc = report.to_json();
  CHECK(doc.contains("fingerprint"));
  CHECK(doc.contains("per_fold"));
  CHECK(doc.contains("mean"));
  CHECK(doc.contains("std"));
  const ExperimentReport back = ExperimentReport::from_json(doc);
  CHECK(back.fingerprint == report.fingerprint);
  CHECK(back.per_fold.size() == 3);
  CHECK(back.accuracy.mean == report.accuracy.mean);
  CHECK(back.macro_f1.stddev == report.macro_f1.stddev);
  // Byte-level determinism of the serialized form.
  CHECK(back.to_json().dump(2) == doc.dump(2));
}

TEST_CASE("walking recall aggregate absent when any fold lacks it") {
  Fingerprint fp{"Posture3", "mccnn", "early", 1};
  std::vector<FoldMetrics> folds;
  MetricTriplet with;
  with.accuracy = with.macro_f1 = 0.5;
  with.walking_recall = 0.5;
  MetricTriplet without;
  without.accuracy = without.macro_f1 = 0.6;
  folds.push_back({"S1", with});
  folds.push_back({"S2", without});
  const ExperimentReport report = aggregate(fp, folds);
  CHECK(!report.walking_recall.has_value());
}

TEST_CASE("render_report_table carries the mean±std grid") {
  Fingerprint fa{"Binary2", "mccnn", "late", 1};
  Fingerprint fb{"Binary2", "mccnn", "imu-only", 1};
  std::vector<FoldMetrics> folds;
  MetricTriplet m;
  m.accuracy = 0.627;
  m.macro_f1 = 0.61;
  m.walking_recall = 0.8;
  folds.push_back({"S1", m});
  m.accuracy = 0.66;
  folds.push_back({"S2", m});
  const std::string table = render_report_table({aggregate(fa, folds), aggregate(fb, folds)});
  CHECK(table.find("Binary2") != std::string::npos);
  CHECK(table.find("mccnn/late") != std::string::npos);
  CHECK(table.find("mccnn/imu-only") != std::string::npos);
  CHECK(table.find("±") != std::string::npos);
  CHECK(table.find("Accuracy") != std::string::npos);
  CHECK(table.find("Macro F1") != std::string::npos);
}

TEST_CASE("render_comparison rejects mismatched schemes") {
  Fingerprint fa{"Binary2", "mccnn", "late", 1};
  Fingerprint fb{"Full12", "mccnn", "early", 1};
  std::vector<FoldMetrics> folds;
  MetricTriplet m;
  m.accuracy = m.macro_f1 = 0.5;
  folds.push_back({"S1", m});
  folds.push_back({"S2", m});
  const ExperimentReport a = aggregate(fa, folds);
  const ExperimentReport b = aggregate(fb, folds);
  CHECK_THROWS_AS(render_comparison({a, b}), Error);
  // Identical fingerprints are also rejected.
  CHECK_THROWS_AS(render_comparison({a, a}), Error);
}

namespace {

// Linearly separable two-label windows: label 0 windows hover at -1,
// label 1 windows at +1, plus small noise.
WindowDataset separable_dataset(std::size_t per_label, std::uint64_t seed) {
  WindowDataset ds;
  ds.window_len = 25;
  ds.step = 1;
  for (int c = 0; c < 4; ++c) ds.channel_layout.push_back("d.ch" + std::to_string(c));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (std::size_t label = 0; label < 2; ++label) {
    for (std::size_t i = 0; i < per_label; ++i) {
      Window w;
      w.session_id = "S";
      w.start_index = i;
      w.label = label;
      w.data = Tensor({25, 4});
      const double level = label == 0 ? -1.0 : 1.0;
      for (auto& v : w.data.data) v = level + noise(rng);
      ds.windows.push_back(w);
    }
  }
  return ds;
}

ModelSpec tiny_spec(Architecture arch, std::uint64_t seed) {
  ModelSpec spec;
  spec.architecture = arch;
  spec.fusion = FusionKind::EarlyData;
  spec.num_labels = 2;
  spec.window_len = 25;
  for (int c = 0; c < 4; ++c) spec.channels.push_back({"d.ch" + std::to_string(c), Modality::IMU});
  spec.conv_filters = arch == Architecture::MCCNN ? std::vector<std::size_t>{8, 8, 8}
                                                  : std::vector<std::size_t>{8, 8};
  spec.lstm_hidden = 16;
  spec.dense_hidden = 16;
  spec.dropout_p = 0.1;
  spec.seed = seed;
  spec.apply_defaults();
  return spec;
}

}  // namespace

TEST_CASE("training fits a linearly separable set and stops early") {
  const WindowDataset train_ds = separable_dataset(40, 1);
  const WindowDataset val_ds = separable_dataset(10, 2);
  TrainHyper hyper;
  hyper.learning_rate = 1e-3;
  hyper.batch_size = 16;
  hyper.max_epochs = 30;
  hyper.patience = 5;
  hyper.seed = 3;
  const ModelSpec spec = tiny_spec(Architecture::MCCNN, 4);
  TrainResult result = train(spec, train_ds, val_ds, hyper);
  REQUIRE(result.best_model != nullptr);
  CHECK(!result.history.empty());
  const EvalResult on_train = evaluate(*result.best_model, train_ds, 2, std::nullopt);
  CHECK(on_train.metrics.accuracy >= 0.99);
  // Returned checkpoint is at least as good as the final epoch on val.
  CHECK(result.best_val_macro_f1 >= result.history.back().val_macro_f1 - 1e-12);
}

TEST_CASE("training is deterministic for a fixed seed") {
  const WindowDataset train_ds = separable_dataset(20, 5);
  const WindowDataset val_ds = separable_dataset(6, 6);
  TrainHyper hyper;
  hyper.learning_rate = 1e-3;
  hyper.batch_size = 8;
  hyper.max_epochs = 4;
  hyper.patience = 4;
  hyper.seed = 9;
  const ModelSpec spec = tiny_spec(Architecture::DeepConvLSTM, 10);
  TrainResult a = train(spec, train_ds, val_ds, hyper);
  TrainResult b = train(spec, train_ds, val_ds, hyper);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].train_loss == b.history[i].train_loss);
    CHECK(a.history[i].val_macro_f1 == b.history[i].val_macro_f1);
  }
  const auto pa = a.best_model->parameters();
  const auto pb = b.best_model->parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].tensor->data == pb[i].tensor->data);
}

TEST_CASE("evaluate rejects an empty test set") {
  const WindowDataset train_ds = separable_dataset(10, 7);
  const ModelSpec spec = tiny_spec(Architecture::MCCNN, 8);
  TrainHyper hyper;
  hyper.max_epochs = 1;
  hyper.patience = 1;
  hyper.batch_size = 8;
  TrainResult r = train(spec, train_ds, train_ds, hyper);
  WindowDataset empty;
  empty.window_len = 25;
  empty.channel_layout = train_ds.channel_layout;
  CHECK_THROWS_AS(evaluate(*r.best_model, empty, 2, std::nullopt), Error);
}
