#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "cfh/adam.hpp"
#include "cfh/metrics.hpp"
#include "cfh/model.hpp"
#include "cfh/windows.hpp"

namespace cfh {

struct TrainHyper {
  double learning_rate = 1e-4;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 200;
  std::size_t patience = 20;  // epochs without val macro-F1 improvement > 1e-6
  std::uint64_t seed = 0;
};

struct EpochRecord {
  std::size_t epoch;
  double train_loss;
  double val_accuracy;
  double val_macro_f1;
};

struct TrainResult {
  std::unique_ptr<FusionModel> best_model;  // best-validation checkpoint
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_macro_f1 = 0.0;
};

/// Adam over seeded, shuffled batches; after each epoch validation macro
/// F1 decides early stopping, and the best checkpoint is what's returned.
/// `walking_label` feeds through to validation metrics only.
TrainResult train(const ModelSpec& spec, const WindowDataset& train_ds, const WindowDataset& val_ds,
                  const TrainHyper& hyper, std::optional<std::size_t> walking_label = {});

/// Argmax predictions (lowest index wins ties) over a dataset.
ConfusionMatrix predict_confusion(FusionModel& model, const WindowDataset& ds,
                                  std::size_t num_labels, std::size_t batch_size = 128);

/// MetricTriplet + confusion matrix on a test set. Rejects empty datasets.
struct EvalResult {
  MetricTriplet metrics;
  ConfusionMatrix confusion;
};
EvalResult evaluate(FusionModel& model, const WindowDataset& test_ds, std::size_t num_labels,
                    std::optional<std::size_t> walking_label);

}  // namespace cfh
