#include "cfh/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cfh/loss.hpp"

namespace cfh {

ConfusionMatrix predict_confusion(FusionModel& model, const WindowDataset& ds,
                                  std::size_t num_labels, std::size_t batch_size) {
  ConfusionMatrix cm(num_labels);
  std::vector<std::size_t> indices(ds.size());
  std::iota(indices.begin(), indices.end(), 0);
  Tensor batch;
  std::vector<std::size_t> labels;
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const std::size_t end = std::min(indices.size(), start + batch_size);
    const std::vector<std::size_t> chunk(indices.begin() + start, indices.begin() + end);
    dataset_to_batch(ds, chunk, batch, labels);
    const Tensor logits = model.forward(batch, Mode::Eval);
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < num_labels; ++k) {
        if (logits.at(b, k) > logits.at(b, best)) best = k;
      }
      ++cm.at(labels[b], best);
    }
  }
  return cm;
}

EvalResult evaluate(FusionModel& model, const WindowDataset& test_ds, std::size_t num_labels,
                    std::optional<std::size_t> walking_label) {
  if (test_ds.size() == 0) throw Error("evaluate: empty test set");
  ConfusionMatrix cm = predict_confusion(model, test_ds, num_labels);
  return {compute_metrics(cm, walking_label), cm};
}

TrainResult train(const ModelSpec& spec, const WindowDataset& train_ds, const WindowDataset& val_ds,
                  const TrainHyper& hyper, std::optional<std::size_t> walking_label) {
  if (train_ds.size() == 0) throw Error("train: empty training set");
  if (val_ds.size() == 0) throw Error("train: empty validation set");
  if (hyper.patience < 1) throw ConfigError("train: patience must be >= 1");
  for (const auto& w : train_ds.windows) {
    if (w.label >= spec.num_labels) {
      throw Error("train: window label " + std::to_string(w.label) + " outside [0," +
                  std::to_string(spec.num_labels) + ")");
    }
  }

  auto model = std::make_unique<FusionModel>(spec);
  AdamState adam({hyper.learning_rate});
  std::mt19937_64 shuffle_rng(hyper.seed);

  TrainResult result;
  std::unique_ptr<FusionModel> best;
  double best_f1 = -1.0;
  std::size_t best_epoch = 0;
  std::size_t stale_epochs = 0;

  std::vector<std::size_t> order(train_ds.size());
  std::iota(order.begin(), order.end(), 0);
  Tensor batch;
  std::vector<std::size_t> labels;

  for (std::size_t epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    // The last incomplete batch is trained on, not dropped.
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      const std::vector<std::size_t> chunk(order.begin() + start, order.begin() + end);
      dataset_to_batch(train_ds, chunk, batch, labels);

      auto params = model->parameters();
      for (auto& p : params) p.tensor->zero_grad();
      const Tensor logits = model->forward(batch, Mode::Train);
      LossResult lr = softmax_cross_entropy(logits, labels);
      if (!std::isfinite(lr.loss)) {
        throw Error("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(batches + 1));
      }
      model->backward(lr.grad_logits);
      adam.step(params);
      loss_sum += lr.loss;
      ++batches;
    }

    const ConfusionMatrix cm = predict_confusion(*model, val_ds, spec.num_labels);
    const MetricTriplet val = compute_metrics(cm, walking_label);
    result.history.push_back({epoch, loss_sum / static_cast<double>(batches), val.accuracy,
                              val.macro_f1});

    if (val.macro_f1 > best_f1 + 1e-6) {
      best_f1 = val.macro_f1;
      best_epoch = epoch;
      best = model->clone();
      stale_epochs = 0;
    } else {
      ++stale_epochs;
      if (stale_epochs >= hyper.patience) break;
    }
  }

  result.best_model = best ? std::move(best) : model->clone();
  result.best_epoch = best_epoch;
  result.best_val_macro_f1 = std::max(best_f1, 0.0);
  return result;
}

}  // namespace cfh
