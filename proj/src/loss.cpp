#include "cfh/loss.hpp"

#include <algorithm>
#include <cmath>

namespace cfh {

Tensor softmax(const Tensor& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax: expected [B x K] logits, got " + logits.shape_str());
  const std::size_t batch = logits.dim(0), k = logits.dim(1);
  Tensor probs({batch, k});
  for (std::size_t b = 0; b < batch; ++b) {
    double mx = logits.at(b, 0);
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, logits.at(b, j));
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double e = std::exp(logits.at(b, j) - mx);
      probs.at(b, j) = e;
      z += e;
    }
    for (std::size_t j = 0; j < k; ++j) probs.at(b, j) /= z;
  }
  return probs;
}

LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<std::size_t>& targets) {
  if (logits.rank() != 2) throw ShapeError("softmax_cross_entropy: expected [B x K] logits, got " + logits.shape_str());
  const std::size_t batch = logits.dim(0), k = logits.dim(1);
  if (targets.size() != batch) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(targets.size()) + " targets for batch of " +
                     std::to_string(batch));
  }
  for (std::size_t b = 0; b < batch; ++b) {
    if (targets[b] >= k) {
      throw Error("softmax_cross_entropy: target " + std::to_string(targets[b]) + " at row " +
                  std::to_string(b) + " out of range [0," + std::to_string(k) + ")");
    }
  }
  Tensor grad = softmax(logits);
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    // log softmax of the target entry, recomputed stably.
    double mx = logits.at(b, 0);
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, logits.at(b, j));
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(logits.at(b, j) - mx);
    loss -= (logits.at(b, targets[b]) - mx - std::log(z));
    grad.at(b, targets[b]) -= 1.0;
    for (std::size_t j = 0; j < k; ++j) grad.at(b, j) *= inv_b;
  }
  return {loss * inv_b, std::move(grad)};
}

}  // namespace cfh
