#pragma once

#include <cstddef>
#include <vector>

#include "cfh/tensor.hpp"

namespace cfh {

struct LossResult {
  double loss;         // mean over the batch
  Tensor grad_logits;  // [B x K], rows sum to zero
};

/// Mean softmax cross-entropy over a batch of logits [B x K] with integer
/// targets. Uses max-subtraction for stability; grad = (softmax - onehot)/B.
LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<std::size_t>& targets);

/// Row-wise softmax probabilities [B x K].
Tensor softmax(const Tensor& logits);

}  // namespace cfh
