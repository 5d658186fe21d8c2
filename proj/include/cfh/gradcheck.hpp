#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cfh/layers.hpp"
#include "cfh/loss.hpp"

namespace cfh {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_location;  // "param <name>[i]" or "input[i]"
  bool finite = true;
};

/// Compares analytic parameter and input gradients of `model` against
/// central finite differences of the same scalar loss.
///
/// With non-empty targets the loss is softmax cross-entropy over the model
/// output (which must then be [B x K] logits). With empty targets a fixed
/// pseudo-random linear functional of the output is used instead, so any
/// output shape can be checked. `mode` must be deterministic: Eval, or
/// Train with all dropout probabilities at zero.
///
/// `negligible` is a resolution guard for deep compositions: a comparison is
/// skipped only when analytic and numeric values BOTH fall below it, i.e. both
/// sides agree the gradient is smaller than central differences can resolve
/// (rounding noise in the loss is ~1e-11 at the default step). A wrong
/// analytic zero is still caught because the numeric side stays large.
GradCheckResult grad_check(Layer& model, const Tensor& input,
                           const std::vector<std::size_t>& targets, Mode mode,
                           double epsilon = 1e-5, double negligible = 0.0);

}  // namespace cfh
