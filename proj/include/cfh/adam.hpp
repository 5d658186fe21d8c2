#pragma once

#include <cstddef>
#include <vector>

#include "cfh/layers.hpp"

namespace cfh {

struct AdamHyper {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam over a fixed set of parameter tensors. Moment
/// buffers are allocated lazily on the first step and stay shape-locked
/// to their parameters afterwards.
class AdamState {
 public:
  explicit AdamState(AdamHyper hyper = {}) : hyper_(hyper) {}

  // Applies one update using each parameter's grad buffer.
  void step(const std::vector<ParamRef>& params);

  std::size_t step_count() const { return step_count_; }
  const AdamHyper& hyper() const { return hyper_; }

 private:
  AdamHyper hyper_;
  std::size_t step_count_ = 0;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

}  // namespace cfh
