#include "cfh/adam.hpp"

#include <cmath>

namespace cfh {

void AdamState::step(const std::vector<ParamRef>& params) {
  if (first_moment_.empty()) {
    first_moment_.resize(params.size());
    second_moment_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      first_moment_[i].assign(params[i].tensor->size(), 0.0);
      second_moment_[i].assign(params[i].tensor->size(), 0.0);
    }
  }
  if (params.size() != first_moment_.size()) {
    throw ShapeError("AdamState: parameter set size changed between steps");
  }
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double corr1 = 1.0 - std::pow(hyper_.beta1, t);
  const double corr2 = 1.0 - std::pow(hyper_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].tensor;
    if (p.grad.size() != p.data.size()) {
      throw ShapeError("AdamState: parameter '" + params[i].name + "' has no gradient buffer");
    }
    if (first_moment_[i].size() != p.data.size()) {
      throw ShapeError("AdamState: moment shape mismatch for '" + params[i].name + "'");
    }
    auto& m = first_moment_[i];
    auto& v = second_moment_[i];
    for (std::size_t j = 0; j < p.data.size(); ++j) {
      const double g = p.grad[j];
      m[j] = hyper_.beta1 * m[j] + (1.0 - hyper_.beta1) * g;
      v[j] = hyper_.beta2 * v[j] + (1.0 - hyper_.beta2) * g * g;
      const double m_hat = m[j] / corr1;
      const double v_hat = v[j] / corr2;
      p.data[j] -= hyper_.learning_rate * m_hat / (std::sqrt(v_hat) + hyper_.epsilon);
    }
  }
}

}  // namespace cfh
