#include "cfh/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cfh {

namespace {

// Fixed linear functional so single layers (non-logit outputs) reduce to a
// scalar; coefficients depend only on the element index.
double probe_coeff(std::size_t i) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL + i);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  return dist(rng);
}

struct Evaluation {
  double loss;
  Tensor grad_output;  // dL/d(model output)
};

Evaluation evaluate(const Tensor& output, const std::vector<std::size_t>& targets) {
  if (!targets.empty()) {
    LossResult r = softmax_cross_entropy(output, targets);
    return {r.loss, std::move(r.grad_logits)};
  }
  Tensor grad(output.shape);
  double loss = 0.0;
  for (std::size_t i = 0; i < output.size(); ++i) {
    const double c = probe_coeff(i);
    loss += c * output.data[i];
    grad.data[i] = c;
  }
  return {loss, std::move(grad)};
}

double scalar_loss(Layer& model, const Tensor& input, const std::vector<std::size_t>& targets,
                   Mode mode) {
  Tensor out = model.forward(input, mode);
  return evaluate(out, targets).loss;
}

}  // namespace

GradCheckResult grad_check(Layer& model, const Tensor& input,
                           const std::vector<std::size_t>& targets, Mode mode, double epsilon,
                           double negligible) {
  std::vector<ParamRef> params;
  model.collect_params(params, "model");
  for (auto& p : params) p.tensor->zero_grad();

  Tensor out = model.forward(input, mode);
  Evaluation ev = evaluate(out, targets);
  Tensor analytic_input_grad = model.backward(ev.grad_output);

  GradCheckResult result;
  auto compare = [&](double analytic, double numeric, const std::string& where) {
    if (!std::isfinite(analytic) || !std::isfinite(numeric)) {
      result.finite = false;
      result.max_relative_error = std::numeric_limits<double>::infinity();
      result.worst_location = where + " (non-finite)";
      return;
    }
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic - numeric) / denom;
    if (std::abs(analytic) < negligible && std::abs(numeric) < negligible) return;
    if (rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_location = where;
    }
  };

  // Parameter gradients. Analytic values were accumulated by backward().
  for (auto& p : params) {
    Tensor& t = *p.tensor;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t.data[i];
      t.data[i] = saved + epsilon;
      const double plus = scalar_loss(model, input, targets, mode);
      t.data[i] = saved - epsilon;
      const double minus = scalar_loss(model, input, targets, mode);
      t.data[i] = saved;
      compare(t.grad[i], (plus - minus) / (2.0 * epsilon),
              "param " + p.name + "[" + std::to_string(i) + "]");
      if (!result.finite) return result;
    }
  }

  // Input gradients.
  Tensor x = input;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x.data[i];
    x.data[i] = saved + epsilon;
    const double plus = scalar_loss(model, x, targets, mode);
    x.data[i] = saved - epsilon;
    const double minus = scalar_loss(model, x, targets, mode);
    x.data[i] = saved;
    compare(analytic_input_grad.data[i], (plus - minus) / (2.0 * epsilon),
            "input[" + std::to_string(i) + "]");
    if (!result.finite) return result;
  }
  return result;
}

}  // namespace cfh
