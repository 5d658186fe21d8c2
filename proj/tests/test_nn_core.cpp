#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "cfh/adam.hpp"
#include "cfh/gradcheck.hpp"
#include "cfh/layers.hpp"
#include "cfh/loss.hpp"
#include "cfh/serialize.hpp"
#include "cfh/tensor.hpp"

using namespace cfh;

TEST_CASE("conv1d valid-length law") {
  CHECK(Conv1D::out_len(25, 5, 1) == 21);
  CHECK(Conv1D::out_len(100, 5, 1) == 96);
  CHECK(Conv1D::out_len(10, 2, 2) == 5);
  // Property over randomized (L, k, stride).
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng() % 8;
    const std::size_t L = k + rng() % 40;
    const std::size_t stride = 1 + rng() % 4;
    CHECK(Conv1D::out_len(L, k, stride) == (L - k) / stride + 1);
  }
}

TEST_CASE("conv1d identity tap kernel") {
  Conv1D conv(1, 1, 3);
  conv.weight.data = {0.0, 1.0, 0.0};
  conv.bias.data = {0.0};
  Tensor input({1, 1, 4}, {1.0, 2.0, 3.0, 4.0});
  const Tensor out = conv.forward(input, Mode::Eval);
  REQUIRE(out.shape == std::vector<std::size_t>{1, 1, 2});
  CHECK(out.at(0, 0, 0) == doctest::Approx(2.0));
  CHECK(out.at(0, 0, 1) == doctest::Approx(3.0));
}

TEST_CASE("conv1d matches brute-force oracle") {
  const std::size_t B = 1, C_in = 2, C_out = 1, L = 4, k = 2;
  Conv1D conv(C_in, C_out, k);
  std::mt19937_64 rng(11);
  conv.init_weights(rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor input({B, C_in, L});
  for (auto& v : input.data) v = u(rng);
  const Tensor out = conv.forward(input, Mode::Eval);
  const std::size_t L_out = L - k + 1;
  REQUIRE(out.shape == std::vector<std::size_t>{B, C_out, L_out});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t o = 0; o < C_out; ++o) {
      for (std::size_t t = 0; t < L_out; ++t) {
        double want = conv.bias.at(o);
        for (std::size_t c = 0; c < C_in; ++c) {
          for (std::size_t j = 0; j < k; ++j) {
            want += conv.weight.at(o, c, j) * input.at(b, c, t + j);
          }
        }
        CHECK(out.at(b, o, t) == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("conv1d rejects too-short input") {
  Conv1D conv(1, 1, 5);
  Tensor input({1, 1, 3});
  CHECK_THROWS_AS(conv.forward(input, Mode::Eval), ShapeError);
}

TEST_CASE("maxpool length 2 drops trailing remainder") {
  MaxPool1D pool(2);
  Tensor input({1, 1, 5}, {1.0, 3.0, 2.0, 5.0, 4.0});
  const Tensor out = pool.forward(input, Mode::Eval);
  REQUIRE(out.shape == std::vector<std::size_t>{1, 1, 2});
  CHECK(out.at(0, 0, 0) == 3.0);
  CHECK(out.at(0, 0, 1) == 5.0);
}

TEST_CASE("dropout p=0 is identity in both modes") {
  Dropout drop(0.0, 42);
  Tensor input({2, 3}, {1, 2, 3, 4, 5, 6});
  const Tensor train_out = drop.forward(input, Mode::Train);
  const Tensor eval_out = drop.forward(input, Mode::Eval);
  CHECK(train_out.data == input.data);
  CHECK(eval_out.data == input.data);
}

TEST_CASE("dropout scales survivors by 1/(1-p) in train, identity in eval") {
  Dropout drop(0.5, 42);
  Tensor input({1, 1000});
  for (auto& v : input.data) v = 1.0;
  const Tensor out = drop.forward(input, Mode::Train);
  std::size_t survivors = 0;
  for (const double v : out.data) {
    CHECK((v == 0.0 || v == doctest::Approx(2.0)));
    if (v != 0.0) ++survivors;
  }
  CHECK(survivors > 350);
  CHECK(survivors < 650);
  CHECK(drop.forward(input, Mode::Eval).data == input.data);
}

TEST_CASE("batchnorm train normalizes to mean 0 variance 1") {
  // Per-channel values {9,9,5,5}: mean 7, population variance 4.
  BatchNorm1D bn(1);
  Tensor input({4, 1, 1}, {9.0, 9.0, 5.0, 5.0});
  const Tensor out = bn.forward(input, Mode::Train);
  double mean = 0.0;
  for (const double v : out.data) mean += v;
  mean /= 4.0;
  double var = 0.0;
  for (const double v : out.data) var += (v - mean) * (v - mean);
  var /= 4.0;
  CHECK(std::abs(mean) < 1e-9);
  // Epsilon-adjusted: variance = 4/(4+1e-5).
  CHECK(var == doctest::Approx(4.0 / (4.0 + 1e-5)).epsilon(1e-9));
  // Hand value: (9-7)/sqrt(4+1e-5).
  CHECK(out.at(0, 0, 0) == doctest::Approx(2.0 / std::sqrt(4.0 + 1e-5)).epsilon(1e-12));
}

TEST_CASE("batchnorm eval before any train call is rejected") {
  BatchNorm1D bn(2);
  Tensor input({1, 2, 3});
  CHECK_THROWS_AS(bn.forward(input, Mode::Eval), Error);
}

TEST_CASE("batchnorm eval uses running statistics") {
  BatchNorm1D bn(1);
  Tensor input({4, 1, 1}, {9.0, 9.0, 5.0, 5.0});
  bn.forward(input, Mode::Train);
  // running mean = 0.9*0 + 0.1*7, running var = 0.9*1 + 0.1*4 (var init 1).
  CHECK(bn.running_mean.at(0) == doctest::Approx(0.7));
  CHECK(bn.running_var.at(0) == doctest::Approx(1.3));
  Tensor probe({1, 1, 1}, {0.7});
  const Tensor out = bn.forward(probe, Mode::Eval);
  CHECK(out.at(0, 0, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lstm zero weights give all-zero hidden sequence") {
  LSTM lstm(3, 4);
  for (auto& v : lstm.w_input.data) v = 0.0;
  for (auto& v : lstm.w_hidden.data) v = 0.0;
  for (auto& v : lstm.bias.data) v = 0.0;
  Tensor input({2, 5, 3});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : input.data) v = u(rng);
  const Tensor out = lstm.forward(input, Mode::Eval);
  for (const double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("lstm single cell matches hand evaluation") {
  LSTM lstm(1, 1);
  // Gate order (input, forget, candidate, output).
  lstm.w_input.data = {0.5, 0.4, 0.3, 0.2};
  lstm.w_hidden.data = {0.0, 0.0, 0.0, 0.0};
  lstm.bias.data = {0.1, 1.0, 0.0, 0.05};
  Tensor input({1, 1, 1}, {1.0});
  const Tensor out = lstm.forward(input, Mode::Eval);
  const auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  const double gi = sigmoid(0.5 * 1.0 + 0.1);
  const double gg = std::tanh(0.3 * 1.0 + 0.0);
  const double go = sigmoid(0.2 * 1.0 + 0.05);
  const double c = gi * gg;  // c0 = 0, forget term vanishes
  const double h = go * std::tanh(c);
  CHECK(out.at(0, 0, 0) == doctest::Approx(h).epsilon(1e-14));
}

TEST_CASE("lstm output at t is causal") {
  LSTM lstm(2, 3);
  std::mt19937_64 rng(9);
  lstm.init_weights(rng);
  Tensor input({1, 4, 2});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : input.data) v = u(rng);
  const Tensor base = lstm.forward(input, Mode::Eval);
  Tensor mutated = input;
  mutated.at(0, 3, 0) += 5.0;  // perturb the final step only
  mutated.at(0, 3, 1) -= 5.0;
  const Tensor out = lstm.forward(mutated, Mode::Eval);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t h = 0; h < 3; ++h) {
      CHECK(out.at(0, t, h) == base.at(0, t, h));
    }
  }
}

TEST_CASE("empty time axis is rejected at tensor construction") {
  // A T=0 sequence cannot even be represented; the shape is rejected.
  CHECK_THROWS_AS(Tensor({1, 0, 2}), ShapeError);
}

TEST_CASE("cross entropy on uniform logits is ln K") {
  Tensor logits({1, 12});
  for (auto& v : logits.data) v = 0.3;
  const LossResult r = softmax_cross_entropy(logits, {4});
  CHECK(r.loss == doctest::Approx(std::log(12.0)).epsilon(1e-12));
  CHECK(r.loss == doctest::Approx(2.4849).epsilon(1e-4));
}

TEST_CASE("cross entropy saturated correct prediction") {
  Tensor logits({1, 3}, {0.0, 1000.0, 0.0});
  const LossResult r = softmax_cross_entropy(logits, {1});
  CHECK(r.loss < 1e-12);
  for (const double g : r.grad_logits.data) CHECK(std::abs(g) < 1e-12);
}

TEST_CASE("cross entropy matches hand-computed table") {
  Tensor logits({2, 3}, {1.0, 2.0, 0.5, -0.5, 0.0, 1.5});
  const std::vector<std::size_t> targets{1, 2};
  const LossResult r = softmax_cross_entropy(logits, targets);
  // Independent recomputation per row.
  double want_loss = 0.0;
  std::vector<double> want_grad(6);
  for (std::size_t b = 0; b < 2; ++b) {
    double z = 0.0;
    for (std::size_t k = 0; k < 3; ++k) z += std::exp(logits.at(b, k));
    want_loss += -std::log(std::exp(logits.at(b, targets[b])) / z);
    for (std::size_t k = 0; k < 3; ++k) {
      const double p = std::exp(logits.at(b, k)) / z;
      want_grad[b * 3 + k] = (p - (k == targets[b] ? 1.0 : 0.0)) / 2.0;
    }
  }
  want_loss /= 2.0;
  CHECK(r.loss == doctest::Approx(want_loss).epsilon(1e-12));
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(r.grad_logits.data[i] == doctest::Approx(want_grad[i]).epsilon(1e-12));
  }
}

TEST_CASE("cross entropy gradient rows sum to zero") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t B = 1 + rng() % 6, K = 2 + rng() % 10;
    Tensor logits({B, K});
    for (auto& v : logits.data) v = u(rng);
    std::vector<std::size_t> targets(B);
    for (auto& t : targets) t = rng() % K;
    const LossResult r = softmax_cross_entropy(logits, targets);
    for (std::size_t b = 0; b < B; ++b) {
      double row = 0.0;
      for (std::size_t k = 0; k < K; ++k) row += r.grad_logits.at(b, k);
      CHECK(std::abs(row) < 1e-12);
    }
  }
}

TEST_CASE("cross entropy rejects out-of-range target") {
  Tensor logits({1, 3});
  CHECK_THROWS_AS(softmax_cross_entropy(logits, {3}), Error);
}

TEST_CASE("adam first step moves by about lr times sign of gradient") {
  Tensor p({1}, {0.5});
  p.ensure_grad();
  p.grad[0] = 3.7;
  AdamState adam(AdamHyper{.learning_rate = 1e-3});
  adam.step({ParamRef{"p", &p}});
  CHECK(p.at(0) == doctest::Approx(0.5 - 1e-3).epsilon(1e-6));
  CHECK(adam.step_count() == 1);
}

TEST_CASE("adam zero gradient leaves parameter unchanged but counts the step") {
  Tensor p({2}, {1.0, -1.0});
  p.ensure_grad();
  AdamState adam;
  adam.step({ParamRef{"p", &p}});
  CHECK(p.at(0) == 1.0);
  CHECK(p.at(1) == -1.0);
  CHECK(adam.step_count() == 1);
}

TEST_CASE("adam two-step trace matches hand-rolled iteration") {
  const double lr = 1e-2, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Tensor p({1}, {0.0});
  p.ensure_grad();
  AdamState adam(AdamHyper{lr, b1, b2, eps});
  // Hand trace alongside.
  double x = 0.0, m = 0.0, v = 0.0;
  const double grads[2] = {1.0, -1.0};
  for (int step = 1; step <= 2; ++step) {
    const double g = grads[step - 1];
    p.grad[0] = g;
    adam.step({ParamRef{"p", &p}});
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double mhat = m / (1.0 - std::pow(b1, step));
    const double vhat = v / (1.0 - std::pow(b2, step));
    x -= lr * mhat / (std::sqrt(vhat) + eps);
    CHECK(p.at(0) == doctest::Approx(x).epsilon(1e-15));
  }
}

TEST_CASE("adam first step is scale covariant") {
  for (const double g : {0.3, -1.7, 12.0}) {
    Tensor a({1}, {0.0});
    a.ensure_grad();
    a.grad[0] = g;
    Tensor b({1}, {0.0});
    b.ensure_grad();
    b.grad[0] = 1000.0 * g;
    AdamState sa, sb;
    sa.step({ParamRef{"a", &a}});
    sb.step({ParamRef{"b", &b}});
    CHECK(std::abs(a.at(0) - b.at(0)) < 1e-6);
  }
}

TEST_CASE("grad check: dense layer under CE head") {
  std::mt19937_64 rng(5);
  Dense dense(6, 4);
  dense.init_weights(rng);
  Tensor input({3, 6});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : input.data) v = u(rng);
  const GradCheckResult r = grad_check(dense, input, {0, 2, 3}, Mode::Eval);
  CHECK(r.finite);
  CHECK(r.max_relative_error < 1e-6);
}

TEST_CASE("grad check: conv + pool + dense stack") {
  std::mt19937_64 rng(6);
  Sequential stack;
  auto conv = std::make_unique<Conv1D>(2, 3, 3);
  conv->init_weights(rng);
  stack.add(std::move(conv));
  stack.add(std::make_unique<ReLU>());
  stack.add(std::make_unique<MaxPool1D>(2));
  stack.add(std::make_unique<Flatten>());
  auto dense = std::make_unique<Dense>(3 * 4, 3);
  dense->init_weights(rng);
  stack.add(std::move(dense));
  Tensor input({2, 2, 10});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : input.data) v = u(rng);
  const GradCheckResult r = grad_check(stack, input, {1, 2}, Mode::Eval);
  CHECK(r.finite);
  CHECK(r.max_relative_error < 1e-5);
}

TEST_CASE("grad check: lstm") {
  std::mt19937_64 rng(8);
  LSTM lstm(3, 4);
  lstm.init_weights(rng);
  Tensor input({2, 5, 3});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : input.data) v = u(rng);
  const GradCheckResult r = grad_check(lstm, input, {}, Mode::Eval);
  CHECK(r.finite);
  CHECK(r.max_relative_error < 1e-5);
}

TEST_CASE("grad check: batchnorm in train mode") {
  std::mt19937_64 rng(10);
  BatchNorm1D bn(2);
  Tensor input({4, 2, 3});
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (auto& v : input.data) v = u(rng);
  const GradCheckResult r = grad_check(bn, input, {}, Mode::Train);
  CHECK(r.finite);
  CHECK(r.max_relative_error < 1e-5);
}

TEST_CASE("forward determinism: identical inputs give bit-identical outputs") {
  std::mt19937_64 rng(14);
  Conv1D conv(3, 4, 5);
  conv.init_weights(rng);
  Tensor input({2, 3, 12});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : input.data) v = u(rng);
  const Tensor a = conv.forward(input, Mode::Eval);
  const Tensor b = conv.forward(input, Mode::Eval);
  CHECK(a.data == b.data);
}

TEST_CASE("eval-mode inference is pure") {
  std::mt19937_64 rng(15);
  BatchNorm1D bn(2);
  Tensor warm({4, 2, 3});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : warm.data) v = u(rng);
  bn.forward(warm, Mode::Train);
  std::vector<ParamRef> state;
  bn.collect_params(state, "");
  bn.collect_state(state, "");
  std::vector<std::vector<double>> before;
  for (const auto& p : state) before.push_back(p.tensor->data);
  bn.forward(warm, Mode::Eval);
  bn.forward(warm, Mode::Eval);
  for (std::size_t i = 0; i < state.size(); ++i) {
    CHECK(state[i].tensor->data == before[i]);
  }
}

TEST_CASE("tensor file round-trip is bit exact") {
  std::mt19937_64 rng(16);
  Tensor a({2, 3});
  Tensor b({4});
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (auto& v : a.data) v = u(rng);
  for (auto& v : b.data) v = u(rng);
  nlohmann::json header;
  header["purpose"] = "test";
  const std::string path = "roundtrip_test.cfh";
  write_tensor_file(path, header, {{"alpha", &a}, {"beta", &b}});
  const TensorFile file = read_tensor_file(path);
  std::remove(path.c_str());
  CHECK(file.header.at("purpose") == "test");
  REQUIRE(file.tensors.size() == 2);
  CHECK(file.tensors[0].first == "alpha");
  CHECK(file.tensors[0].second.shape == a.shape);
  CHECK(file.tensors[0].second.data == a.data);
  CHECK(file.tensors[1].second.data == b.data);
}

TEST_CASE("layer gradients agree with finite differences over 20 seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Dense dense(4, 3);
    dense.init_weights(rng);
    Tensor din({2, 4});
    for (auto& v : din.data) v = u(rng);
    CHECK(grad_check(dense, din, {}, Mode::Eval).max_relative_error < 1e-5);

    Conv1D conv(2, 2, 3);
    conv.init_weights(rng);
    Tensor cin({2, 2, 8});
    for (auto& v : cin.data) v = u(rng);
    CHECK(grad_check(conv, cin, {}, Mode::Eval).max_relative_error < 1e-5);
  }
}
