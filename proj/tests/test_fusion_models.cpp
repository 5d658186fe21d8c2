#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "cfh/model.hpp"
#include "cfh/serialize.hpp"

using namespace cfh;

namespace {

std::vector<ChannelSpec> proposed_layout() {
  // Two proposed-sensor devices: 9 IMU channels + 1 BCS channel each.
  std::vector<ChannelSpec> out;
  for (const std::string dev : {"dev_a", "dev_b"}) {
    for (const std::string ch : {"acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y", "gyro_z",
                                 "mag_x", "mag_y", "mag_z"}) {
      out.push_back({dev + "." + ch, Modality::IMU});
    }
    out.push_back({dev + ".bcs", Modality::BCS});
  }
  return out;
}

std::vector<ChannelSpec> watch_layout() {
  std::vector<ChannelSpec> out;
  for (int d = 0; d < 3; ++d) {
    for (int c = 0; c < 9; ++c) {
      out.push_back({"w" + std::to_string(d) + ".ch" + std::to_string(c), Modality::IMU});
    }
  }
  return out;
}

ModelSpec make_spec(Architecture arch, FusionKind fusion, std::vector<ChannelSpec> channels,
                    std::size_t window_len, std::size_t num_labels, std::uint64_t seed = 1) {
  ModelSpec spec;
  spec.architecture = arch;
  spec.fusion = fusion;
  spec.channels = std::move(channels);
  spec.window_len = window_len;
  spec.num_labels = num_labels;
  spec.seed = seed;
  spec.dropout_p = 0.0;  // keep Train-mode forwards deterministic in tests
  spec.apply_defaults();
  return spec;
}

Tensor random_batch(std::size_t B, std::size_t W, std::size_t C, std::uint64_t seed) {
  Tensor batch({B, W, C});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : batch.data) v = u(rng);
  return batch;
}

}  // namespace

TEST_CASE("MC-CNN early fusion: 20 channels, W=25, K=12 gives [B x 12] logits") {
  const ModelSpec spec = make_spec(Architecture::MCCNN, FusionKind::EarlyData, proposed_layout(), 25, 12);
  FusionModel model(spec);
  const Tensor logits = model.forward(random_batch(3, 25, 20, 2), Mode::Train);
  CHECK(logits.shape == std::vector<std::size_t>{3, 12});
}

TEST_CASE("DeepConvLSTM builds at both window lengths") {
  for (const std::size_t W : {std::size_t{25}, std::size_t{100}}) {
    const ModelSpec spec =
        make_spec(Architecture::DeepConvLSTM, FusionKind::EarlyData, proposed_layout(), W, 4);
    FusionModel model(spec);
    const Tensor logits = model.forward(random_batch(2, W, 20, 3), Mode::Train);
    CHECK(logits.shape == std::vector<std::size_t>{2, 4});
  }
}

TEST_CASE("late fusion requires a BCS channel") {
  ModelSpec spec;
  spec.architecture = Architecture::DeepConvLSTM;
  spec.fusion = FusionKind::LateFeature;
  spec.channels = watch_layout();  // 27 channels, no BCS
  spec.window_len = 100;
  spec.num_labels = 12;
  spec.apply_defaults();
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK_THROWS_AS(FusionModel{spec}, ConfigError);
}

TEST_CASE("proposed layout splits 18 IMU + 2 BCS") {
  const ModelSpec spec = make_spec(Architecture::MCCNN, FusionKind::LateFeature, proposed_layout(), 25, 12);
  CHECK(spec.imu_channel_indices().size() == 18);
  CHECK(spec.bcs_channel_indices().size() == 2);
}

TEST_CASE("same seed builds bit-identical parameters") {
  const ModelSpec spec = make_spec(Architecture::MCCNN, FusionKind::LateFeature, proposed_layout(), 25, 12, 7);
  FusionModel a(spec), b(spec);
  auto pa = a.parameters();
  auto pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].name == pb[i].name);
    CHECK(pa[i].tensor->data == pb[i].tensor->data);
  }
}

TEST_CASE("window too short for the conv schedule is rejected with a length trace") {
  ModelSpec spec = make_spec(Architecture::MCCNN, FusionKind::EarlyData, proposed_layout(), 25, 12);
  spec.window_len = 8;  // cannot host the default conv/pool schedule
  try {
    FusionModel model(spec);
    FAIL("expected rejection");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("8") != std::string::npos);  // the trace names the lengths
  }
}

TEST_CASE("imu-only output ignores BCS channel values") {
  const ModelSpec spec = make_spec(Architecture::MCCNN, FusionKind::ImuOnly, proposed_layout(), 25, 4);
  FusionModel model(spec);
  Tensor batch = random_batch(2, 25, 20, 5);
  model.forward(random_batch(4, 25, 20, 50), Mode::Train);  // warm BN statistics
  const Tensor base = model.forward(batch, Mode::Eval);
  // Scramble both BCS channels (indices 9 and 19).
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t t = 0; t < 25; ++t) {
      batch.at(b, t, 9) = 123.0 - batch.at(b, t, 19);
      batch.at(b, t, 19) *= -7.0;
    }
  const Tensor out = model.forward(batch, Mode::Eval);
  CHECK(out.data == base.data);
}

TEST_CASE("late-fusion channel-split soundness") {
  // Perturbing BCS inputs moves the logits (BCS branch is live), but the
  // IMU branch alone determines the logits when only IMU values are kept.
  const ModelSpec spec = make_spec(Architecture::MCCNN, FusionKind::LateFeature, proposed_layout(), 25, 4);
  FusionModel a(spec), b(spec);
  Tensor batch = random_batch(2, 25, 20, 6);
  const Tensor warm = random_batch(4, 25, 20, 51);
  a.forward(warm, Mode::Train);
  b.forward(warm, Mode::Train);
  const Tensor base = a.forward(batch, Mode::Eval);
  Tensor perturbed = batch;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t t = 0; t < 25; ++t) perturbed.at(i, t, 9) += 3.0;
  const Tensor moved = b.forward(perturbed, Mode::Eval);
  CHECK(moved.data != base.data);

  // Same IMU values + restored BCS values reproduce the logits bit-exactly,
  // regardless of the forward calls in between.
  const Tensor again = a.forward(batch, Mode::Eval);
  CHECK(again.data == base.data);
}

TEST_CASE("all fusion variants share the batch/logit contract") {
  for (const Architecture arch : {Architecture::MCCNN, Architecture::DeepConvLSTM}) {
    for (const FusionKind fusion : {FusionKind::EarlyData, FusionKind::LateFeature, FusionKind::ImuOnly}) {
      const ModelSpec spec = make_spec(arch, fusion, proposed_layout(), 25, 5);
      FusionModel model(spec);
      const Tensor logits = model.forward(random_batch(3, 25, 20, 8), Mode::Train);
      CHECK(logits.shape == std::vector<std::size_t>{3, 5});
    }
  }
}

TEST_CASE("count_parameters: dense and conv arithmetic") {
  Dense dense(10, 5);
  std::vector<ParamRef> params;
  dense.collect_params(params, "d");
  std::size_t total = 0;
  for (const auto& p : params) total += p.tensor->size();
  CHECK(total == 55);

  Conv1D conv(2, 4, 5);
  params.clear();
  conv.collect_params(params, "c");
  total = 0;
  for (const auto& p : params) total += p.tensor->size();
  CHECK(total == 44);
}

TEST_CASE("count_parameters equals a manifest-walking oracle") {
  const ModelSpec spec = make_spec(Architecture::MCCNN, FusionKind::EarlyData, proposed_layout(), 25, 12);
  FusionModel model(spec);
  const std::string path = "count_oracle.cfh";
  model.save(path);
  const TensorFile file = read_tensor_file(path);
  std::remove(path.c_str());
  std::size_t manifest_total = 0;
  for (const auto& entry : file.header.at("tensors")) {
    if (entry.at("name").get<std::string>().find("running_") != std::string::npos) continue;
    std::size_t n = 1;
    for (const auto& d : entry.at("shape")) n *= d.get<std::size_t>();
    manifest_total += n;
  }
  CHECK(model.count_parameters() == manifest_total);
}

TEST_CASE("serialization round-trip reproduces logits bit-exactly") {
  for (const Architecture arch : {Architecture::MCCNN, Architecture::DeepConvLSTM}) {
    const ModelSpec spec = make_spec(arch, FusionKind::LateFeature, proposed_layout(), 25, 4, 11);
    FusionModel model(spec);
    // Warm BN running statistics so Eval works after load.
    model.forward(random_batch(4, 25, 20, 12), Mode::Train);
    const Tensor batch = random_batch(3, 25, 20, 13);
    const Tensor before = model.forward(batch, Mode::Eval);
    const std::string path = "model_roundtrip.cfh";
    model.save(path);
    auto loaded = FusionModel::load(path);
    std::remove(path.c_str());
    const Tensor after = loaded->forward(batch, Mode::Eval);
    CHECK(after.data == before.data);
  }
}

TEST_CASE("clone reproduces logits and decouples parameters") {
  const ModelSpec spec = make_spec(Architecture::MCCNN, FusionKind::EarlyData, proposed_layout(), 25, 4, 14);
  FusionModel model(spec);
  model.forward(random_batch(4, 25, 20, 15), Mode::Train);
  const Tensor batch = random_batch(2, 25, 20, 16);
  const Tensor before = model.forward(batch, Mode::Eval);
  auto copy = model.clone();
  CHECK(copy->forward(batch, Mode::Eval).data == before.data);
  // Mutating the original must not affect the clone.
  model.parameters()[0].tensor->data[0] += 100.0;
  CHECK(copy->forward(batch, Mode::Eval).data == before.data);
}

TEST_CASE("channel-count mismatch is rejected") {
  const ModelSpec spec = make_spec(Architecture::MCCNN, FusionKind::EarlyData, proposed_layout(), 25, 4);
  FusionModel model(spec);
  CHECK_THROWS_AS(model.forward(random_batch(2, 25, 19, 17), Mode::Train), ShapeError);
}

TEST_CASE("model spec JSON round-trip") {
  const ModelSpec spec = make_spec(Architecture::DeepConvLSTM, FusionKind::LateFeature, proposed_layout(), 25, 12, 9);
  const ModelSpec back = ModelSpec::from_json(spec.to_json());
  CHECK(back.architecture == spec.architecture);
  CHECK(back.fusion == spec.fusion);
  CHECK(back.num_labels == spec.num_labels);
  CHECK(back.window_len == spec.window_len);
  CHECK(back.channels.size() == spec.channels.size());
  CHECK(back.conv_filters == spec.conv_filters);
  CHECK(back.seed == spec.seed);
  FusionModel a(spec), b(back);
  const Tensor batch = random_batch(2, 25, 20, 10);
  CHECK(a.forward(batch, Mode::Train).data == b.forward(batch, Mode::Train).data);
}
