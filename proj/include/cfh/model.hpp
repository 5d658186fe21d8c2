#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfh/layers.hpp"

namespace cfh {

enum class Architecture { MCCNN, DeepConvLSTM };
enum class FusionKind { EarlyData, LateFeature, ImuOnly };

std::string to_string(Architecture a);
std::string to_string(FusionKind f);
Architecture architecture_from_string(const std::string& s);
FusionKind fusion_from_string(const std::string& s);

enum class Modality { IMU, BCS };

struct ChannelSpec {
  std::string name;
  Modality modality;
};

/// Everything needed to build a model deterministically: architecture,
/// fusion wiring, input layout, and the layer hyperparameters. Empty
/// override vectors mean architecture defaults.
struct ModelSpec {
  Architecture architecture = Architecture::MCCNN;
  FusionKind fusion = FusionKind::EarlyData;
  std::size_t num_labels = 0;
  std::size_t window_len = 0;
  std::vector<ChannelSpec> channels;

  std::vector<std::size_t> conv_filters;      // main extractor, per conv layer
  std::vector<std::size_t> bcs_conv_filters;  // BCS extractor under LateFeature
  std::vector<std::size_t> kernel_lens;       // per conv layer
  std::size_t lstm_hidden = 128;
  std::size_t dense_hidden = 128;
  double dropout_p = 0.5;
  std::uint64_t seed = 0;

  void apply_defaults();  // fills empty override vectors
  void validate() const;

  std::vector<std::size_t> imu_channel_indices() const;
  std::vector<std::size_t> bcs_channel_indices() const;

  nlohmann::json to_json() const;
  static ModelSpec from_json(const nlohmann::json& doc);
};

/// A built MC-CNN or DeepConvLSTM under one of the three fusion wirings.
/// Acts as a Layer over batches [B x W x C_total] producing logits [B x K],
/// so the gradient checker and trainer treat it like any other stack.
class FusionModel final : public Layer {
 public:
  explicit FusionModel(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }

  Tensor forward(const Tensor& batch, Mode mode) override;
  Tensor backward(const Tensor& grad_logits) override;
  std::string kind() const override { return "FusionModel"; }
  void collect_params(std::vector<ParamRef>& out, const std::string& prefix) override;
  void collect_state(std::vector<ParamRef>& out, const std::string& prefix) override;

  std::vector<ParamRef> parameters();
  std::size_t count_parameters();

  void save(const std::string& path);
  static std::unique_ptr<FusionModel> load(const std::string& path);

  // Deep copy including parameters and running statistics.
  std::unique_ptr<FusionModel> clone();

 private:
  struct Branch {
    std::vector<std::size_t> channel_indices;
    std::unique_ptr<Sequential> stack;
    std::size_t feature_width = 0;  // concat axis width contributed
  };

  Tensor gather_channels(const Tensor& batch, const std::vector<std::size_t>& idx) const;

  ModelSpec spec_;
  std::vector<Branch> branches_;
  std::unique_ptr<Sequential> classifier_;
  bool concat_over_time_ = false;  // DeepConvLSTM concatenates per-timestep features
  std::vector<std::size_t> last_input_shape_;
  std::vector<std::vector<std::size_t>> branch_out_shapes_;
};

}  // namespace cfh
