#include "cfh/model.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "cfh/serialize.hpp"

namespace cfh {

std::string to_string(Architecture a) {
  return a == Architecture::MCCNN ? "mccnn" : "deepconvlstm";
}

std::string to_string(FusionKind f) {
  switch (f) {
    case FusionKind::EarlyData: return "early";
    case FusionKind::LateFeature: return "late";
    case FusionKind::ImuOnly: return "imu-only";
  }
  return "?";
}

Architecture architecture_from_string(const std::string& s) {
  if (s == "mccnn") return Architecture::MCCNN;
  if (s == "deepconvlstm") return Architecture::DeepConvLSTM;
  throw ConfigError("unknown architecture '" + s + "' (expected mccnn or deepconvlstm)");
}

FusionKind fusion_from_string(const std::string& s) {
  if (s == "early") return FusionKind::EarlyData;
  if (s == "late") return FusionKind::LateFeature;
  if (s == "imu-only") return FusionKind::ImuOnly;
  throw ConfigError("unknown fusion '" + s + "' (expected early, late, or imu-only)");
}

void ModelSpec::apply_defaults() {
  const bool lstm = architecture == Architecture::DeepConvLSTM;
  if (conv_filters.empty()) conv_filters = lstm ? std::vector<std::size_t>{64, 64} : std::vector<std::size_t>{64, 64, 64};
  if (kernel_lens.empty()) kernel_lens = lstm ? std::vector<std::size_t>{5, 5} : std::vector<std::size_t>{5, 5, 3};
  if (bcs_conv_filters.empty()) bcs_conv_filters.assign(conv_filters.size(), 16);
}

std::vector<std::size_t> ModelSpec::imu_channel_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].modality == Modality::IMU) idx.push_back(c);
  }
  return idx;
}

std::vector<std::size_t> ModelSpec::bcs_channel_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].modality == Modality::BCS) idx.push_back(c);
  }
  return idx;
}

void ModelSpec::validate() const {
  if (num_labels < 2) throw ConfigError("ModelSpec: num_labels must be >= 2");
  if (window_len < 1) throw ConfigError("ModelSpec: window_len must be >= 1");
  if (channels.empty()) throw ConfigError("ModelSpec: channel layout is empty");
  if (conv_filters.size() != kernel_lens.size()) {
    throw ConfigError("ModelSpec: conv_filters and kernel_lens lengths differ");
  }
  if (bcs_conv_filters.size() != conv_filters.size()) {
    throw ConfigError("ModelSpec: bcs_conv_filters must match the conv layer count");
  }
  if (dropout_p < 0.0 || dropout_p >= 1.0) throw ConfigError("ModelSpec: dropout_p must lie in [0,1)");
  if (fusion == FusionKind::LateFeature) {
    if (imu_channel_indices().empty() || bcs_channel_indices().empty()) {
      throw ConfigError("ModelSpec: late feature fusion requires at least one IMU channel and one BCS channel");
    }
  }
  if (fusion == FusionKind::ImuOnly && imu_channel_indices().empty()) {
    throw ConfigError("ModelSpec: imu-only fusion requires at least one IMU channel");
  }
}

nlohmann::json ModelSpec::to_json() const {
  nlohmann::json chans = nlohmann::json::array();
  for (const auto& c : channels) {
    chans.push_back({{"name", c.name}, {"modality", c.modality == Modality::IMU ? "IMU" : "BCS"}});
  }
  return {{"architecture", to_string(architecture)},
          {"fusion", to_string(fusion)},
          {"num_labels", num_labels},
          {"window_len", window_len},
          {"channels", chans},
          {"conv_filters", conv_filters},
          {"bcs_conv_filters", bcs_conv_filters},
          {"kernel_lens", kernel_lens},
          {"lstm_hidden", lstm_hidden},
          {"dense_hidden", dense_hidden},
          {"dropout_p", dropout_p},
          {"seed", seed}};
}

ModelSpec ModelSpec::from_json(const nlohmann::json& doc) {
  ModelSpec spec;
  spec.architecture = architecture_from_string(doc.at("architecture").get<std::string>());
  spec.fusion = fusion_from_string(doc.at("fusion").get<std::string>());
  spec.num_labels = doc.at("num_labels").get<std::size_t>();
  spec.window_len = doc.at("window_len").get<std::size_t>();
  for (const auto& c : doc.at("channels")) {
    const std::string m = c.at("modality").get<std::string>();
    if (m != "IMU" && m != "BCS") throw ConfigError("ModelSpec: unknown modality '" + m + "'");
    spec.channels.push_back({c.at("name").get<std::string>(), m == "IMU" ? Modality::IMU : Modality::BCS});
  }
  if (doc.contains("conv_filters")) spec.conv_filters = doc["conv_filters"].get<std::vector<std::size_t>>();
  if (doc.contains("bcs_conv_filters")) spec.bcs_conv_filters = doc["bcs_conv_filters"].get<std::vector<std::size_t>>();
  if (doc.contains("kernel_lens")) spec.kernel_lens = doc["kernel_lens"].get<std::vector<std::size_t>>();
  if (doc.contains("lstm_hidden")) spec.lstm_hidden = doc["lstm_hidden"].get<std::size_t>();
  if (doc.contains("dense_hidden")) spec.dense_hidden = doc["dense_hidden"].get<std::size_t>();
  if (doc.contains("dropout_p")) spec.dropout_p = doc["dropout_p"].get<double>();
  if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
  spec.apply_defaults();
  spec.validate();
  return spec;
}

namespace {

// MC-CNN pools (length 2) after the first two conv blocks only; the
// DeepConvLSTM extractor keeps the full time axis for the LSTM.
std::vector<bool> pool_schedule(const ModelSpec& spec) {
  std::vector<bool> pools(spec.conv_filters.size(), false);
  if (spec.architecture == Architecture::MCCNN) {
    for (std::size_t i = 0; i < pools.size() && i < 2; ++i) pools[i] = true;
  }
  return pools;
}

// Time-axis length after the conv/pool schedule; throws with the full
// length trace when the window is too short.
std::size_t trace_length(const ModelSpec& spec) {
  const auto pools = pool_schedule(spec);
  std::size_t len = spec.window_len;
  std::ostringstream trace;
  trace << len;
  for (std::size_t i = 0; i < spec.kernel_lens.size(); ++i) {
    if (len < spec.kernel_lens[i]) {
      throw ConfigError("ModelSpec: window too short for the conv/pool schedule (lengths " +
                        trace.str() + ", next kernel " + std::to_string(spec.kernel_lens[i]) + ")");
    }
    len = len - spec.kernel_lens[i] + 1;
    trace << "->" << len;
    if (pools[i]) {
      len /= 2;
      trace << "->" << len;
      if (len == 0) {
        throw ConfigError("ModelSpec: window too short for the conv/pool schedule (lengths " +
                          trace.str() + ")");
      }
    }
  }
  return len;
}

void walk_batchnorms(Sequential& seq, const std::function<void(BatchNorm1D&)>& fn) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (auto* bn = dynamic_cast<BatchNorm1D*>(&seq.layer(i))) fn(*bn);
  }
}

}  // namespace

FusionModel::FusionModel(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.apply_defaults();
  spec_.validate();
  const std::size_t final_len = trace_length(spec_);
  const auto pools = pool_schedule(spec_);
  const bool lstm = spec_.architecture == Architecture::DeepConvLSTM;
  concat_over_time_ = lstm;

  std::mt19937_64 rng(spec_.seed);

  auto build_extractor = [&](const std::vector<std::size_t>& chan_idx,
                             const std::vector<std::size_t>& filters) {
    Branch branch;
    branch.channel_indices = chan_idx;
    branch.stack = std::make_unique<Sequential>();
    branch.stack->add(std::make_unique<Transpose>());  // [B,W,C] -> [B,C,W]
    std::size_t in_ch = chan_idx.size();
    for (std::size_t i = 0; i < filters.size(); ++i) {
      // No conv bias: BatchNorm right after subtracts the batch mean, which
      // would cancel any bias exactly (its beta plays that role instead).
      auto conv = std::make_unique<Conv1D>(in_ch, filters[i], spec_.kernel_lens[i],
                                           /*stride=*/1, /*with_bias=*/false);
      conv->init_weights(rng);
      branch.stack->add(std::move(conv));
      branch.stack->add(std::make_unique<BatchNorm1D>(filters[i]));
      branch.stack->add(std::make_unique<ReLU>());
      if (pools[i]) branch.stack->add(std::make_unique<MaxPool1D>(2));
      branch.stack->add(std::make_unique<Dropout>(spec_.dropout_p, rng()));
      in_ch = filters[i];
    }
    if (lstm) {
      branch.stack->add(std::make_unique<Transpose>());  // back to [B,L,C']
      branch.feature_width = in_ch;
    } else {
      branch.stack->add(std::make_unique<Flatten>());
      branch.feature_width = in_ch * final_len;
    }
    branches_.push_back(std::move(branch));
  };

  switch (spec_.fusion) {
    case FusionKind::EarlyData: {
      std::vector<std::size_t> all(spec_.channels.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      build_extractor(all, spec_.conv_filters);
      break;
    }
    case FusionKind::ImuOnly:
      build_extractor(spec_.imu_channel_indices(), spec_.conv_filters);
      break;
    case FusionKind::LateFeature:
      build_extractor(spec_.imu_channel_indices(), spec_.conv_filters);
      build_extractor(spec_.bcs_channel_indices(), spec_.bcs_conv_filters);
      break;
  }

  std::size_t total_width = 0;
  for (const auto& b : branches_) total_width += b.feature_width;

  classifier_ = std::make_unique<Sequential>();
  if (lstm) {
    auto cell = std::make_unique<LSTM>(total_width, spec_.lstm_hidden);
    cell->init_weights(rng);
    classifier_->add(std::move(cell));
    classifier_->add(std::make_unique<LastStep>());
    auto out = std::make_unique<Dense>(spec_.lstm_hidden, spec_.num_labels);
    out->init_weights(rng);
    classifier_->add(std::move(out));
  } else {
    auto hidden = std::make_unique<Dense>(total_width, spec_.dense_hidden);
    hidden->init_weights(rng);
    classifier_->add(std::move(hidden));
    classifier_->add(std::make_unique<ReLU>());
    auto out = std::make_unique<Dense>(spec_.dense_hidden, spec_.num_labels);
    out->init_weights(rng);
    classifier_->add(std::move(out));
  }
}

Tensor FusionModel::gather_channels(const Tensor& batch, const std::vector<std::size_t>& idx) const {
  const std::size_t b = batch.dim(0), w = batch.dim(1);
  Tensor out({b, w, idx.size()});
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t t = 0; t < w; ++t)
      for (std::size_t c = 0; c < idx.size(); ++c) out.at(i, t, c) = batch.at(i, t, idx[c]);
  return out;
}

Tensor FusionModel::forward(const Tensor& batch, Mode mode) {
  if (batch.rank() != 3) throw ShapeError("FusionModel: expected [B x W x C] batch, got " + batch.shape_str());
  if (batch.dim(2) != spec_.channels.size()) {
    throw ShapeError("FusionModel: batch has " + std::to_string(batch.dim(2)) +
                     " channels, spec layout has " + std::to_string(spec_.channels.size()));
  }
  if (batch.dim(1) != spec_.window_len) {
    throw ShapeError("FusionModel: batch window length " + std::to_string(batch.dim(1)) +
                     ", spec expects " + std::to_string(spec_.window_len));
  }
  last_input_shape_ = batch.shape;
  branch_out_shapes_.clear();

  std::vector<Tensor> features;
  for (auto& branch : branches_) {
    Tensor x = gather_channels(batch, branch.channel_indices);
    features.push_back(branch.stack->forward(x, mode));
    branch_out_shapes_.push_back(features.back().shape);
  }

  Tensor merged;
  if (features.size() == 1) {
    merged = std::move(features.front());
  } else if (concat_over_time_) {
    // [B,L,F1] ++ [B,L,F2] along the feature axis.
    const std::size_t b = features[0].dim(0), len = features[0].dim(1);
    std::size_t width = 0;
    for (const auto& f : features) width += f.dim(2);
    merged = Tensor({b, len, width});
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t t = 0; t < len; ++t) {
        std::size_t off = 0;
        for (const auto& f : features) {
          for (std::size_t c = 0; c < f.dim(2); ++c) merged.at(i, t, off + c) = f.at(i, t, c);
          off += f.dim(2);
        }
      }
  } else {
    const std::size_t b = features[0].dim(0);
    std::size_t width = 0;
    for (const auto& f : features) width += f.dim(1);
    merged = Tensor({b, width});
    for (std::size_t i = 0; i < b; ++i) {
      std::size_t off = 0;
      for (const auto& f : features) {
        for (std::size_t c = 0; c < f.dim(1); ++c) merged.at(i, off + c) = f.at(i, c);
        off += f.dim(1);
      }
    }
  }
  return classifier_->forward(merged, mode);
}

Tensor FusionModel::backward(const Tensor& grad_logits) {
  Tensor grad_merged = classifier_->backward(grad_logits);
  Tensor grad_input(last_input_shape_);
  const std::size_t batch = last_input_shape_[0], w_len = last_input_shape_[1];

  std::size_t off = 0;
  for (std::size_t bi = 0; bi < branches_.size(); ++bi) {
    Tensor slice(branch_out_shapes_[bi]);
    if (branches_.size() > 1) {
      if (concat_over_time_) {
        const std::size_t len = slice.dim(1), width = slice.dim(2);
        for (std::size_t i = 0; i < batch; ++i)
          for (std::size_t t = 0; t < len; ++t)
            for (std::size_t c = 0; c < width; ++c) slice.at(i, t, c) = grad_merged.at(i, t, off + c);
        off += width;
      } else {
        const std::size_t width = slice.dim(1);
        for (std::size_t i = 0; i < batch; ++i)
          for (std::size_t c = 0; c < width; ++c) slice.at(i, c) = grad_merged.at(i, off + c);
        off += width;
      }
    } else {
      slice = grad_merged;
    }
    Tensor gx = branches_[bi].stack->backward(slice);  // [B,W,C_branch]
    const auto& idx = branches_[bi].channel_indices;
    for (std::size_t i = 0; i < batch; ++i)
      for (std::size_t t = 0; t < w_len; ++t)
        for (std::size_t c = 0; c < idx.size(); ++c) grad_input.at(i, t, idx[c]) += gx.at(i, t, c);
  }
  return grad_input;
}

void FusionModel::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    branches_[i].stack->collect_params(out, prefix + ".extractor" + std::to_string(i));
  }
  classifier_->collect_params(out, prefix + ".classifier");
}

void FusionModel::collect_state(std::vector<ParamRef>& out, const std::string& prefix) {
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    branches_[i].stack->collect_state(out, prefix + ".extractor" + std::to_string(i));
  }
  classifier_->collect_state(out, prefix + ".classifier");
}

std::vector<ParamRef> FusionModel::parameters() {
  std::vector<ParamRef> params;
  collect_params(params, "model");
  return params;
}

std::size_t FusionModel::count_parameters() {
  std::size_t total = 0;
  for (const auto& p : parameters()) total += p.tensor->size();
  return total;
}

void FusionModel::save(const std::string& path) {
  std::vector<ParamRef> refs;
  collect_params(refs, "model");
  collect_state(refs, "model");
  std::vector<std::pair<std::string, const Tensor*>> tensors;
  for (const auto& r : refs) tensors.emplace_back(r.name, r.tensor);

  nlohmann::json bn_flags = nlohmann::json::array();
  auto record = [&](BatchNorm1D& bn) { bn_flags.push_back(bn.has_running_stats()); };
  for (auto& b : branches_) walk_batchnorms(*b.stack, record);
  walk_batchnorms(*classifier_, record);

  nlohmann::json header = {{"format", "cfh-model"},
                           {"format_version", 1},
                           {"model_spec", spec_.to_json()},
                           {"bn_initialized", bn_flags}};
  write_tensor_file(path, header, tensors);
}

std::unique_ptr<FusionModel> FusionModel::load(const std::string& path) {
  TensorFile file = read_tensor_file(path);
  if (file.header.value("format", "") != "cfh-model") {
    throw FormatError("'" + path + "' is not a model file");
  }
  ModelSpec spec = ModelSpec::from_json(file.header.at("model_spec"));
  auto model = std::make_unique<FusionModel>(std::move(spec));

  std::vector<ParamRef> refs;
  model->collect_params(refs, "model");
  model->collect_state(refs, "model");
  if (refs.size() != file.tensors.size()) {
    throw FormatError("'" + path + "': tensor count mismatch with rebuilt model");
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    auto& [name, tensor] = file.tensors[i];
    if (name != refs[i].name || tensor.shape != refs[i].tensor->shape) {
      throw FormatError("'" + path + "': tensor '" + name + "' does not match rebuilt model");
    }
    refs[i].tensor->data = tensor.data;
  }

  const auto flags = file.header.value("bn_initialized", nlohmann::json::array());
  std::size_t fi = 0;
  auto restore = [&](BatchNorm1D& bn) {
    if (fi < flags.size() && flags[fi].get<bool>()) bn.mark_stats_loaded();
    ++fi;
  };
  for (auto& b : model->branches_) walk_batchnorms(*b.stack, restore);
  walk_batchnorms(*model->classifier_, restore);
  return model;
}

std::unique_ptr<FusionModel> FusionModel::clone() {
  auto copy = std::make_unique<FusionModel>(spec_);
  std::vector<ParamRef> src, dst;
  collect_params(src, "m");
  collect_state(src, "m");
  copy->collect_params(dst, "m");
  copy->collect_state(dst, "m");
  for (std::size_t i = 0; i < src.size(); ++i) dst[i].tensor->data = src[i].tensor->data;

  std::vector<BatchNorm1D*> from, to;
  auto grab_from = [&](BatchNorm1D& bn) { from.push_back(&bn); };
  auto grab_to = [&](BatchNorm1D& bn) { to.push_back(&bn); };
  for (auto& b : branches_) walk_batchnorms(*b.stack, grab_from);
  walk_batchnorms(*classifier_, grab_from);
  for (auto& b : copy->branches_) walk_batchnorms(*b.stack, grab_to);
  walk_batchnorms(*copy->classifier_, grab_to);
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i]->has_running_stats()) to[i]->mark_stats_loaded();
  }
  return copy;
}

}  // namespace cfh
