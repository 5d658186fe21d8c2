#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cfh/scheme.hpp"
#include "cfh/sync.hpp"
#include "cfh/tensor.hpp"

namespace cfh {

struct Window {
  Tensor data;  // [W x C_total]
  std::size_t label = 0;
  std::string session_id;
  std::size_t start_index = 0;  // position in the merged stream
};

/// Fixed-length windows cut from one or more merged streams, labeled per
/// the scheme whose label indices `label` refers to.
struct WindowDataset {
  std::vector<Window> windows;
  std::size_t window_len = 0;
  std::size_t step = 0;
  std::vector<std::string> channel_layout;
  std::vector<std::string> warnings;

  std::size_t size() const { return windows.size(); }
  void append(const WindowDataset& other);  // layouts must agree
};

/// Slides windows of `window_len` every `step` samples over the stream.
/// The window label is the majority per-sample label over its span with
/// earlier-sample-wins tie-breaking; windows whose majority is unlabeled
/// time are omitted. `track` must already be scheme-remapped (DROP gone).
WindowDataset segment_windows(const MergedStream& stream, const LabelTrack& track,
                              const ActivityScheme& scheme, std::size_t window_len,
                              std::size_t step);

struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // floored at 1e-8
};

/// Per-channel z-score statistics over all window samples. Fit on training
/// windows only; apply with the training statistics everywhere.
ChannelStats fit_normalizer(const WindowDataset& train);
WindowDataset apply_normalizer(const WindowDataset& ds, const ChannelStats& stats);

/// Stacks windows into a batch tensor [B x W x C] plus the label vector.
void dataset_to_batch(const WindowDataset& ds, const std::vector<std::size_t>& indices,
                      Tensor& batch, std::vector<std::size_t>& labels);

}  // namespace cfh
