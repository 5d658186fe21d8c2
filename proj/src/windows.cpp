#include "cfh/windows.hpp"

#include <algorithm>
#include <cmath>

namespace cfh {

void WindowDataset::append(const WindowDataset& other) {
  if (windows.empty() && channel_layout.empty()) {
    *this = other;
    return;
  }
  if (other.channel_layout != channel_layout || other.window_len != window_len) {
    throw Error("WindowDataset::append: incompatible layout or window length");
  }
  windows.insert(windows.end(), other.windows.begin(), other.windows.end());
  warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
}

WindowDataset segment_windows(const MergedStream& stream, const LabelTrack& track,
                              const ActivityScheme& scheme, std::size_t window_len,
                              std::size_t step) {
  if (step < 1) throw ConfigError("segment_windows: step must be >= 1");
  if (window_len < 1) throw ConfigError("segment_windows: window_len must be >= 1");
  WindowDataset ds;
  ds.window_len = window_len;
  ds.step = step;
  ds.channel_layout = stream.channel_layout;
  const std::size_t total = stream.num_samples();
  if (window_len > total) {
    ds.warnings.push_back("session '" + stream.session_id + "': window length " +
                          std::to_string(window_len) + " exceeds stream length " +
                          std::to_string(total) + "; no windows produced");
    return ds;
  }
  // Per-sample scheme labels; num_labels() marks unlabeled time.
  const std::size_t unlabeled = scheme.num_labels();
  std::vector<std::size_t> sample_label(total, unlabeled);
  for (std::size_t t = 0; t < total; ++t) {
    const std::string label = track.label_at(stream.time_of(t));
    if (!label.empty()) sample_label[t] = scheme.label_index(label);
  }
  const std::size_t chans = stream.num_channels();
  std::vector<std::size_t> votes(unlabeled + 1);
  std::vector<std::size_t> first_seen(unlabeled + 1);
  for (std::size_t start = 0; start + window_len <= total; start += step) {
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t i = 0; i < window_len; ++i) {
      const std::size_t lab = sample_label[start + i];
      if (votes[lab] == 0) first_seen[lab] = i;
      ++votes[lab];
    }
    // Majority with earlier-occurrence tie-break.
    std::size_t best = 0;
    bool have = false;
    for (std::size_t lab = 0; lab <= unlabeled; ++lab) {
      if (votes[lab] == 0) continue;
      if (!have || votes[lab] > votes[best] ||
          (votes[lab] == votes[best] && first_seen[lab] < first_seen[best])) {
        best = lab;
        have = true;
      }
    }
    if (best == unlabeled) continue;  // majority is unlabeled time
    Window w;
    w.data = Tensor({window_len, chans});
    for (std::size_t i = 0; i < window_len; ++i) {
      const auto& row = stream.samples[start + i];
      for (std::size_t c = 0; c < chans; ++c) w.data.at(i, c) = row[c];
    }
    w.label = best;
    w.session_id = stream.session_id;
    w.start_index = start;
    ds.windows.push_back(std::move(w));
  }
  return ds;
}

ChannelStats fit_normalizer(const WindowDataset& train) {
  if (train.windows.empty()) throw Error("fit_normalizer: empty training dataset");
  const std::size_t chans = train.channel_layout.size();
  ChannelStats stats;
  stats.mean.assign(chans, 0.0);
  stats.stddev.assign(chans, 0.0);
  std::size_t count = 0;
  std::vector<double> lo(chans, 0.0), hi(chans, 0.0);
  for (std::size_t c = 0; c < chans; ++c) {
    lo[c] = hi[c] = train.windows.front().data.at(0, c);
  }
  for (const auto& w : train.windows) {
    for (std::size_t i = 0; i < w.data.dim(0); ++i)
      for (std::size_t c = 0; c < chans; ++c) {
        const double v = w.data.at(i, c);
        stats.mean[c] += v;
        lo[c] = std::min(lo[c], v);
        hi[c] = std::max(hi[c], v);
      }
    count += w.data.dim(0);
  }
  for (std::size_t c = 0; c < chans; ++c) {
    stats.mean[c] /= static_cast<double>(count);
    // An exactly constant channel z-scores to exactly zero: pin the mean to
    // the constant so summation rounding cannot leak through the floored
    // stddev division.
    if (lo[c] == hi[c]) stats.mean[c] = lo[c];
  }
  for (const auto& w : train.windows) {
    for (std::size_t i = 0; i < w.data.dim(0); ++i)
      for (std::size_t c = 0; c < chans; ++c) {
        const double d = w.data.at(i, c) - stats.mean[c];
        stats.stddev[c] += d * d;
      }
  }
  for (std::size_t c = 0; c < chans; ++c) {
    stats.stddev[c] = std::max(std::sqrt(stats.stddev[c] / static_cast<double>(count)), 1e-8);
  }
  return stats;
}

WindowDataset apply_normalizer(const WindowDataset& ds, const ChannelStats& stats) {
  if (stats.mean.size() != ds.channel_layout.size()) {
    throw ShapeError("apply_normalizer: stats cover " + std::to_string(stats.mean.size()) +
                     " channels, dataset has " + std::to_string(ds.channel_layout.size()));
  }
  WindowDataset out = ds;
  for (auto& w : out.windows) {
    for (std::size_t i = 0; i < w.data.dim(0); ++i)
      for (std::size_t c = 0; c < stats.mean.size(); ++c) {
        w.data.at(i, c) = (w.data.at(i, c) - stats.mean[c]) / stats.stddev[c];
      }
  }
  return out;
}

void dataset_to_batch(const WindowDataset& ds, const std::vector<std::size_t>& indices,
                      Tensor& batch, std::vector<std::size_t>& labels) {
  if (indices.empty()) throw Error("dataset_to_batch: empty index set");
  const std::size_t w_len = ds.window_len;
  const std::size_t chans = ds.channel_layout.size();
  batch = Tensor({indices.size(), w_len, chans});
  labels.resize(indices.size());
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const Window& w = ds.windows[indices[b]];
    std::copy(w.data.data.begin(), w.data.data.end(), batch.data.begin() + b * w_len * chans);
    labels[b] = w.label;
  }
}

}  // namespace cfh
