#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cfh/errors.hpp"

namespace cfh {

/// One device's timestamped multichannel stream. Sample t lives at
/// start_time_s + t / rate_hz on the device's own clock.
struct SensorRecording {
  std::string subject_id;
  std::string session_id;
  std::string device_id;
  double rate_hz = 0.0;
  std::vector<std::string> channels;
  std::vector<std::vector<double>> samples;  // [T][C]
  double start_time_s = 0.0;

  std::size_t num_samples() const { return samples.size(); }
  std::size_t num_channels() const { return channels.size(); }
  double time_of(std::size_t index) const { return start_time_s + static_cast<double>(index) / rate_hz; }

  void validate() const;  // throws FormatError on invariant violations
};

struct LabelInterval {
  double start_s;
  double end_s;
  std::string activity;
};

/// Ground-truth activity intervals: non-overlapping, sorted by start.
struct LabelTrack {
  std::vector<LabelInterval> intervals;

  void validate(bool restrict_vocabulary = true) const;
  // Activity covering time t, or empty when t falls in unlabeled time.
  std::string label_at(double time_s) const;
};

// The 12 base activities; index order is the canonical label id order.
const std::vector<std::string>& base_activities();
bool is_base_activity(const std::string& name);

// Recording CSV format: '#key=value' header lines (subject, session,
// device, rate_hz, start_time_s), a channel-name row, then one row per
// sample. UTF-8, '.' decimal separator.
SensorRecording load_recording(const std::string& path);
void save_recording(const SensorRecording& rec, const std::string& path);

// Label file: JSON array of {"start_s", "end_s", "activity"}.
LabelTrack load_label_track(const std::string& path);
void save_label_track(const LabelTrack& track, const std::string& path);

}  // namespace cfh
