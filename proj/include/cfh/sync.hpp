#pragma once

#include <map>
#include <string>
#include <vector>

#include "cfh/recording.hpp"

namespace cfh {

struct ClapConfig {
  int min_peaks = 5;            // claps expected at each end of a session
  double threshold_sigma = 4.0; // threshold = mean + sigma * stddev of |acc|
  double refractory_s = 0.2;    // minimum inter-peak gap
};

/// Detected clap instants: the first and last `min_peaks` qualifying peaks
/// of the accelerometer magnitude, on the device's own timeline.
/// Accelerometer channels are those whose name contains "acc"; exactly
/// three are required. Throws SyncNotFound when either end lacks peaks.
std::vector<double> detect_clap_sync(const SensorRecording& recording, const ClapConfig& config = {});

/// Device streams concatenated after clap alignment. Channel names carry
/// "<device>." prefixes; sample t lives at start_time_s + t / rate_hz on
/// the shared (first-clap-anchored) timeline.
struct MergedStream {
  std::string session_id;
  double rate_hz = 0.0;
  double start_time_s = 0.0;
  std::vector<std::string> channel_layout;
  std::vector<std::vector<double>> samples;  // [T'][C_total]

  std::size_t num_samples() const { return samples.size(); }
  std::size_t num_channels() const { return channel_layout.size(); }
  double time_of(std::size_t index) const { return start_time_s + static_cast<double>(index) / rate_hz; }
};

/// Shifts every device so the first-clap instants coincide, crops to the
/// common overlap, and concatenates channels in device-id order.
/// `sync` maps device_id to that device's first-clap time (device
/// timeline). `first_clap_session_s` anchors the shared timeline: the
/// session time at which the first clap physically happened.
MergedStream align_devices(const std::vector<SensorRecording>& recordings,
                           const std::map<std::string, double>& sync,
                           double first_clap_session_s);

}  // namespace cfh
