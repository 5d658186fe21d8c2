#include "cfh/sync.hpp"

#include <algorithm>
#include <cmath>

namespace cfh {

namespace {

std::vector<std::size_t> accelerometer_channels(const SensorRecording& rec) {
  std::vector<std::size_t> idx;
  for (std::size_t c = 0; c < rec.channels.size(); ++c) {
    if (rec.channels[c].find("acc") != std::string::npos) idx.push_back(c);
  }
  return idx;
}

}  // namespace

std::vector<double> detect_clap_sync(const SensorRecording& recording, const ClapConfig& config) {
  recording.validate();
  const auto acc = accelerometer_channels(recording);
  if (acc.size() != 3) {
    throw Error("detect_clap_sync: recording '" + recording.device_id + "' has " +
                std::to_string(acc.size()) + " accelerometer channels, need 3");
  }
  const std::size_t count = recording.num_samples();
  std::vector<double> magnitude(count);
  for (std::size_t t = 0; t < count; ++t) {
    double sq = 0.0;
    for (const std::size_t c : acc) {
      const double v = recording.samples[t][c];
      sq += v * v;
    }
    magnitude[t] = std::sqrt(sq);
  }
  double mean = 0.0;
  for (const double m : magnitude) mean += m;
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (const double m : magnitude) var += (m - mean) * (m - mean);
  var /= static_cast<double>(count);
  const double threshold = mean + config.threshold_sigma * std::sqrt(var);

  const auto refractory = static_cast<std::size_t>(std::ceil(config.refractory_s * recording.rate_hz));
  std::vector<std::size_t> peaks;
  std::size_t t = 0;
  while (t < count) {
    if (magnitude[t] > threshold) {
      // Take the maximum within the refractory span as the peak instant.
      std::size_t best = t;
      const std::size_t end = std::min(count, t + refractory);
      for (std::size_t u = t; u < end; ++u) {
        if (magnitude[u] > magnitude[best]) best = u;
      }
      peaks.push_back(best);
      t += refractory;
    } else {
      ++t;
    }
  }
  // Five peaks at each end; a stream with exactly five peaks total has the
  // same five as both its first and its last group.
  const auto need = static_cast<std::size_t>(config.min_peaks);
  if (peaks.size() < need) throw SyncNotFound(static_cast<int>(peaks.size()));

  std::vector<double> times;
  for (int i = 0; i < config.min_peaks; ++i) times.push_back(recording.time_of(peaks[i]));
  for (std::size_t i = peaks.size() - config.min_peaks; i < peaks.size(); ++i) {
    times.push_back(recording.time_of(peaks[i]));
  }
  return times;
}

MergedStream align_devices(const std::vector<SensorRecording>& recordings,
                           const std::map<std::string, double>& sync,
                           double first_clap_session_s) {
  if (recordings.empty()) throw Error("align_devices: no recordings");
  const double rate = recordings.front().rate_hz;
  for (const auto& rec : recordings) {
    rec.validate();
    if (rec.rate_hz != rate) {
      throw Error("align_devices: mixed sampling rates (" + std::to_string(rate) + " Hz vs " +
                  std::to_string(rec.rate_hz) + " Hz on '" + rec.device_id + "'); resampling is unsupported");
    }
    if (sync.find(rec.device_id) == sync.end()) {
      throw Error("align_devices: no sync entry for device '" + rec.device_id + "'");
    }
  }
  // Deterministic device order.
  std::vector<const SensorRecording*> ordered;
  for (const auto& rec : recordings) ordered.push_back(&rec);
  std::sort(ordered.begin(), ordered.end(),
            [](const SensorRecording* a, const SensorRecording* b) { return a->device_id < b->device_id; });

  // First-clap sample index per device, then shift so the claps coincide.
  std::vector<long> clap_index(ordered.size());
  long min_index = 0;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const double clap_s = sync.at(ordered[i]->device_id);
    clap_index[i] = std::lround((clap_s - ordered[i]->start_time_s) * rate);
    if (i == 0 || clap_index[i] < min_index) min_index = clap_index[i];
  }
  long merged_len = -1;
  std::vector<long> shift(ordered.size());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    shift[i] = clap_index[i] - min_index;
    const long avail = static_cast<long>(ordered[i]->num_samples()) - shift[i];
    if (merged_len < 0 || avail < merged_len) merged_len = avail;
  }
  if (merged_len <= 0) throw Error("align_devices: empty overlap after alignment");

  MergedStream merged;
  merged.session_id = ordered.front()->session_id;
  merged.rate_hz = rate;
  // Merged row `min_index` (pre-crop) is the first clap; anchor time there.
  merged.start_time_s = first_clap_session_s - static_cast<double>(min_index) / rate;
  for (const auto* rec : ordered) {
    for (const auto& name : rec->channels) {
      merged.channel_layout.push_back(rec->device_id + "." + name);
    }
  }
  merged.samples.assign(static_cast<std::size_t>(merged_len),
                        std::vector<double>(merged.channel_layout.size(), 0.0));
  std::size_t col = 0;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const auto& src = ordered[i]->samples;
    const std::size_t width = ordered[i]->num_channels();
    for (long t = 0; t < merged_len; ++t) {
      const auto& row = src[static_cast<std::size_t>(t + shift[i])];
      for (std::size_t c = 0; c < width; ++c) {
        merged.samples[static_cast<std::size_t>(t)][col + c] = row[c];
      }
    }
    col += width;
  }
  return merged;
}

}  // namespace cfh
