#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfh/recording.hpp"
#include "cfh/scheme.hpp"

namespace cfh {

enum class SeparabilityMode { ImuDiscriminative, BcsDiscriminative, Both };

std::string to_string(SeparabilityMode m);
SeparabilityMode separability_from_string(const std::string& s);

struct DeviceConfig {
  std::string device_id;
  std::string kind;  // "proposed" (10 channels incl. bcs) or "watch" (9 channels)
  double clock_offset_s = 0.0;
};

/// Per-activity channel signature: a sinusoid per modality plus white
/// noise. Which sinusoid is emitted depends on the separability mode.
struct ActivitySignature {
  std::string activity;
  double imu_freq_hz = 0.0;
  double bcs_freq_hz = 0.0;
  double amplitude = 1.0;
  double noise_std = 0.1;
};

struct ScriptEntry {
  std::string activity;
  double duration_s = 0.0;
};

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t num_sessions = 5;
  double session_duration_s = 60.0;
  double rate_hz = 25.0;
  std::vector<DeviceConfig> devices;
  std::vector<ActivitySignature> activities;
  SeparabilityMode separability_mode = SeparabilityMode::ImuDiscriminative;
  // Cycled until the session is filled; one full pass must fit.
  std::vector<ScriptEntry> script;

  // Clap protocol: five spikes at each end, first at first_clap_s on the
  // session clock. Shared with the ingestion side as the sync anchor.
  double first_clap_s = 2.0;
  int claps_per_end = 5;
  double clap_spacing_s = 0.3;

  // Non-discriminative IMU signature (BcsDiscriminative mode): identical
  // across activities by construction.
  double imu_common_freq_hz = 3.0;
  double imu_common_amplitude = 1.0;

  void validate() const;
  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& doc);
};

struct SessionData {
  std::string session_id;
  std::vector<SensorRecording> recordings;  // one per device, offsets applied
  LabelTrack labels;                        // session (true) timeline
};

struct Corpus {
  std::vector<SessionData> sessions;
  std::map<std::string, double> true_offsets;  // device_id -> clock_offset_s
  double rate_hz = 0.0;
  double first_clap_s = 0.0;
};

/// Deterministic function of the config: same seed, same corpus.
Corpus generate_corpus(const SynthConfig& config);

/// Directory layout: <out_dir>/sessions/<session>/<device>.csv + labels.json,
/// plus the config echoed to <out_dir>/synth_config.json.
void write_corpus(const Corpus& corpus, const SynthConfig& config, const std::string& out_dir);

/// Script-derived ground-truth window labels (scheme index per window,
/// nullopt where the window is omitted), computed by integer sample
/// counting straight from the script — independent of the segmentation
/// pipeline it checks.
std::vector<std::optional<std::size_t>> expected_majority_labels(const SynthConfig& config,
                                                                 const ActivityScheme& scheme,
                                                                 std::size_t window_len,
                                                                 std::size_t step);

/// The script cycled to fill one session, as (activity, start_sample,
/// end_sample) triples.
struct ScriptSegment {
  std::string activity;
  std::size_t start_sample;
  std::size_t end_sample;
};
std::vector<ScriptSegment> expand_script(const SynthConfig& config);

}  // namespace cfh
