#include "cfh/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

namespace cfh {

namespace {

const std::vector<std::string>& proposed_channels() {
  static const std::vector<std::string> names = {"acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y",
                                                 "gyro_z", "mag_x", "mag_y", "mag_z", "bcs"};
  return names;
}

const std::vector<std::string>& watch_channels() {
  static const std::vector<std::string> names = {"acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y",
                                                 "gyro_z", "mag_x", "mag_y", "mag_z"};
  return names;
}

bool is_bcs_channel(const std::string& name) { return name.find("bcs") != std::string::npos; }
bool is_acc_channel(const std::string& name) { return name.find("acc") != std::string::npos; }

}  // namespace

std::string to_string(SeparabilityMode m) {
  switch (m) {
    case SeparabilityMode::ImuDiscriminative: return "imu";
    case SeparabilityMode::BcsDiscriminative: return "bcs";
    case SeparabilityMode::Both: return "both";
  }
  return "?";
}

SeparabilityMode separability_from_string(const std::string& s) {
  if (s == "imu") return SeparabilityMode::ImuDiscriminative;
  if (s == "bcs") return SeparabilityMode::BcsDiscriminative;
  if (s == "both") return SeparabilityMode::Both;
  throw ConfigError("unknown separability mode '" + s + "' (expected imu, bcs, or both)");
}

void SynthConfig::validate() const {
  if (num_sessions == 0) throw ConfigError("SynthConfig: num_sessions must be >= 1");
  if (session_duration_s <= 0.0) throw ConfigError("SynthConfig: session duration must be positive");
  if (rate_hz != 25.0 && rate_hz != 100.0) {
    throw ConfigError("SynthConfig: rate_hz must be 25 or 100");
  }
  if (devices.empty()) throw ConfigError("SynthConfig: no devices");
  for (const auto& d : devices) {
    if (d.kind != "proposed" && d.kind != "watch") {
      throw ConfigError("SynthConfig: device '" + d.device_id + "' has unknown kind '" + d.kind + "'");
    }
  }
  if (script.empty()) throw ConfigError("SynthConfig: empty script");
  double script_total = 0.0;
  for (const auto& e : script) {
    if (e.duration_s <= 0.0) throw ConfigError("SynthConfig: script durations must be positive");
    script_total += e.duration_s;
    bool known = false;
    for (const auto& a : activities) known = known || a.activity == e.activity;
    if (!known) throw ConfigError("SynthConfig: script activity '" + e.activity + "' has no signature");
  }
  if (script_total > session_duration_s + 1e-9) {
    throw ConfigError("SynthConfig: script (" + std::to_string(script_total) +
                      " s) longer than session duration (" + std::to_string(session_duration_s) + " s)");
  }
  for (const auto& a : activities) {
    if (!is_base_activity(a.activity)) {
      throw ConfigError("SynthConfig: '" + a.activity + "' is not one of the 12 base activities");
    }
    if (a.imu_freq_hz >= rate_hz / 2.0 || a.bcs_freq_hz >= rate_hz / 2.0) {
      throw ConfigError("SynthConfig: signature frequency for '" + a.activity +
                        "' is at or above Nyquist (" + std::to_string(rate_hz / 2.0) + " Hz)");
    }
  }
}

nlohmann::json SynthConfig::to_json() const {
  nlohmann::json devs = nlohmann::json::array();
  for (const auto& d : devices) {
    devs.push_back({{"device_id", d.device_id}, {"kind", d.kind}, {"clock_offset_s", d.clock_offset_s}});
  }
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& a : activities) {
    acts.push_back({{"activity", a.activity},
                    {"imu_freq_hz", a.imu_freq_hz},
                    {"bcs_freq_hz", a.bcs_freq_hz},
                    {"amplitude", a.amplitude},
                    {"noise_std", a.noise_std}});
  }
  nlohmann::json scr = nlohmann::json::array();
  for (const auto& e : script) scr.push_back({{"activity", e.activity}, {"duration_s", e.duration_s}});
  return {{"seed", seed},
          {"num_sessions", num_sessions},
          {"session_duration_s", session_duration_s},
          {"rate_hz", rate_hz},
          {"devices", devs},
          {"activities", acts},
          {"separability_mode", to_string(separability_mode)},
          {"script", scr},
          {"first_clap_s", first_clap_s},
          {"claps_per_end", claps_per_end},
          {"clap_spacing_s", clap_spacing_s},
          {"imu_common_freq_hz", imu_common_freq_hz},
          {"imu_common_amplitude", imu_common_amplitude}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& doc) {
  SynthConfig c;
  c.seed = doc.value("seed", std::uint64_t{0});
  c.num_sessions = doc.at("num_sessions").get<std::size_t>();
  c.session_duration_s = doc.at("session_duration_s").get<double>();
  c.rate_hz = doc.at("rate_hz").get<double>();
  for (const auto& d : doc.at("devices")) {
    c.devices.push_back({d.at("device_id").get<std::string>(), d.at("kind").get<std::string>(),
                         d.value("clock_offset_s", 0.0)});
  }
  for (const auto& a : doc.at("activities")) {
    c.activities.push_back({a.at("activity").get<std::string>(), a.value("imu_freq_hz", 0.0),
                            a.value("bcs_freq_hz", 0.0), a.value("amplitude", 1.0),
                            a.value("noise_std", 0.1)});
  }
  c.separability_mode = separability_from_string(doc.at("separability_mode").get<std::string>());
  for (const auto& e : doc.at("script")) {
    c.script.push_back({e.at("activity").get<std::string>(), e.at("duration_s").get<double>()});
  }
  c.first_clap_s = doc.value("first_clap_s", 2.0);
  c.claps_per_end = doc.value("claps_per_end", 5);
  c.clap_spacing_s = doc.value("clap_spacing_s", 0.3);
  c.imu_common_freq_hz = doc.value("imu_common_freq_hz", 3.0);
  c.imu_common_amplitude = doc.value("imu_common_amplitude", 1.0);
  c.validate();
  return c;
}

std::vector<ScriptSegment> expand_script(const SynthConfig& config) {
  const auto total = static_cast<std::size_t>(std::llround(config.session_duration_s * config.rate_hz));
  std::vector<ScriptSegment> segments;
  std::size_t cursor = 0;
  std::size_t idx = 0;
  while (cursor < total) {
    const auto& entry = config.script[idx % config.script.size()];
    const auto len = static_cast<std::size_t>(std::llround(entry.duration_s * config.rate_hz));
    const std::size_t end = std::min(total, cursor + std::max<std::size_t>(len, 1));
    segments.push_back({entry.activity, cursor, end});
    cursor = end;
    ++idx;
  }
  return segments;
}

namespace {

struct SegmentWave {
  double freq_imu = 0.0;   // 0 disables the sinusoid
  double freq_bcs = 0.0;
  double amp_imu = 0.0;
  double amp_bcs = 0.0;
  double noise_std = 0.1;
  double phase = 0.0;
};

SegmentWave wave_for(const SynthConfig& config, const std::string& activity, double phase) {
  const ActivitySignature* sig = nullptr;
  for (const auto& a : config.activities) {
    if (a.activity == activity) sig = &a;
  }
  SegmentWave w;
  w.phase = phase;
  w.noise_std = sig->noise_std;
  switch (config.separability_mode) {
    case SeparabilityMode::ImuDiscriminative:
      w.freq_imu = sig->imu_freq_hz;
      w.amp_imu = sig->amplitude;
      break;
    case SeparabilityMode::BcsDiscriminative:
      // IMU side identical across activities by construction.
      w.freq_imu = config.imu_common_freq_hz;
      w.amp_imu = config.imu_common_amplitude;
      w.freq_bcs = sig->bcs_freq_hz;
      w.amp_bcs = sig->amplitude;
      break;
    case SeparabilityMode::Both:
      w.freq_imu = sig->imu_freq_hz;
      w.amp_imu = sig->amplitude;
      w.freq_bcs = sig->bcs_freq_hz;
      w.amp_bcs = sig->amplitude;
      break;
  }
  return w;
}

}  // namespace

Corpus generate_corpus(const SynthConfig& config) {
  config.validate();
  Corpus corpus;
  corpus.rate_hz = config.rate_hz;
  corpus.first_clap_s = config.first_clap_s;
  for (const auto& d : config.devices) corpus.true_offsets[d.device_id] = d.clock_offset_s;

  const double rate = config.rate_hz;
  const double duration = config.session_duration_s;
  const auto samples_per_session = static_cast<std::size_t>(std::llround(duration * rate));

  double max_amp = 1.0;
  for (const auto& a : config.activities) max_amp = std::max(max_amp, a.amplitude);
  max_amp = std::max(max_amp, config.imu_common_amplitude);
  const double clap_amp = 12.0 * max_amp;

  // Clap instants on the session (true) clock.
  std::vector<double> clap_times;
  for (int k = 0; k < config.claps_per_end; ++k) {
    clap_times.push_back(config.first_clap_s + k * config.clap_spacing_s);
  }
  for (int k = config.claps_per_end - 1; k >= 0; --k) {
    clap_times.push_back(duration - config.first_clap_s - k * config.clap_spacing_s);
  }

  std::mt19937_64 master(config.seed);
  for (std::size_t s = 0; s < config.num_sessions; ++s) {
    SessionData session;
    session.session_id = "S" + std::to_string(s + 1);
    const auto segments = expand_script(config);

    // Session-level randomness: one phase per (segment, channel slot).
    std::mt19937_64 session_rng(master());
    std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
    std::vector<double> segment_phase(segments.size());
    for (auto& p : segment_phase) p = phase_dist(session_rng);
    std::vector<SegmentWave> segment_wave(segments.size());
    for (std::size_t i = 0; i < segments.size(); ++i) {
      segment_wave[i] = wave_for(config, segments[i].activity, segment_phase[i]);
    }

    for (const auto& iv : segments) {
      session.labels.intervals.push_back({static_cast<double>(iv.start_sample) / rate,
                                          static_cast<double>(iv.end_sample) / rate, iv.activity});
    }

    for (const auto& dev : config.devices) {
      SensorRecording rec;
      rec.subject_id = "synthetic";
      rec.session_id = session.session_id;
      rec.device_id = dev.device_id;
      rec.rate_hz = rate;
      rec.start_time_s = 0.0;  // the device believes its own clock
      rec.channels = dev.kind == "proposed" ? proposed_channels() : watch_channels();
      rec.samples.assign(samples_per_session, std::vector<double>(rec.channels.size(), 0.0));

      std::mt19937_64 noise_rng(session_rng());
      std::normal_distribution<double> gauss(0.0, 1.0);

      for (std::size_t n = 0; n < samples_per_session; ++n) {
        // Device sample n sees the session at true time n/rate - offset.
        const double tau = static_cast<double>(n) / rate - dev.clock_offset_s;
        const long seg_sample = std::lround(std::floor(tau * rate));
        const ScriptSegment* seg = nullptr;
        std::size_t seg_idx = 0;
        if (seg_sample >= 0 && static_cast<std::size_t>(seg_sample) < samples_per_session) {
          for (std::size_t i = 0; i < segments.size(); ++i) {
            if (static_cast<std::size_t>(seg_sample) < segments[i].end_sample) {
              seg = &segments[i];
              seg_idx = i;
              break;
            }
          }
        }
        for (std::size_t c = 0; c < rec.channels.size(); ++c) {
          double v = 0.0;
          double noise_std = 0.05;  // idle noise outside the session span
          if (seg) {
            const SegmentWave& w = segment_wave[seg_idx];
            noise_std = w.noise_std;
            const double t_local = tau - static_cast<double>(seg->start_sample) / rate;
            const double chan_phase = w.phase + 0.7 * static_cast<double>(c);
            if (is_bcs_channel(rec.channels[c])) {
              if (w.freq_bcs > 0.0) {
                v = w.amp_bcs * std::sin(2.0 * std::numbers::pi * w.freq_bcs * t_local + chan_phase);
              }
            } else if (w.freq_imu > 0.0) {
              v = w.amp_imu * std::sin(2.0 * std::numbers::pi * w.freq_imu * t_local + chan_phase);
            }
          }
          rec.samples[n][c] = v + noise_std * gauss(noise_rng);
        }
      }

      // Clap spikes: 3-sample half-cosine pulses on all accelerometer axes.
      for (const double tc : clap_times) {
        const long center = std::lround((tc + dev.clock_offset_s) * rate);
        for (long dk = -1; dk <= 1; ++dk) {
          const long n = center + dk;
          if (n < 0 || n >= static_cast<long>(samples_per_session)) continue;
          const double pulse = clap_amp * std::cos(0.5 * std::numbers::pi * static_cast<double>(dk) / 1.5);
          for (std::size_t c = 0; c < rec.channels.size(); ++c) {
            if (is_acc_channel(rec.channels[c])) rec.samples[static_cast<std::size_t>(n)][c] += pulse;
          }
        }
      }
      session.recordings.push_back(std::move(rec));
    }
    corpus.sessions.push_back(std::move(session));
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const SynthConfig& config, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir + "/synth_config.json");
    if (!out) throw Error("cannot write '" + out_dir + "/synth_config.json'");
    out << config.to_json().dump(2) << "\n";
  }
  for (const auto& session : corpus.sessions) {
    const fs::path dir = fs::path(out_dir) / "sessions" / session.session_id;
    fs::create_directories(dir);
    for (const auto& rec : session.recordings) {
      save_recording(rec, (dir / (rec.device_id + ".csv")).string());
    }
    save_label_track(session.labels, (dir / "labels.json").string());
  }
}

std::vector<std::optional<std::size_t>> expected_majority_labels(const SynthConfig& config,
                                                                 const ActivityScheme& scheme,
                                                                 std::size_t window_len,
                                                                 std::size_t step) {
  const auto segments = expand_script(config);
  const auto total = static_cast<std::size_t>(std::llround(config.session_duration_s * config.rate_hz));
  // Per-sample scheme label straight from the script; DROP marked past-end.
  const std::size_t dropped = scheme.num_labels();
  std::vector<std::size_t> sample_label(total, dropped);
  for (const auto& seg : segments) {
    const std::string& mapped = scheme.mapping.at(seg.activity);
    if (mapped == ActivityScheme::kDrop) continue;
    const std::size_t id = scheme.label_index(mapped);
    for (std::size_t t = seg.start_sample; t < seg.end_sample && t < total; ++t) sample_label[t] = id;
  }
  std::vector<std::optional<std::size_t>> out;
  if (window_len > total) return out;
  std::vector<std::size_t> votes(dropped + 1), first(dropped + 1);
  for (std::size_t start = 0; start + window_len <= total; start += step) {
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t i = 0; i < window_len; ++i) {
      const std::size_t lab = sample_label[start + i];
      if (votes[lab] == 0) first[lab] = i;
      ++votes[lab];
    }
    std::size_t best = dropped;
    bool have = false;
    for (std::size_t lab = 0; lab <= dropped; ++lab) {
      if (votes[lab] == 0) continue;
      if (!have || votes[lab] > votes[best] || (votes[lab] == votes[best] && first[lab] < first[best])) {
        best = lab;
        have = true;
      }
    }
    out.push_back(best == dropped ? std::nullopt : std::optional<std::size_t>{best});
  }
  return out;
}

}  // namespace cfh
