#include "cfh/recording.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cfh {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw FormatError(where + ": non-numeric cell '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

const std::vector<std::string>& base_activities() {
  static const std::vector<std::string> names = {
      "Null",        "PressingButton", "SlidingDoorlock", "OpeningDoor",
      "ClosingDoor", "CheckingMachines", "Walking",       "TakingKey",
      "RotatingKey", "PlacingKeyBack", "CheckingDoorlock", "TouchingScreen"};
  return names;
}

bool is_base_activity(const std::string& name) {
  const auto& all = base_activities();
  return std::find(all.begin(), all.end(), name) != all.end();
}

void SensorRecording::validate() const {
  if (rate_hz <= 0.0) throw FormatError("recording '" + device_id + "': rate_hz must be positive");
  if (samples.empty()) throw FormatError("recording '" + device_id + "': no samples (T must be >= 1)");
  std::set<std::string> seen;
  for (const auto& name : channels) {
    if (!seen.insert(name).second) {
      throw FormatError("recording '" + device_id + "': duplicate channel name '" + name + "'");
    }
  }
  for (std::size_t t = 0; t < samples.size(); ++t) {
    if (samples[t].size() != channels.size()) {
      throw FormatError("recording '" + device_id + "': row " + std::to_string(t) + " has " +
                        std::to_string(samples[t].size()) + " values, header declares " +
                        std::to_string(channels.size()) + " channels");
    }
  }
}

void LabelTrack::validate(bool restrict_vocabulary) const {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    if (iv.start_s >= iv.end_s) {
      throw FormatError("label interval " + std::to_string(i) + ": start " +
                        format_double(iv.start_s) + " not before end " + format_double(iv.end_s));
    }
    if (i > 0 && intervals[i - 1].end_s > iv.start_s + 1e-12) {
      throw FormatError("label intervals " + std::to_string(i - 1) + " and " + std::to_string(i) +
                        " overlap or are unsorted");
    }
    if (restrict_vocabulary && !is_base_activity(iv.activity)) {
      throw FormatError("label interval " + std::to_string(i) + ": unknown activity '" +
                        iv.activity + "'");
    }
  }
}

std::string LabelTrack::label_at(double time_s) const {
  for (const auto& iv : intervals) {
    if (time_s >= iv.start_s && time_s < iv.end_s) return iv.activity;
    if (iv.start_s > time_s) break;
  }
  return "";
}

SensorRecording load_recording(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open recording '" + path + "'");
  SensorRecording rec;
  std::string line;
  std::size_t line_no = 0;
  bool have_channels = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw FormatError(where + ": malformed header line '" + line + "'");
      const std::string key = line.substr(1, eq - 1);
      const std::string value = line.substr(eq + 1);
      if (key == "subject") rec.subject_id = value;
      else if (key == "session") rec.session_id = value;
      else if (key == "device") rec.device_id = value;
      else if (key == "rate_hz") rec.rate_hz = parse_double(value, where);
      else if (key == "start_time_s") rec.start_time_s = parse_double(value, where);
      else throw FormatError(where + ": unknown header key '" + key + "'");
      continue;
    }
    if (!have_channels) {
      rec.channels = split_csv(line);
      have_channels = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != rec.channels.size()) {
      throw FormatError(where + ": row has " + std::to_string(fields.size()) +
                        " values, header declares " + std::to_string(rec.channels.size()) +
                        " channels");
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      row[c] = parse_double(fields[c], where + " column " + std::to_string(c + 1));
    }
    rec.samples.push_back(std::move(row));
  }
  if (!have_channels) throw FormatError(path + ": missing channel header row");
  rec.validate();
  return rec;
}

void save_recording(const SensorRecording& rec, const std::string& path) {
  rec.validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "#subject=" << rec.subject_id << "\n";
  out << "#session=" << rec.session_id << "\n";
  out << "#device=" << rec.device_id << "\n";
  out << "#rate_hz=" << format_double(rec.rate_hz) << "\n";
  out << "#start_time_s=" << format_double(rec.start_time_s) << "\n";
  for (std::size_t c = 0; c < rec.channels.size(); ++c) {
    if (c) out << ",";
    out << rec.channels[c];
  }
  out << "\n";
  for (const auto& row : rec.samples) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ",";
      out << format_double(row[c]);
    }
    out << "\n";
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

LabelTrack load_label_track(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open label file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": invalid JSON: " + e.what());
  }
  if (!doc.is_array()) throw FormatError(path + ": label file must be a JSON array");
  LabelTrack track;
  for (const auto& item : doc) {
    track.intervals.push_back({item.at("start_s").get<double>(), item.at("end_s").get<double>(),
                               item.at("activity").get<std::string>()});
  }
  track.validate();
  return track;
}

void save_label_track(const LabelTrack& track, const std::string& path) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& iv : track.intervals) {
    doc.push_back({{"start_s", iv.start_s}, {"end_s", iv.end_s}, {"activity", iv.activity}});
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << doc.dump(2) << "\n";
}

}  // namespace cfh
