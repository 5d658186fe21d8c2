#include "cfh/scheme.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

namespace cfh {

namespace {

// Derives the label index order from the mapping: base-activity order of
// first appearance, DROP excluded.
std::vector<std::string> label_order(const std::map<std::string, std::string>& mapping) {
  std::vector<std::string> order;
  for (const auto& activity : base_activities()) {
    const auto it = mapping.find(activity);
    if (it == mapping.end() || it->second == ActivityScheme::kDrop) continue;
    if (std::find(order.begin(), order.end(), it->second) == order.end()) {
      order.push_back(it->second);
    }
  }
  return order;
}

ActivityScheme make_scheme(std::string name, std::map<std::string, std::string> mapping) {
  ActivityScheme s{std::move(name), std::move(mapping), {}};
  s.labels = label_order(s.mapping);
  s.validate();
  return s;
}

std::map<std::string, std::string> posture4_mapping() {
  // Default posture mapping: CheckingMachines is lower-body work, the
  // remaining manipulation activities are upper-body work.
  std::map<std::string, std::string> m;
  for (const auto& a : base_activities()) m[a] = "UpperParts";
  m["Walking"] = "Walking";
  m["Null"] = "Null";
  m["CheckingMachines"] = "LowerParts";
  return m;
}

}  // namespace

std::size_t ActivityScheme::label_index(const std::string& label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw Error("scheme '" + name + "' has no label '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

bool ActivityScheme::has_label(const std::string& label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

void ActivityScheme::validate() const {
  for (const auto& activity : base_activities()) {
    if (mapping.find(activity) == mapping.end()) {
      throw ConfigError("scheme '" + name + "': mapping is not total, missing '" + activity + "'");
    }
  }
  for (const auto& [activity, label] : mapping) {
    if (!is_base_activity(activity)) {
      throw ConfigError("scheme '" + name + "': unknown base activity '" + activity + "'");
    }
    if (label != kDrop && !has_label(label)) {
      throw ConfigError("scheme '" + name + "': label '" + label + "' missing from label order");
    }
  }
  if (labels.empty()) throw ConfigError("scheme '" + name + "': every activity maps to DROP");
}

const std::vector<std::string>& scheme_names() {
  static const std::vector<std::string> names = {"Full12", "NoNull11", "Posture4", "Posture3",
                                                 "Binary2"};
  return names;
}

ActivityScheme builtin_scheme(const std::string& name) {
  if (name == "Full12") {
    std::map<std::string, std::string> m;
    for (const auto& a : base_activities()) m[a] = a;
    return make_scheme(name, std::move(m));
  }
  if (name == "NoNull11") {
    std::map<std::string, std::string> m;
    for (const auto& a : base_activities()) m[a] = a;
    m["Null"] = ActivityScheme::kDrop;
    return make_scheme(name, std::move(m));
  }
  if (name == "Posture4") {
    return make_scheme(name, posture4_mapping());
  }
  if (name == "Posture3") {
    auto m = posture4_mapping();
    m["Null"] = ActivityScheme::kDrop;
    return make_scheme(name, std::move(m));
  }
  if (name == "Binary2") {
    std::map<std::string, std::string> m;
    for (const auto& a : base_activities()) m[a] = "NonWalking";
    m["Walking"] = "Walking";
    return make_scheme(name, std::move(m));
  }
  throw ConfigError("unknown scheme '" + name + "' (expected one of Full12, NoNull11, Posture4, Posture3, Binary2)");
}

ActivityScheme load_scheme(const std::string& name, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scheme file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw FormatError(path + ": scheme file must be a JSON object");
  std::map<std::string, std::string> mapping;
  for (const auto& [key, value] : doc.items()) mapping[key] = value.get<std::string>();
  return make_scheme(name, std::move(mapping));
}

LabelTrack apply_scheme(const LabelTrack& track, const ActivityScheme& scheme) {
  track.validate();
  LabelTrack out;
  for (const auto& iv : track.intervals) {
    const std::string& label = scheme.mapping.at(iv.activity);
    if (label == ActivityScheme::kDrop) continue;
    out.intervals.push_back({iv.start_s, iv.end_s, label});
  }
  return out;
}

}  // namespace cfh
