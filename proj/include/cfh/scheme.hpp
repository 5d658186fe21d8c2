#pragma once

#include <map>
#include <string>
#include <vector>

#include "cfh/recording.hpp"

namespace cfh {

/// Total remapping of the 12 base activities onto a scheme's label set.
/// Activities mapped to kDrop are deleted from remapped tracks.
struct ActivityScheme {
  static constexpr const char* kDrop = "DROP";

  std::string name;
  std::map<std::string, std::string> mapping;  // base activity -> label or DROP
  std::vector<std::string> labels;             // scheme label ids, index order

  std::size_t num_labels() const { return labels.size(); }
  std::size_t label_index(const std::string& label) const;  // throws on unknown
  bool has_label(const std::string& label) const;

  void validate() const;  // totality over the 12 base activities
};

// Built-in schemes: Full12, NoNull11, Posture4, Posture3, Binary2.
ActivityScheme builtin_scheme(const std::string& name);
const std::vector<std::string>& scheme_names();

// Scheme mapping file: JSON object activity -> label or "DROP".
ActivityScheme load_scheme(const std::string& name, const std::string& path);

// Remaps a track; DROP intervals are removed.
LabelTrack apply_scheme(const LabelTrack& track, const ActivityScheme& scheme);

}  // namespace cfh
