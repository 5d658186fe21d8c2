#pragma once

#include <stdexcept>
#include <string>

namespace cfh {

// Base class for all library failures. Message carries enough location
// detail (row/column, layer name, shape) to act on without a debugger.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

struct FormatError : Error {
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Clap synchronization could not locate the required peaks.
struct SyncNotFound : Error {
  int peaks_found;
  explicit SyncNotFound(int found)
      : Error("sync not found: only " + std::to_string(found) +
              " qualifying clap peaks detected"),
        peaks_found(found) {}
};

}  // namespace cfh
