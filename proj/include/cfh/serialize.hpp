#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cfh/tensor.hpp"

namespace cfh {

// Self-describing binary tensor container: magic "CFH1", a length-prefixed
// UTF-8 JSON manifest, then raw little-endian 64-bit floats per tensor in
// manifest order. The manifest's "tensors" array (name + shape) is written
// by this module; everything else in `header` is the caller's.

void write_tensor_file(const std::string& path, const nlohmann::json& header,
                       const std::vector<std::pair<std::string, const Tensor*>>& tensors);

struct TensorFile {
  nlohmann::json header;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

TensorFile read_tensor_file(const std::string& path);

}  // namespace cfh
