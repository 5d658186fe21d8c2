#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfh/gradcheck.hpp"

namespace cfh {

struct VerifyEntry {
  std::string target;  // layer or architecture under check
  double max_relative_error = 0.0;
  std::string worst_location;
  bool finite = true;
};

/// Finite-difference verification of every layer kind and both full
/// architectures on randomized small shapes. `seeds` independent trials
/// per target; the reported error is the worst across trials.
std::vector<VerifyEntry> run_gradcheck_suite(std::size_t seeds, std::uint64_t base_seed = 1);

}  // namespace cfh
