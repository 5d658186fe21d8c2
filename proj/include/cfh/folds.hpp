#pragma once

#include <string>
#include <vector>

#include "cfh/errors.hpp"

namespace cfh {

struct Fold {
  std::string test_session;
  std::string val_session;
  std::vector<std::string> train_sessions;
};

struct FoldPlan {
  std::vector<std::string> sessions;
  std::vector<Fold> folds;
};

/// Leave-one-session-out folds: session i tests, session (i+1) mod n
/// validates, the rest train. Requires at least 3 sessions.
FoldPlan make_loso_folds(const std::vector<std::string>& sessions);

}  // namespace cfh
