#include "cfh/folds.hpp"

#include <set>

namespace cfh {

FoldPlan make_loso_folds(const std::vector<std::string>& sessions) {
  if (sessions.size() < 3) {
    throw ConfigError("make_loso_folds: need at least 3 sessions, got " +
                      std::to_string(sessions.size()));
  }
  const std::set<std::string> unique(sessions.begin(), sessions.end());
  if (unique.size() != sessions.size()) {
    throw ConfigError("make_loso_folds: duplicate session ids");
  }
  FoldPlan plan;
  plan.sessions = sessions;
  const std::size_t n = sessions.size();
  for (std::size_t i = 0; i < n; ++i) {
    Fold fold;
    fold.test_session = sessions[i];
    fold.val_session = sessions[(i + 1) % n];
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && j != (i + 1) % n) fold.train_sessions.push_back(sessions[j]);
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

}  // namespace cfh
