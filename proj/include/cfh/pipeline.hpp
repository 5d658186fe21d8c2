#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfh/folds.hpp"
#include "cfh/model.hpp"
#include "cfh/report.hpp"
#include "cfh/scheme.hpp"
#include "cfh/train.hpp"
#include "cfh/windows.hpp"

namespace cfh {

/// One full experiment: corpus location, scheme, model wiring, and the
/// training hyperparameters. Flags override config-file values upstream.
struct ExperimentConfig {
  std::string data_dir;
  std::string scheme = "Full12";
  Architecture architecture = Architecture::MCCNN;
  FusionKind fusion = FusionKind::EarlyData;
  std::uint64_t seed = 0;
  std::size_t step = 0;  // 0 = rate default (1 @ 25 Hz, 4 @ 100 Hz)
  TrainHyper hyper;
  // Model overrides; empty vectors mean architecture defaults.
  std::vector<std::size_t> conv_filters;
  std::size_t lstm_hidden = 128;
  std::size_t dense_hidden = 128;
  double dropout_p = 0.5;
  std::size_t jobs = 1;

  static ExperimentConfig from_json(const nlohmann::json& doc);
};

/// Session-segmented windows plus the shared layout, after sync/alignment
/// and scheme remapping but before normalization.
struct PreparedCorpus {
  std::vector<std::string> session_ids;
  std::vector<WindowDataset> per_session;  // parallel to session_ids
  std::vector<std::string> channel_layout;
  double rate_hz = 0.0;
  std::size_t window_len = 0;
  ActivityScheme scheme;
};

/// Loads sessions/<id>/<device>.csv + labels.json from `data_dir`, runs
/// clap sync and alignment per session, remaps labels, and segments.
PreparedCorpus prepare_corpus(const std::string& data_dir, const ActivityScheme& scheme,
                              std::size_t step);

/// Builtin scheme lookup with case-insensitive name matching.
ActivityScheme resolve_scheme(const std::string& name);

/// LOSO experiment over a prepared corpus: per-fold normalization fit on
/// train sessions only, training with early stopping, evaluation on the
/// held-out session, mean ± std aggregation.
ExperimentReport run_experiment(const PreparedCorpus& corpus, const ExperimentConfig& config);

ModelSpec model_spec_for(const PreparedCorpus& corpus, const ExperimentConfig& config);

}  // namespace cfh
