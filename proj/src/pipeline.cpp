#include "cfh/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include "cfh/sync.hpp"

namespace cfh {

namespace fs = std::filesystem;

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  ExperimentConfig c;
  if (doc.contains("data")) c.data_dir = doc["data"].get<std::string>();
  if (doc.contains("scheme")) c.scheme = doc["scheme"].get<std::string>();
  if (doc.contains("arch")) c.architecture = architecture_from_string(doc["arch"].get<std::string>());
  if (doc.contains("fusion")) c.fusion = fusion_from_string(doc["fusion"].get<std::string>());
  if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("step")) c.step = doc["step"].get<std::size_t>();
  if (doc.contains("learning_rate")) c.hyper.learning_rate = doc["learning_rate"].get<double>();
  if (doc.contains("batch_size")) c.hyper.batch_size = doc["batch_size"].get<std::size_t>();
  if (doc.contains("max_epochs")) c.hyper.max_epochs = doc["max_epochs"].get<std::size_t>();
  if (doc.contains("patience")) c.hyper.patience = doc["patience"].get<std::size_t>();
  if (doc.contains("conv_filters")) c.conv_filters = doc["conv_filters"].get<std::vector<std::size_t>>();
  if (doc.contains("lstm_hidden")) c.lstm_hidden = doc["lstm_hidden"].get<std::size_t>();
  if (doc.contains("dense_hidden")) c.dense_hidden = doc["dense_hidden"].get<std::size_t>();
  if (doc.contains("dropout_p")) c.dropout_p = doc["dropout_p"].get<double>();
  if (doc.contains("jobs")) c.jobs = doc["jobs"].get<std::size_t>();
  return c;
}

namespace {

// Scheme names are matched case-insensitively at the CLI boundary.
std::string canonical_scheme_name(const std::string& name) {
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  for (const auto& known : scheme_names()) {
    if (lower(known) == lower(name)) return known;
  }
  throw ConfigError("unknown scheme '" + name + "'");
}

double corpus_first_clap_s(const std::string& data_dir) {
  const fs::path cfg = fs::path(data_dir) / "synth_config.json";
  if (fs::exists(cfg)) {
    std::ifstream in(cfg);
    nlohmann::json doc;
    in >> doc;
    return doc.value("first_clap_s", 2.0);
  }
  return 2.0;  // recording-protocol default
}

}  // namespace

ActivityScheme resolve_scheme(const std::string& name) { return builtin_scheme(canonical_scheme_name(name)); }

PreparedCorpus prepare_corpus(const std::string& data_dir, const ActivityScheme& scheme,
                              std::size_t step) {
  const fs::path sessions_dir = fs::path(data_dir) / "sessions";
  if (!fs::is_directory(sessions_dir)) {
    throw Error("no sessions directory under '" + data_dir + "'");
  }
  const double first_clap_s = corpus_first_clap_s(data_dir);

  std::vector<std::string> session_ids;
  for (const auto& entry : fs::directory_iterator(sessions_dir)) {
    if (entry.is_directory()) session_ids.push_back(entry.path().filename().string());
  }
  std::sort(session_ids.begin(), session_ids.end());
  if (session_ids.empty()) throw Error("no sessions found under '" + sessions_dir.string() + "'");

  PreparedCorpus prepared;
  prepared.scheme = scheme;
  for (const auto& session_id : session_ids) {
    const fs::path dir = sessions_dir / session_id;
    std::vector<SensorRecording> recordings;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".csv") {
        recordings.push_back(load_recording(entry.path().string()));
      }
    }
    if (recordings.empty()) throw Error("session '" + session_id + "': no device CSV files");
    LabelTrack track = load_label_track((dir / "labels.json").string());

    std::map<std::string, double> sync;
    for (const auto& rec : recordings) {
      try {
        sync[rec.device_id] = detect_clap_sync(rec).front();
      } catch (const SyncNotFound& e) {
        throw Error("session '" + session_id + "', device '" + rec.device_id + "': " + e.what());
      }
    }
    MergedStream merged = align_devices(recordings, sync, first_clap_s);

    const auto window_len = static_cast<std::size_t>(merged.rate_hz);  // 1 second
    const std::size_t use_step = step != 0 ? step : (merged.rate_hz >= 100.0 ? 4 : 1);
    const LabelTrack remapped = apply_scheme(track, scheme);
    WindowDataset ds = segment_windows(merged, remapped, scheme, window_len, use_step);

    if (prepared.session_ids.empty()) {
      prepared.channel_layout = merged.channel_layout;
      prepared.rate_hz = merged.rate_hz;
      prepared.window_len = window_len;
    } else if (merged.channel_layout != prepared.channel_layout) {
      throw Error("session '" + session_id + "': channel layout differs from previous sessions");
    }
    prepared.session_ids.push_back(session_id);
    prepared.per_session.push_back(std::move(ds));
  }
  return prepared;
}

ModelSpec model_spec_for(const PreparedCorpus& corpus, const ExperimentConfig& config) {
  ModelSpec spec;
  spec.architecture = config.architecture;
  spec.fusion = config.fusion;
  spec.num_labels = corpus.scheme.num_labels();
  spec.window_len = corpus.window_len;
  for (const auto& name : corpus.channel_layout) {
    spec.channels.push_back({name, name.find("bcs") != std::string::npos ? Modality::BCS : Modality::IMU});
  }
  spec.conv_filters = config.conv_filters;
  spec.lstm_hidden = config.lstm_hidden;
  spec.dense_hidden = config.dense_hidden;
  spec.dropout_p = config.dropout_p;
  spec.seed = config.seed;
  spec.apply_defaults();
  spec.validate();
  return spec;
}

ExperimentReport run_experiment(const PreparedCorpus& corpus, const ExperimentConfig& config) {
  const FoldPlan plan = make_loso_folds(corpus.session_ids);
  const ModelSpec base_spec = model_spec_for(corpus, config);
  std::optional<std::size_t> walking_label;
  if (corpus.scheme.has_label("Walking")) walking_label = corpus.scheme.label_index("Walking");

  auto dataset_of = [&](const std::string& session_id) -> const WindowDataset& {
    for (std::size_t i = 0; i < corpus.session_ids.size(); ++i) {
      if (corpus.session_ids[i] == session_id) return corpus.per_session[i];
    }
    throw Error("unknown session '" + session_id + "'");
  };

  std::vector<FoldMetrics> fold_results(plan.folds.size());
  std::vector<std::string> fold_errors(plan.folds.size());

  auto run_fold = [&](std::size_t f) {
    try {
      const Fold& fold = plan.folds[f];
      WindowDataset train_ds;
      for (const auto& sid : fold.train_sessions) train_ds.append(dataset_of(sid));
      if (train_ds.size() == 0) throw Error("no labeled training windows");
      const ChannelStats stats = fit_normalizer(train_ds);
      train_ds = apply_normalizer(train_ds, stats);
      const WindowDataset val_ds = apply_normalizer(dataset_of(fold.val_session), stats);
      const WindowDataset test_ds = apply_normalizer(dataset_of(fold.test_session), stats);

      ModelSpec spec = base_spec;
      TrainHyper hyper = config.hyper;
      // Per-fold derived seeds keep folds independent yet reproducible.
      spec.seed = config.seed * 1000 + f;
      hyper.seed = config.seed * 1000 + 500 + f;
      TrainResult trained = train(spec, train_ds, val_ds, hyper, walking_label);
      EvalResult eval = evaluate(*trained.best_model, test_ds, spec.num_labels, walking_label);
      fold_results[f] = {fold.test_session, eval.metrics};
    } catch (const std::exception& e) {
      fold_errors[f] = "fold " + std::to_string(f + 1) + " (test " + plan.folds[f].test_session +
                       "): " + e.what();
    }
  };

  if (config.jobs <= 1) {
    for (std::size_t f = 0; f < plan.folds.size(); ++f) run_fold(f);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t j = 0; j < std::min(config.jobs, plan.folds.size()); ++j) {
      pool.emplace_back([&] {
        for (std::size_t f = next.fetch_add(1); f < plan.folds.size(); f = next.fetch_add(1)) {
          run_fold(f);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& err : fold_errors) {
    if (!err.empty()) throw Error(err);
  }

  Fingerprint fp{corpus.scheme.name, to_string(config.architecture), to_string(config.fusion),
                 config.seed};
  return aggregate(fp, fold_results);
}

}  // namespace cfh
