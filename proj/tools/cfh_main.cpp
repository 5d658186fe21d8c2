// Command-line front end: synthetic corpus generation, experiment
// execution, report comparison, and gradient verification.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfh/pipeline.hpp"
#include "cfh/synth.hpp"
#include "cfh/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitUsage = 2;

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cfh::ConfigError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw cfh::ConfigError(path + ": invalid JSON: " + std::string(e.what()));
  }
  return doc;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
  const cfh::SynthConfig config = cfh::SynthConfig::from_json(load_json_file(config_path));
  const cfh::Corpus corpus = cfh::generate_corpus(config);
  cfh::write_corpus(corpus, config, out_dir);
  std::cout << "wrote " << corpus.sessions.size() << " sessions to " << out_dir << "\n";
  return kExitOk;
}

struct RunFlags {
  std::string config_path;
  std::string data_dir;
  std::string scheme;
  std::string arch;
  std::string fusion;
  std::string out_path;
  std::int64_t seed = -1;
  std::int64_t step = -1;
  std::int64_t jobs = -1;
};

cfh::ExperimentConfig merge_run_config(const RunFlags& flags) {
  cfh::ExperimentConfig config;
  if (!flags.config_path.empty()) {
    config = cfh::ExperimentConfig::from_json(load_json_file(flags.config_path));
  }
  // Flags override config-file values.
  if (!flags.data_dir.empty()) config.data_dir = flags.data_dir;
  if (!flags.scheme.empty()) config.scheme = flags.scheme;
  if (!flags.arch.empty()) config.architecture = cfh::architecture_from_string(flags.arch);
  if (!flags.fusion.empty()) config.fusion = cfh::fusion_from_string(flags.fusion);
  if (flags.seed >= 0) config.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.step >= 0) config.step = static_cast<std::size_t>(flags.step);
  if (flags.jobs >= 0) config.jobs = static_cast<std::size_t>(flags.jobs);
  if (config.data_dir.empty()) throw cfh::ConfigError("no data directory (use --data or a config file)");
  return config;
}

int cmd_run(const RunFlags& flags) {
  const cfh::ExperimentConfig config = merge_run_config(flags);
  const cfh::ActivityScheme scheme = cfh::resolve_scheme(config.scheme);
  const cfh::PreparedCorpus corpus = cfh::prepare_corpus(config.data_dir, scheme, config.step);
  for (const auto& ds : corpus.per_session) {
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
  }
  const cfh::ExperimentReport report = cfh::run_experiment(corpus, config);
  const std::string table = cfh::render_report_table({report});
  std::cout << table;
  if (!flags.out_path.empty()) {
    std::ofstream out(flags.out_path);
    if (!out) throw cfh::Error("cannot write report to '" + flags.out_path + "'");
    out << report.to_json().dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& report_paths) {
  std::vector<cfh::ExperimentReport> reports;
  for (const auto& path : report_paths) {
    reports.push_back(cfh::ExperimentReport::from_json(load_json_file(path)));
  }
  std::cout << cfh::render_comparison(reports);
  return kExitOk;
}

int cmd_gradcheck(std::size_t seeds) {
  const auto started = std::chrono::steady_clock::now();
  const auto results = cfh::run_gradcheck_suite(seeds);
  bool ok = true;
  for (const auto& e : results) {
    const bool pass = e.finite && e.max_relative_error < 1e-5;
    ok = ok && pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << e.target << "  max_rel_err=" << e.max_relative_error
              << "  (" << e.worst_location << ")\n";
  }
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
  std::cout << seeds << " seeds, " << elapsed.count() << " ms\n";
  return ok ? kExitOk : kExitPipeline;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal worker-activity-recognition pipeline"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  std::string synth_config, synth_out;
  synth->add_option("--config", synth_config, "SynthConfig JSON file")->required();
  synth->add_option("--out", synth_out, "Output corpus directory")->required();

  // run
  auto* run = app.add_subcommand("run", "Run a LOSO experiment");
  RunFlags flags;
  run->add_option("--config", flags.config_path, "ExperimentConfig JSON file");
  run->add_option("--data", flags.data_dir, "Corpus directory");
  run->add_option("--scheme", flags.scheme, "Annotation scheme (full12, nonull11, posture4, posture3, binary2)");
  run->add_option("--arch", flags.arch, "Architecture (mccnn, deepconvlstm)");
  run->add_option("--fusion", flags.fusion, "Fusion (early, late, imu-only)");
  run->add_option("--seed", flags.seed, "Experiment seed");
  run->add_option("--step", flags.step, "Sliding-window step in samples");
  run->add_option("--jobs", flags.jobs, "Concurrent folds");
  run->add_option("--out", flags.out_path, "Report JSON output path");

  // compare
  auto* compare = app.add_subcommand("compare", "Merge reports into a comparison table");
  std::vector<std::string> report_paths;
  compare->add_option("reports", report_paths, "Report JSON files")->expected(-2);

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Verify analytic gradients against finite differences");
  std::size_t seeds = 20;
  gradcheck->add_option("--seeds", seeds, "Random trials per target");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_config, synth_out);
    if (run->parsed()) return cmd_run(flags);
    if (compare->parsed()) return cmd_compare(report_paths);
    if (gradcheck->parsed()) return cmd_gradcheck(seeds);
  } catch (const cfh::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return kExitUsage;
}
