// Command-line front end: synth, extract, lbptop, eval, report.

#include "tcof/error.hpp"
#include "tcof/parallel.hpp"
#include "tcof/pipeline.hpp"
#include "tcof/report.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Flags {
  std::string manifest;
  std::string network = "default";
  std::string weights;
  std::string variant;
  std::size_t tau = 3;
  std::string frames = "all";
  std::string mean_source = "dataset";
  std::string mean_file;
  std::string classifier = "svm";
  std::string metric = "euclidean";
  double c = 40.0;
  std::string cache_dir;
  std::string output;
  std::uint64_t seed = 0;
  std::size_t workers = tcof::default_workers();
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--manifest", f.manifest, "Dataset manifest (<video dir>\\t<class> per line)")->required();
  cmd->add_option("--frames", f.frames, "Frame subset: first, 1/8, 1/4, 1/2, all")->capture_default_str();
  cmd->add_option("--cache-dir", f.cache_dir, "Feature cache directory (default $TCOF_CACHE_DIR or ./tcof_cache)");
  cmd->add_option("--workers", f.workers, "Worker threads")->capture_default_str();
}

tcof::RunConfig to_config(const Flags& f, const CLI::App* cmd, tcof::FeatureKind fallback_kind) {
  tcof::RunConfig cfg;
  cfg.manifest = f.manifest;
  cfg.network = f.network;
  if (!f.weights.empty()) cfg.weights = f.weights;
  cfg.kind = f.variant.empty() ? fallback_kind : tcof::parse_feature_kind(f.variant);
  if (cmd->get_option_no_throw("--tau") && cmd->count("--tau")) cfg.tau = f.tau;
  cfg.subset = tcof::FrameSubset::parse(f.frames);
  if (f.mean_source == "dataset") {
    cfg.mean_source = tcof::MeanSource::dataset;
  } else if (f.mean_source == "file") {
    cfg.mean_source = tcof::MeanSource::file;
  } else {
    throw tcof::ConfigError("--mean-source must be dataset or file");
  }
  if (!f.mean_file.empty()) cfg.mean_file = f.mean_file;
  cfg.classifier = f.classifier;
  cfg.metric = tcof::parse_metric(f.metric);
  cfg.c = f.c;
  cfg.cache_dir = tcof::resolve_cache_dir(f.cache_dir.empty() ? std::nullopt
                                                              : std::optional<std::filesystem::path>(f.cache_dir));
  if (!f.output.empty()) cfg.output = f.output;
  cfg.seed = f.seed;
  cfg.workers = f.workers;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Video descriptors from pooled ConvNet frame features, with LOO evaluation"};
  app.require_subcommand(1);
  Flags f;

  auto* extract = app.add_subcommand("extract", "Compute per-video TCoF vectors into the cache");
  add_common(extract, f);
  extract->add_option("--network", f.network, "Network: default, test, or a spec file")->capture_default_str();
  extract->add_option("--weights", f.weights, "TNSR weights (random weights from --seed when omitted)");
  extract->add_option("--variant", f.variant, "spatial, temporal or combined")->capture_default_str();
  extract->add_option("--tau", f.tau, "Temporal lag (temporal/combined only, default 3)");
  extract->add_option("--mean-source", f.mean_source, "dataset or file")->capture_default_str();
  extract->add_option("--mean-file", f.mean_file, "TNSR with a 'mean' entry (with --mean-source file)");
  extract->add_option("--seed", f.seed, "Seed for random weights")->capture_default_str();

  auto* lbptop = app.add_subcommand("lbptop", "Compute per-video LBP-TOP descriptors into the cache");
  add_common(lbptop, f);

  auto* eval = app.add_subcommand("eval", "Leave-one-out evaluation over cached descriptors");
  add_common(eval, f);
  eval->add_option("--variant", f.variant, "spatial, temporal, combined or lbptop")->capture_default_str();
  eval->add_option("--classifier", f.classifier, "svm or nn")->capture_default_str();
  eval->add_option("--metric", f.metric, "NN metric: euclidean or chi2")->capture_default_str();
  eval->add_option("--C", f.c, "SVM trade-off parameter")->capture_default_str();
  eval->add_option("--output", f.output, "Accuracy CSV path (confusion CSV is written beside it)");

  tcof::SynthConfig synth_cfg;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled frame dataset");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--classes", synth_cfg.classes)->capture_default_str();
  synth->add_option("--videos-per-class", synth_cfg.videos_per_class)->capture_default_str();
  synth->add_option("--frames", synth_cfg.frames, "Frames per video")->capture_default_str();
  synth->add_option("--height", synth_cfg.height)->capture_default_str();
  synth->add_option("--width", synth_cfg.width)->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed)->capture_default_str();
  synth->add_flag("--force", synth_cfg.force, "Write into a non-empty directory");

  std::vector<std::string> report_files;
  auto* report = app.add_subcommand("report", "Print accuracy CSVs side by side");
  report->add_option("files", report_files, "Accuracy CSVs written by eval")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (extract->parsed()) {
      tcof::cmd_extract(to_config(f, extract, tcof::FeatureKind::spatial), std::cerr);
    } else if (lbptop->parsed()) {
      tcof::cmd_lbptop(to_config(f, lbptop, tcof::FeatureKind::lbptop), std::cerr);
    } else if (eval->parsed()) {
      const auto result = tcof::cmd_eval(to_config(f, eval, tcof::FeatureKind::spatial), std::cerr);
      std::cout << result.report_path.string() << '\n';
    } else if (synth->parsed()) {
      synth_cfg.out_dir = synth_out;
      std::cout << tcof::cmd_synth(synth_cfg).string() << '\n';
    } else if (report->parsed()) {
      std::vector<std::filesystem::path> paths(report_files.begin(), report_files.end());
      tcof::print_accuracy_tables(std::cout, paths);
    }
  } catch (const tcof::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const tcof::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
