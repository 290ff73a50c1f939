#pragma once

#include "tcof/classify.hpp"
#include "tcof/ingest.hpp"
#include "tcof/network.hpp"
#include "tcof/pooling.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tcof {

// Descriptor a cache entry or an evaluation works on.
enum class FeatureKind { spatial, temporal, combined, lbptop };

std::string to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

enum class MeanSource { dataset, file };

struct RunConfig {
  std::filesystem::path manifest;
  std::string network = "default";  // "default", "test", or a spec file
  std::optional<std::filesystem::path> weights;  // random weights from `seed` when absent
  FeatureKind kind = FeatureKind::spatial;
  std::optional<std::size_t> tau;  // temporal lag; 3 when unset
  FrameSubset subset;
  MeanSource mean_source = MeanSource::dataset;
  std::optional<std::filesystem::path> mean_file;
  std::string classifier = "svm";  // "svm" or "nn"
  Metric metric = Metric::euclidean;
  double c = 40.0;
  std::filesystem::path cache_dir;
  std::optional<std::filesystem::path> output;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  std::size_t effective_tau() const { return tau.value_or(3); }
};

inline constexpr const char* kCacheDirEnv = "TCOF_CACHE_DIR";

// Explicit directory, else $TCOF_CACHE_DIR, else "tcof_cache".
std::filesystem::path resolve_cache_dir(const std::optional<std::filesystem::path>& explicit_dir);

// Checks flag combinations for `command` before any work starts.
void validate(const RunConfig& cfg, std::string_view command);

NetworkSpec load_network(const std::string& network);

// "<cache>/<stem>.<kind>.tnsr"
std::filesystem::path cache_path(const std::filesystem::path& cache_dir, const std::string& video_id,
                                 FeatureKind kind);

// Names and bytes of every frame file of a video directory.
std::uint64_t hash_video_dir(const std::filesystem::path& dir);

struct ExtractSummary {
  std::size_t computed = 0;
  std::size_t skipped = 0;
};

// Per-video TCoF vectors (spatial, temporal, or both for combined).
ExtractSummary cmd_extract(const RunConfig& cfg, std::ostream& log);

// Per-video 768-bin LBP-TOP descriptors.
ExtractSummary cmd_lbptop(const RunConfig& cfg, std::ostream& log);

struct EvalResult {
  EvalReport report;
  std::filesystem::path report_path;
};

// Leave-one-out over cached descriptors; writes accuracy and confusion CSVs.
EvalResult cmd_eval(const RunConfig& cfg, std::ostream& log);

LabeledFeatureSet load_feature_set(const DatasetManifest& manifest, const std::filesystem::path& cache_dir,
                                   FeatureKind kind);

struct SynthConfig {
  std::filesystem::path out_dir;
  std::size_t classes = 3;
  std::size_t videos_per_class = 10;
  std::size_t frames = 10;
  std::size_t height = 48;
  std::size_t width = 64;
  std::uint64_t seed = 0;
  bool force = false;
  // Per-pixel uniform noise half-width, per-video level jitter half-width and
  // per-frame drift step (class k drifts by (k - (K-1)/2) * drift_step).
  double noise = 0.05;
  double jitter = 0.02;
  double drift_step = 0.01;
};

// Writes frame directories and "manifest.tsv"; returns the manifest path.
std::filesystem::path cmd_synth(const SynthConfig& cfg);

}  // namespace tcof
