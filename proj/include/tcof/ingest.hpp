#pragma once

#include "tcof/tensor.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tcof {

struct VideoClip {
  std::string id;
  std::string label;
  std::vector<Tensor> frames;  // each [C, H, W], values in [0, 1]

  std::size_t frame_count() const noexcept { return frames.size(); }
};

struct ManifestRecord {
  std::filesystem::path dir;  // absolute or root-relative resolved path
  std::string id;             // the directory as written in the manifest
  std::string label;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;
  std::vector<std::string> classes;  // sorted, unique

  std::size_t class_index(const std::string& label) const;
};

// One record per line: "<relative video dir>\t<class name>". Blank lines are
// skipped. Every directory must exist and hold at least one frame file.
DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& root);
// Reads a manifest file; directories resolve against its parent directory.
DatasetManifest load_manifest(const std::filesystem::path& path);

// Filesystem-safe stem for cache files derived from a video id.
std::string cache_stem(const std::string& video_id);

// Binary PGM (P5) / PPM (P6), 8-bit. Decoded to [C, H, W] scaled to [0, 1]
// with gray images replicated to three channels.
Tensor decode_pnm(std::string_view bytes, const std::string& name = "<memory>");
// Writes P5 for one channel and P6 for three; values are clamped to [0, 1]
// and rounded to 8 bits.
std::string encode_pnm(const Tensor& image);

bool is_frame_file(const std::filesystem::path& path);
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

VideoClip load_frames(const std::filesystem::path& dir, std::string id = {}, std::string label = {});

class FrameSubset {
 public:
  enum class Mode { first, eighth, quarter, half, all };

  FrameSubset() = default;
  explicit FrameSubset(Mode mode) : mode_(mode) {}

  // Accepts "first", "1/8", "1/4", "1/2", "all".
  static FrameSubset parse(std::string_view text);

  Mode mode() const noexcept { return mode_; }
  std::string name() const;
  // Number of leading frames kept from a clip of length n.
  std::size_t count(std::size_t n) const;

 private:
  Mode mode_ = Mode::all;
};

VideoClip select_frames(const VideoClip& clip, FrameSubset subset);

struct TemporalConfig {
  std::size_t tau = 3;
};

// Resize to the target height/width, then adapt the channel count.
Tensor prepare_frame(const Tensor& frame, const ImageShape& target);

// prepare(frame) - mean_image, at the mean image's shape.
Tensor spatial_input(const Tensor& frame, const Tensor& mean_image);
// prepare(later) - prepare(earlier).
Tensor temporal_input(const Tensor& later, const Tensor& earlier, const ImageShape& target);

// Each frame prepared to the mean image's shape, minus the mean image.
std::vector<Tensor> spatial_inputs(const VideoClip& clip, const Tensor& mean_image);

// N - tau differences prepare(frame[i + tau]) - prepare(frame[i]).
std::vector<Tensor> temporal_inputs(const VideoClip& clip, const TemporalConfig& cfg, const ImageShape& target);

// Pixelwise mean of every prepared frame of every clip, accumulated in double.
Tensor compute_mean_image(const std::vector<VideoClip>& clips, const ImageShape& target);
// Same, loading each manifest video (with `subset` applied) on `workers` threads.
Tensor compute_mean_image(const DatasetManifest& manifest, const ImageShape& target, FrameSubset subset,
                          std::size_t workers);

}  // namespace tcof
