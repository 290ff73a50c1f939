#include "tcof/ingest.hpp"

#include "tcof/error.hpp"
#include "tcof/layers.hpp"
#include "tcof/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace tcof {

namespace fs = std::filesystem;

std::size_t DatasetManifest::class_index(const std::string& label) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) throw IngestError("unknown class '" + label + "'");
  return static_cast<std::size_t>(it - classes.begin());
}

std::string cache_stem(const std::string& video_id) {
  std::string stem;
  stem.reserve(video_id.size());
  for (char ch : video_id) {
    const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
    stem.push_back(keep ? ch : '_');
  }
  while (!stem.empty() && (stem.back() == '_' || stem.back() == '.')) stem.pop_back();
  return stem.empty() ? "video" : stem;
}

DatasetManifest parse_manifest(std::string_view text, const fs::path& root) {
  DatasetManifest manifest;
  std::set<std::string> labels;
  std::set<std::string> stems;
  std::set<fs::path> dirs;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw IngestError("manifest line " + std::to_string(line_no) + ": " + msg);
  };

  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) fail("expected '<video dir>\\t<class name>'");
    std::string dir = line.substr(0, tab);
    std::string label = line.substr(tab + 1);
    if (dir.empty()) fail("empty video directory");
    if (label.empty() || label.find('\t') != std::string::npos) fail("invalid class name");

    const fs::path resolved = fs::path(dir).is_absolute() ? fs::path(dir) : root / dir;
    const fs::path canonical = fs::weakly_canonical(resolved);
    if (!dirs.insert(canonical).second) fail("duplicate video directory '" + dir + "'");
    if (!stems.insert(cache_stem(dir)).second) fail("duplicate video id '" + dir + "'");
    if (!fs::is_directory(resolved)) fail("missing directory '" + resolved.string() + "'");
    if (list_frame_files(resolved).empty()) fail("no frame files in '" + resolved.string() + "'");

    labels.insert(label);
    manifest.records.push_back({resolved, std::move(dir), std::move(label)});
  }
  if (manifest.records.empty()) throw IngestError("manifest is empty");
  manifest.classes.assign(labels.begin(), labels.end());
  return manifest;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open manifest " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_manifest(text, path.parent_path());
}

Tensor decode_pnm(std::string_view bytes, const std::string& name) {
  auto fail = [&](const std::string& msg) -> void { throw IngestError(name + ": " + msg); };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    fail("not a binary PGM/PPM file");
  }
  const std::size_t channels = bytes[1] == '6' ? 3 : 1;
  std::size_t pos = 2;

  auto next_number = [&]() -> std::size_t {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) fail("malformed header");
    std::size_t value = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (value > (1u << 24)) fail("header value out of range");
      ++pos;
    }
    return value;
  };

  const std::size_t width = next_number();
  const std::size_t height = next_number();
  const std::size_t maxval = next_number();
  if (width == 0 || height == 0) fail("zero image size");
  if (maxval == 0 || maxval > 255) fail("only 8-bit images are supported (maxval " + std::to_string(maxval) + ")");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) fail("malformed header");
  ++pos;

  const std::size_t plane = width * height;
  if (bytes.size() - pos < plane * channels) fail("truncated pixel data");

  Tensor image({3, height, width});
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const auto raw = static_cast<unsigned char>(bytes[pos + i * channels + (channels == 3 ? c : 0)]);
      image[c * plane + i] = static_cast<float>(std::min<std::size_t>(raw, maxval) * scale);
    }
  }
  return image;
}

std::string encode_pnm(const Tensor& image) {
  if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3)) {
    throw ShapeError("encode_pnm: expected [1|3, H, W], got " + to_string(image.dims()));
  }
  const std::size_t channels = image.dim(0), h = image.dim(1), w = image.dim(2), plane = h * w;
  std::string out = (channels == 3 ? "P6\n" : "P5\n") + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + plane * channels);
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = std::clamp(static_cast<double>(image[c * plane + i]), 0.0, 1.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
  return out;
}

bool is_frame_file(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

std::vector<fs::path> list_frame_files(const fs::path& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && is_frame_file(entry.path())) files.push_back(entry.path());
  }
  if (ec) throw IngestError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

VideoClip load_frames(const fs::path& dir, std::string id, std::string label) {
  VideoClip clip{id.empty() ? dir.filename().string() : std::move(id), std::move(label), {}};
  const auto files = list_frame_files(dir);
  if (files.empty()) throw IngestError("no frame files in " + dir.string());
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IngestError("cannot open frame " + file.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Tensor frame = decode_pnm(bytes, file.string());
    if (!clip.frames.empty() && frame.dims() != clip.frames.front().dims()) {
      throw IngestError(file.string() + ": frame dims " + to_string(frame.dims()) + " differ from " +
                        to_string(clip.frames.front().dims()));
    }
    clip.frames.push_back(std::move(frame));
  }
  return clip;
}

FrameSubset FrameSubset::parse(std::string_view text) {
  if (text == "first" || text == "1st" || text == "1") return FrameSubset(Mode::first);
  if (text == "1/8") return FrameSubset(Mode::eighth);
  if (text == "1/4") return FrameSubset(Mode::quarter);
  if (text == "1/2") return FrameSubset(Mode::half);
  if (text == "all" || text == "N") return FrameSubset(Mode::all);
  throw ConfigError("unknown frame subset '" + std::string(text) + "' (expected first, 1/8, 1/4, 1/2, all)");
}

std::string FrameSubset::name() const {
  switch (mode_) {
    case Mode::first: return "first";
    case Mode::eighth: return "1/8";
    case Mode::quarter: return "1/4";
    case Mode::half: return "1/2";
    case Mode::all: return "all";
  }
  return "all";
}

std::size_t FrameSubset::count(std::size_t n) const {
  switch (mode_) {
    case Mode::first: return std::min<std::size_t>(1, n);
    case Mode::eighth: return std::min(n, std::max<std::size_t>(1, n / 8));
    case Mode::quarter: return std::min(n, std::max<std::size_t>(1, n / 4));
    case Mode::half: return std::min(n, std::max<std::size_t>(1, n / 2));
    case Mode::all: return n;
  }
  return n;
}

VideoClip select_frames(const VideoClip& clip, FrameSubset subset) {
  VideoClip out{clip.id, clip.label, {}};
  const std::size_t keep = subset.count(clip.frames.size());
  out.frames.assign(clip.frames.begin(), clip.frames.begin() + static_cast<std::ptrdiff_t>(keep));
  return out;
}

Tensor prepare_frame(const Tensor& frame, const ImageShape& target) {
  return convert_channels(bilinear_resize(frame, target.height, target.width), target.channels);
}

Tensor spatial_input(const Tensor& frame, const Tensor& mean_image) {
  if (mean_image.rank() != 3) throw ShapeError("mean image must be [C, H, W], got " + to_string(mean_image.dims()));
  const ImageShape target{mean_image.dim(0), mean_image.dim(1), mean_image.dim(2)};
  return subtract(prepare_frame(frame, target), mean_image);
}

Tensor temporal_input(const Tensor& later, const Tensor& earlier, const ImageShape& target) {
  // Equal to prepare(later) - prepare(earlier): resizing and channel
  // conversion are linear.
  return prepare_frame(subtract(later, earlier), target);
}

std::vector<Tensor> spatial_inputs(const VideoClip& clip, const Tensor& mean_image) {
  if (!mean_image.all_finite()) throw NumericError("mean image contains non-finite values");
  std::vector<Tensor> inputs;
  inputs.reserve(clip.frames.size());
  for (const auto& frame : clip.frames) inputs.push_back(spatial_input(frame, mean_image));
  return inputs;
}

std::vector<Tensor> temporal_inputs(const VideoClip& clip, const TemporalConfig& cfg, const ImageShape& target) {
  const std::size_t n = clip.frames.size();
  if (cfg.tau < 1 || cfg.tau >= n) {
    throw ConfigError("clip '" + clip.id + "': tau=" + std::to_string(cfg.tau) + " requires 1 <= tau <= N-1 with N=" +
                      std::to_string(n));
  }
  std::vector<Tensor> inputs;
  inputs.reserve(n - cfg.tau);
  for (std::size_t i = 0; i + cfg.tau < n; ++i) {
    inputs.push_back(temporal_input(clip.frames[i + cfg.tau], clip.frames[i], target));
  }
  return inputs;
}

namespace {

struct PixelSum {
  Eigen::VectorXd sum;
  std::size_t frames = 0;
};

PixelSum sum_prepared(const VideoClip& clip, const ImageShape& target) {
  PixelSum s{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(element_count(target.dims()))), 0};
  for (const auto& frame : clip.frames) {
    s.sum += prepare_frame(frame, target).vector().cast<double>();
    ++s.frames;
  }
  return s;
}

Tensor finish_mean(const PixelSum& total) {
  if (total.frames == 0) throw IngestError("mean image: no frames");
  return from_vector(Eigen::VectorXd(total.sum / static_cast<double>(total.frames)));
}

}  // namespace

Tensor compute_mean_image(const std::vector<VideoClip>& clips, const ImageShape& target) {
  PixelSum total{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(element_count(target.dims()))), 0};
  for (const auto& clip : clips) {
    const PixelSum s = sum_prepared(clip, target);
    total.sum += s.sum;
    total.frames += s.frames;
  }
  return finish_mean(total).reshaped(target.dims());
}

Tensor compute_mean_image(const DatasetManifest& manifest, const ImageShape& target, FrameSubset subset,
                          std::size_t workers) {
  if (manifest.records.empty()) throw IngestError("mean image: empty manifest");
  // Per-video sums are loaded in batches and merged in manifest order.
  constexpr std::size_t kBatch = 32;
  PixelSum total{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(element_count(target.dims()))), 0};
  for (std::size_t start = 0; start < manifest.records.size(); start += kBatch) {
    const std::size_t count = std::min(kBatch, manifest.records.size() - start);
    std::vector<PixelSum> sums(count);
    parallel_for(count, workers, [&](std::size_t i) {
      const auto& rec = manifest.records[start + i];
      sums[i] = sum_prepared(select_frames(load_frames(rec.dir, rec.id, rec.label), subset), target);
    });
    for (const auto& s : sums) {
      total.sum += s.sum;
      total.frames += s.frames;
    }
  }
  return finish_mean(total).reshaped(target.dims());
}

}  // namespace tcof
