#include "tcof/lbptop.hpp"

#include "tcof/layers.hpp"

#include <algorithm>

namespace tcof {
namespace {

// (row, col) offsets of neighbours 0..7 in lbp_code's bit order.
constexpr int kRow[8] = {0, -1, -1, -1, 0, 1, 1, 1};
constexpr int kCol[8] = {1, 1, 0, -1, -1, -1, 0, 1};

void normalize_into(const std::array<std::uint64_t, kLbpBins>& counts, std::array<double, kLbpBins>& out) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  for (std::size_t i = 0; i < kLbpBins; ++i) {
    out[i] = total ? static_cast<double>(counts[i]) / static_cast<double>(total) : 0.0;
  }
}

}  // namespace

std::uint8_t lbp_code(const Patch3x3& patch) {
  const float centre = patch[1][1];
  unsigned code = 0;
  for (unsigned b = 0; b < 8; ++b) {
    if (patch[static_cast<std::size_t>(1 + kRow[b])][static_cast<std::size_t>(1 + kCol[b])] >= centre) code |= 1u << b;
  }
  return static_cast<std::uint8_t>(code);
}

LbpTopCounts lbp_top_counts(const Tensor& volume) {
  if (volume.rank() != 3 || volume.dim(0) < 3 || volume.dim(1) < 3 || volume.dim(2) < 3) {
    throw ShapeError("lbp_top: volume must be [T, H, W] with every extent >= 3, got " + to_string(volume.dims()));
  }
  const std::size_t frames = volume.dim(0), h = volume.dim(1), w = volume.dim(2);
  LbpTopCounts counts;
  Patch3x3 xy, xt, yt;
  for (std::size_t t = 1; t + 1 < frames; ++t) {
    for (std::size_t y = 1; y + 1 < h; ++y) {
      for (std::size_t x = 1; x + 1 < w; ++x) {
        for (std::size_t r = 0; r < 3; ++r) {
          for (std::size_t c = 0; c < 3; ++c) {
            xy[r][c] = volume(t, y + r - 1, x + c - 1);
            xt[r][c] = volume(t + r - 1, y, x + c - 1);
            yt[r][c] = volume(t + r - 1, y + c - 1, x);
          }
        }
        ++counts.xy[lbp_code(xy)];
        ++counts.xt[lbp_code(xt)];
        ++counts.yt[lbp_code(yt)];
      }
    }
  }
  return counts;
}

LbpTopDescriptor lbp_top(const Tensor& volume) {
  const LbpTopCounts counts = lbp_top_counts(volume);
  LbpTopDescriptor d;
  normalize_into(counts.xy, d.xy);
  normalize_into(counts.xt, d.xt);
  normalize_into(counts.yt, d.yt);
  return d;
}

Eigen::VectorXd LbpTopDescriptor::concatenated() const {
  Eigen::VectorXd out(3 * kLbpBins);
  for (std::size_t i = 0; i < kLbpBins; ++i) {
    out[static_cast<Eigen::Index>(i)] = xy[i];
    out[static_cast<Eigen::Index>(kLbpBins + i)] = xt[i];
    out[static_cast<Eigen::Index>(2 * kLbpBins + i)] = yt[i];
  }
  return out;
}

Tensor gray_volume(const VideoClip& clip) {
  if (clip.frames.empty()) throw IngestError("gray_volume: clip '" + clip.id + "' has no frames");
  const auto& first = clip.frames.front();
  const std::size_t h = first.dim(1), w = first.dim(2), plane = h * w;
  Tensor volume({clip.frames.size(), h, w});
  for (std::size_t t = 0; t < clip.frames.size(); ++t) {
    const Tensor gray = convert_channels(clip.frames[t], 1);
    std::copy_n(gray.data().begin(), plane, volume.data().begin() + static_cast<std::ptrdiff_t>(t * plane));
  }
  return volume;
}

}  // namespace tcof
