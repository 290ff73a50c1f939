#pragma once

#include "tcof/error.hpp"
#include "tcof/ingest.hpp"
#include "tcof/tensor.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>

namespace tcof {

using Patch3x3 = std::array<std::array<float, 3>, 3>;

// 8-neighbour, radius-1 binary pattern. Bit b is set iff neighbour b >= the
// centre; neighbours run counter-clockwise from east:
//   bit 0 E (1,2), 1 NE (0,2), 2 N (0,1), 3 NW (0,0),
//   bit 4 W (1,0), 5 SW (2,0), 6 S (2,1), 7 SE (2,2)     (row, col)
std::uint8_t lbp_code(const Patch3x3& patch);

inline constexpr std::size_t kLbpBins = 256;

struct LbpTopCounts {
  std::array<std::uint64_t, kLbpBins> xy{};
  std::array<std::uint64_t, kLbpBins> xt{};
  std::array<std::uint64_t, kLbpBins> yt{};
};

struct LbpTopDescriptor {
  std::array<double, kLbpBins> xy{};
  std::array<double, kLbpBins> xt{};
  std::array<double, kLbpBins> yt{};

  // [xy; xt; yt], 768 values.
  Eigen::VectorXd concatenated() const;
};

// Histograms of codes over interior voxels of a [T, H, W] volume. Plane
// patches are laid out as
//   XY: rows = y, cols = x
//   XT: rows = t, cols = x
//   YT: rows = t, cols = y
// each centred on the voxel, row 0 being the smaller coordinate.
LbpTopCounts lbp_top_counts(const Tensor& volume);
LbpTopDescriptor lbp_top(const Tensor& volume);

// [T, H, W] volume of per-frame channel means.
Tensor gray_volume(const VideoClip& clip);

// sum_i (a_i - b_i)^2 / (a_i + b_i), skipping bins where a_i + b_i == 0.
template <typename DerivedA, typename DerivedB>
double chi2_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) throw ShapeError("chi2_distance: length mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double ai = static_cast<double>(a(i)), bi = static_cast<double>(b(i));
    if (ai < 0.0 || bi < 0.0) throw NumericError("chi2_distance: negative histogram entry at " + std::to_string(i));
    const double sum = ai + bi;
    if (sum > 0.0) total += (ai - bi) * (ai - bi) / sum;
  }
  return total;
}

}  // namespace tcof
