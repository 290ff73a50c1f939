#pragma once

#include "tcof/tensor.hpp"

namespace tcof {

struct ConvGeometry {
  std::size_t stride = 1;
  std::size_t pad = 0;
  std::size_t groups = 1;

  friend bool operator==(const ConvGeometry&, const ConvGeometry&) = default;
};

// Cross-correlation over a zero-padded input.
//   input   [C_in, H, W]
//   kernels [C_out, C_in / groups, kH, kW]
//   bias    [C_out]
// Output is [C_out, (H + 2 pad - kH) / stride + 1, (W + 2 pad - kW) / stride + 1].
// Products are accumulated in double.
Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias, const ConvGeometry& geometry);

Tensor relu(const Tensor& input);

struct LrnParams {
  std::size_t depth = 5;
  double k = 2.0;
  double alpha = 1e-4;
  double beta = 0.75;

  friend bool operator==(const LrnParams&, const LrnParams&) = default;
};

// Cross-channel local response normalization:
//   out[c] = in[c] / (k + alpha / depth * sum_{c' in window(c)} in[c']^2)^beta
// The window covers `depth` channels starting at c - (depth - 1) / 2, clipped
// to the valid channel range.
Tensor lrn(const Tensor& input, const LrnParams& params);

// Max over kernel x kernel windows; windows may overlap (stride < kernel).
Tensor maxpool2d(const Tensor& input, std::size_t kernel, std::size_t stride);

// weights [m, n] times the flattened input (length n) plus bias [m].
Tensor fully_connected(const Tensor& input, const Tensor& weights, const Tensor& bias);

// Bilinear interpolation with half-pixel centers; source coordinates are
// clamped to the image border.
Tensor bilinear_resize(const Tensor& input, std::size_t out_height, std::size_t out_width);

// Adapts the channel count of an image: identity when equal, channel mean
// when collapsing to one channel, replication when expanding from one.
Tensor convert_channels(const Tensor& input, std::size_t channels);

}  // namespace tcof
