#pragma once

#include "tcof/container.hpp"
#include "tcof/layers.hpp"
#include "tcof/tensor.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tcof {

struct ConvLayer {
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  ConvGeometry geometry;

  friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

struct ReluLayer {
  friend bool operator==(const ReluLayer&, const ReluLayer&) = default;
};

struct LrnLayer {
  LrnParams params;

  friend bool operator==(const LrnLayer&, const LrnLayer&) = default;
};

struct MaxPoolLayer {
  std::size_t kernel = 0;
  std::size_t stride = 0;

  friend bool operator==(const MaxPoolLayer&, const MaxPoolLayer&) = default;
};

struct FcLayer {
  std::size_t out = 0;
  // Optional declared input length, checked against the propagated shape.
  std::optional<std::size_t> in;

  friend bool operator==(const FcLayer&, const FcLayer&) = default;
};

using Layer = std::variant<ConvLayer, ReluLayer, LrnLayer, MaxPoolLayer, FcLayer>;

// Validated layer graph. `output_dims[k]` is the shape produced by layer k.
struct NetworkSpec {
  ImageShape input;
  std::vector<Layer> layers;
  std::vector<Tensor::Dims> output_dims;
  std::size_t feature_dim = 0;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Line-oriented format:
//
//   input 3 224 224
//   conv out=96 k=11 stride=4 pad=2 groups=1
//   relu
//   lrn depth=5 k=2 alpha=0.0001 beta=0.75
//   maxpool k=3 stride=2
//   fc out=4096 [in=9216]
//
// Blank lines and text after '#' are ignored. Throws ParseError with the
// offending line number.
NetworkSpec parse_network_spec(std::string_view text);

// Canonical text form; parse_network_spec(format_network_spec(s)) == s.
std::string format_network_spec(const NetworkSpec& spec);

bool is_parameterized(const Layer& layer);

struct LayerParams {
  Tensor weight;
  Tensor bias;
};

// Parameters keyed by layer index.
using WeightSet = std::map<std::size_t, LayerParams>;

// Expected (weight, bias) dims for parameterized layer `index`.
std::pair<Tensor::Dims, Tensor::Dims> parameter_dims(const NetworkSpec& spec, std::size_t index);

std::string weight_name(std::size_t index);
std::string bias_name(std::size_t index);

// Reads "layer<k>.weight" / "layer<k>.bias" for every parameterized layer.
WeightSet load_weights(const NetworkSpec& spec, const TensorContainer& container);
TensorContainer to_container(const WeightSet& weights);

// Zero-mean uniform weights with standard deviation 1/sqrt(fan_in), zero
// biases. Deterministic in `seed` on every platform.
WeightSet random_weights(const NetworkSpec& spec, std::uint64_t seed);

// Runs every layer in order and returns the flattened final activation.
Tensor forward(const NetworkSpec& spec, const WeightSet& weights, const Tensor& frame);

}  // namespace tcof
