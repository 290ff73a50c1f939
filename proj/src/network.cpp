#include "tcof/network.hpp"

#include "tcof/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

namespace tcof {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) words.push_back(line.substr(i, j - i));
    i = j;
  }
  return words;
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ParseError("network spec line " + std::to_string(line) + ": " + msg);
}

template <typename T>
T parse_number(std::string_view s, std::size_t line, std::string_view key) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(line, "invalid value '" + std::string(s) + "' for " + std::string(key));
  }
  return value;
}

// key=value attributes following the layer keyword.
class Attributes {
 public:
  Attributes(const std::vector<std::string_view>& words, std::size_t line) : line_(line) {
    for (std::size_t i = 1; i < words.size(); ++i) {
      const auto eq = words[i].find('=');
      if (eq == std::string_view::npos) fail(line, "expected key=value, got '" + std::string(words[i]) + "'");
      values_.emplace_back(words[i].substr(0, eq), words[i].substr(eq + 1));
    }
  }

  std::size_t size(std::string_view key, std::optional<std::size_t> fallback = std::nullopt) {
    if (auto v = take(key)) return parse_number<std::size_t>(*v, line_, key);
    if (fallback) return *fallback;
    fail(line_, "missing attribute '" + std::string(key) + "'");
  }

  std::optional<std::size_t> optional_size(std::string_view key) {
    if (auto v = take(key)) return parse_number<std::size_t>(*v, line_, key);
    return std::nullopt;
  }

  double real(std::string_view key, double fallback) {
    if (auto v = take(key)) return parse_number<double>(*v, line_, key);
    return fallback;
  }

  void finish() const {
    if (!values_.empty()) fail(line_, "unknown attribute '" + std::string(values_.front().first) + "'");
  }

 private:
  std::optional<std::string_view> take(std::string_view key) {
    for (auto it = values_.begin(); it != values_.end(); ++it) {
      if (it->first == key) {
        auto v = it->second;
        values_.erase(it);
        return v;
      }
    }
    return std::nullopt;
  }

  std::size_t line_;
  std::vector<std::pair<std::string_view, std::string_view>> values_;
};

std::string layer_label(std::size_t index, const Layer& layer) {
  static constexpr const char* kNames[] = {"conv", "relu", "lrn", "maxpool", "fc"};
  return "layer " + std::to_string(index) + " (" + kNames[layer.index()] + ")";
}

// Output dims of `layer` applied to `in`; throws a descriptive message on mismatch.
Tensor::Dims propagate(const Layer& layer, const Tensor::Dims& in) {
  return std::visit(
      Overloaded{
          [&](const ConvLayer& c) -> Tensor::Dims {
            if (in.size() != 3) throw ShapeError("conv expects a [C,H,W] input, got " + to_string(in));
            const auto& g = c.geometry;
            if (c.out_channels == 0 || c.kernel == 0 || g.stride == 0 || g.groups == 0) {
              throw ShapeError("conv attributes must be positive");
            }
            if (in[0] % g.groups != 0 || c.out_channels % g.groups != 0) {
              throw ShapeError("groups=" + std::to_string(g.groups) + " does not divide channels " +
                               std::to_string(in[0]) + " -> " + std::to_string(c.out_channels));
            }
            if (in[1] + 2 * g.pad < c.kernel || in[2] + 2 * g.pad < c.kernel) {
              throw ShapeError("kernel " + std::to_string(c.kernel) + " larger than padded input " + to_string(in));
            }
            return {c.out_channels, (in[1] + 2 * g.pad - c.kernel) / g.stride + 1,
                    (in[2] + 2 * g.pad - c.kernel) / g.stride + 1};
          },
          [&](const ReluLayer&) { return in; },
          [&](const LrnLayer& l) -> Tensor::Dims {
            if (in.size() != 3) throw ShapeError("lrn expects a [C,H,W] input, got " + to_string(in));
            if (l.params.depth < 1 || !(l.params.k > 0.0)) throw ShapeError("lrn needs depth >= 1 and k > 0");
            return in;
          },
          [&](const MaxPoolLayer& p) -> Tensor::Dims {
            if (in.size() != 3) throw ShapeError("maxpool expects a [C,H,W] input, got " + to_string(in));
            if (p.kernel == 0 || p.stride == 0) throw ShapeError("maxpool attributes must be positive");
            if (p.kernel > in[1] || p.kernel > in[2]) {
              throw ShapeError("pool kernel " + std::to_string(p.kernel) + " larger than input " + to_string(in));
            }
            return {in[0], (in[1] - p.kernel) / p.stride + 1, (in[2] - p.kernel) / p.stride + 1};
          },
          [&](const FcLayer& f) -> Tensor::Dims {
            if (f.out == 0) throw ShapeError("fc out must be positive");
            const std::size_t n = element_count(in);
            if (f.in && *f.in != n) {
              throw ShapeError("declared input length " + std::to_string(*f.in) + " but propagated input " +
                               to_string(in) + " has length " + std::to_string(n));
            }
            return {f.out};
          },
      },
      layer);
}

void format_real(std::ostream& os, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, ptr - buf);
}

}  // namespace

NetworkSpec parse_network_spec(std::string_view text) {
  NetworkSpec spec;
  std::vector<std::size_t> layer_lines;
  bool have_input = false;
  std::size_t line_no = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto words = split_words(line);
    if (words.empty()) continue;
    const auto keyword = words[0];

    if (keyword == "input") {
      if (have_input) fail(line_no, "duplicate input line");
      if (!spec.layers.empty()) fail(line_no, "input line must precede layers");
      if (words.size() != 4) fail(line_no, "expected 'input <channels> <height> <width>'");
      spec.input = {parse_number<std::size_t>(words[1], line_no, "channels"),
                    parse_number<std::size_t>(words[2], line_no, "height"),
                    parse_number<std::size_t>(words[3], line_no, "width")};
      if (spec.input.channels == 0 || spec.input.height == 0 || spec.input.width == 0) {
        fail(line_no, "input dims must be positive");
      }
      have_input = true;
      continue;
    }
    if (!have_input) fail(line_no, "layers must follow an 'input' line");

    Attributes attrs(words, line_no);
    Layer layer;
    if (keyword == "conv") {
      ConvLayer c;
      c.out_channels = attrs.size("out");
      c.kernel = attrs.size("k");
      c.geometry.stride = attrs.size("stride", 1);
      c.geometry.pad = attrs.size("pad", 0);
      c.geometry.groups = attrs.size("groups", 1);
      layer = c;
    } else if (keyword == "relu") {
      layer = ReluLayer{};
    } else if (keyword == "lrn") {
      LrnLayer l;
      l.params.depth = attrs.size("depth", l.params.depth);
      l.params.k = attrs.real("k", l.params.k);
      l.params.alpha = attrs.real("alpha", l.params.alpha);
      l.params.beta = attrs.real("beta", l.params.beta);
      layer = l;
    } else if (keyword == "maxpool") {
      MaxPoolLayer p;
      p.kernel = attrs.size("k");
      p.stride = attrs.size("stride", p.kernel);
      layer = p;
    } else if (keyword == "fc") {
      FcLayer f;
      f.out = attrs.size("out");
      f.in = attrs.optional_size("in");
      layer = f;
    } else {
      fail(line_no, "unknown layer keyword '" + std::string(keyword) + "'");
    }
    attrs.finish();
    spec.layers.push_back(layer);
    layer_lines.push_back(line_no);
  }

  if (!have_input) throw ParseError("network spec: missing 'input' line");
  if (spec.layers.empty()) throw ParseError("network spec: empty layer list");

  Tensor::Dims dims = spec.input.dims();
  for (std::size_t k = 0; k < spec.layers.size(); ++k) {
    try {
      dims = propagate(spec.layers[k], dims);
    } catch (const ShapeError& e) {
      fail(layer_lines[k], layer_label(k, spec.layers[k]) + ": " + e.what());
    }
    spec.output_dims.push_back(dims);
  }
  spec.feature_dim = element_count(dims);
  return spec;
}

std::string format_network_spec(const NetworkSpec& spec) {
  std::ostringstream os;
  os << "input " << spec.input.channels << ' ' << spec.input.height << ' ' << spec.input.width << '\n';
  for (const auto& layer : spec.layers) {
    std::visit(Overloaded{
                   [&](const ConvLayer& c) {
                     os << "conv out=" << c.out_channels << " k=" << c.kernel << " stride=" << c.geometry.stride
                        << " pad=" << c.geometry.pad << " groups=" << c.geometry.groups;
                   },
                   [&](const ReluLayer&) { os << "relu"; },
                   [&](const LrnLayer& l) {
                     os << "lrn depth=" << l.params.depth << " k=";
                     format_real(os, l.params.k);
                     os << " alpha=";
                     format_real(os, l.params.alpha);
                     os << " beta=";
                     format_real(os, l.params.beta);
                   },
                   [&](const MaxPoolLayer& p) { os << "maxpool k=" << p.kernel << " stride=" << p.stride; },
                   [&](const FcLayer& f) {
                     os << "fc out=" << f.out;
                     if (f.in) os << " in=" << *f.in;
                   },
               },
               layer);
    os << '\n';
  }
  return os.str();
}

bool is_parameterized(const Layer& layer) {
  return std::holds_alternative<ConvLayer>(layer) || std::holds_alternative<FcLayer>(layer);
}

std::pair<Tensor::Dims, Tensor::Dims> parameter_dims(const NetworkSpec& spec, std::size_t index) {
  const Layer& layer = spec.layers.at(index);
  const Tensor::Dims in = index == 0 ? spec.input.dims() : spec.output_dims[index - 1];
  if (const auto* c = std::get_if<ConvLayer>(&layer)) {
    return {{c->out_channels, in[0] / c->geometry.groups, c->kernel, c->kernel}, {c->out_channels}};
  }
  if (const auto* f = std::get_if<FcLayer>(&layer)) {
    return {{f->out, element_count(in)}, {f->out}};
  }
  throw LoadError(layer_label(index, layer) + " has no parameters");
}

std::string weight_name(std::size_t index) { return "layer" + std::to_string(index) + ".weight"; }
std::string bias_name(std::size_t index) { return "layer" + std::to_string(index) + ".bias"; }

WeightSet load_weights(const NetworkSpec& spec, const TensorContainer& container) {
  WeightSet weights;
  for (std::size_t k = 0; k < spec.layers.size(); ++k) {
    if (!is_parameterized(spec.layers[k])) continue;
    const auto [wdims, bdims] = parameter_dims(spec, k);
    auto fetch = [&](const std::string& name, const Tensor::Dims& expected) -> const Tensor& {
      const Tensor* t = container.find(name);
      if (!t) throw LoadError("weights: missing entry '" + name + "' for " + layer_label(k, spec.layers[k]));
      if (t->dims() != expected) {
        throw LoadError("weights: '" + name + "' for " + layer_label(k, spec.layers[k]) + " expected dims " +
                        to_string(expected) + ", got " + to_string(t->dims()));
      }
      if (!t->all_finite()) throw LoadError("weights: '" + name + "' contains non-finite values");
      return *t;
    };
    weights.emplace(k, LayerParams{fetch(weight_name(k), wdims), fetch(bias_name(k), bdims)});
  }
  return weights;
}

TensorContainer to_container(const WeightSet& weights) {
  TensorContainer container;
  for (const auto& [k, params] : weights) {
    container.add(weight_name(k), params.weight);
    container.add(bias_name(k), params.bias);
  }
  return container;
}

WeightSet random_weights(const NetworkSpec& spec, std::uint64_t seed) {
  // Uniform doubles come from the top 53 bits of each mt19937_64 draw.
  std::mt19937_64 rng(seed);
  WeightSet weights;
  for (std::size_t k = 0; k < spec.layers.size(); ++k) {
    if (!is_parameterized(spec.layers[k])) continue;
    auto [wdims, bdims] = parameter_dims(spec, k);
    const std::size_t fan_in = element_count(wdims) / wdims[0];
    const double half_width = std::sqrt(3.0 / static_cast<double>(fan_in));
    Tensor w(wdims);
    for (float& x : w.data()) {
      const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      x = static_cast<float>((2.0 * unit - 1.0) * half_width);
    }
    weights.emplace(k, LayerParams{std::move(w), Tensor(bdims, 0.0f)});
  }
  return weights;
}

Tensor forward(const NetworkSpec& spec, const WeightSet& weights, const Tensor& frame) {
  if (frame.dims() != spec.input.dims()) {
    throw ShapeError("forward: frame dims " + to_string(frame.dims()) + " do not match network input " +
                     to_string(spec.input.dims()));
  }
  Tensor x = frame;
  for (std::size_t k = 0; k < spec.layers.size(); ++k) {
    auto params = [&]() -> const LayerParams& {
      auto it = weights.find(k);
      if (it == weights.end()) throw LoadError("forward: no parameters for " + layer_label(k, spec.layers[k]));
      return it->second;
    };
    x = std::visit(Overloaded{
                       [&](const ConvLayer& c) { return conv2d(x, params().weight, params().bias, c.geometry); },
                       [&](const ReluLayer&) { return relu(x); },
                       [&](const LrnLayer& l) { return lrn(x, l.params); },
                       [&](const MaxPoolLayer& p) { return maxpool2d(x, p.kernel, p.stride); },
                       [&](const FcLayer&) { return fully_connected(x, params().weight, params().bias); },
                   },
                   spec.layers[k]);
  }
  return x.reshaped({x.size()});
}

}  // namespace tcof
