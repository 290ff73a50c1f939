#include "tcof/layers.hpp"

#include "tcof/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tcof {
namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) + ", got " +
                     to_string(t.dims()));
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias, const ConvGeometry& g) {
  require_rank(input, 3, "conv2d", "input");
  require_rank(kernels, 4, "conv2d", "kernels");
  if (g.stride < 1 || g.groups < 1) throw ShapeError("conv2d: stride and groups must be >= 1");

  const std::size_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t cout = kernels.dim(0), cin_g = kernels.dim(1), kh = kernels.dim(2), kw = kernels.dim(3);
  if (cin % g.groups != 0 || cout % g.groups != 0 || cin / g.groups != cin_g) {
    throw ShapeError("conv2d: input " + to_string(input.dims()) + " incompatible with kernels " +
                     to_string(kernels.dims()) + " and groups=" + std::to_string(g.groups));
  }
  if (bias.size() != cout) {
    throw ShapeError("conv2d: bias " + to_string(bias.dims()) + " does not match " + std::to_string(cout) +
                     " output channels");
  }
  if (h + 2 * g.pad < kh || w + 2 * g.pad < kw) {
    throw ShapeError("conv2d: kernel " + to_string(kernels.dims()) + " larger than padded input " +
                     to_string(input.dims()));
  }

  const std::size_t oh = (h + 2 * g.pad - kh) / g.stride + 1;
  const std::size_t ow = (w + 2 * g.pad - kw) / g.stride + 1;
  const std::size_t cout_g = cout / g.groups;
  const auto patch = static_cast<Eigen::Index>(cin_g * kh * kw);
  const auto positions = static_cast<Eigen::Index>(oh * ow);

  using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Tensor out({cout, oh, ow});
  Eigen::MatrixXd columns(patch, positions);

  for (std::size_t grp = 0; grp < g.groups; ++grp) {
    // im2col for this group's input channels.
    for (std::size_t c = 0; c < cin_g; ++c) {
      const std::size_t src_c = grp * cin_g + c;
      for (std::size_t ky = 0; ky < kh; ++ky) {
        for (std::size_t kx = 0; kx < kw; ++kx) {
          const auto row = static_cast<Eigen::Index>((c * kh + ky) * kw + kx);
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
              const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(h) &&
                                  ix < static_cast<std::ptrdiff_t>(w);
              columns(row, static_cast<Eigen::Index>(oy * ow + ox)) =
                  inside ? input(src_c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix)) : 0.0;
            }
          }
        }
      }
    }

    Eigen::Map<const RowMajorF> weights(kernels.data().data() + grp * cout_g * static_cast<std::size_t>(patch),
                                        static_cast<Eigen::Index>(cout_g), patch);
    const Eigen::MatrixXd response = weights.cast<double>() * columns;
    for (std::size_t oc = 0; oc < cout_g; ++oc) {
      const std::size_t dst_c = grp * cout_g + oc;
      const double b = bias[dst_c];
      float* dst = out.data().data() + dst_c * oh * ow;
      for (Eigen::Index p = 0; p < positions; ++p) {
        dst[p] = static_cast<float>(response(static_cast<Eigen::Index>(oc), p) + b);
      }
    }
  }
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  out.vector() = input.vector().cwiseMax(0.0f);
  return out;
}

Tensor lrn(const Tensor& input, const LrnParams& p) {
  require_rank(input, 3, "lrn", "input");
  if (p.depth < 1) throw ShapeError("lrn: depth must be >= 1");
  if (!(p.k > 0.0)) throw ShapeError("lrn: k must be > 0");

  const std::size_t channels = input.dim(0), plane = input.dim(1) * input.dim(2);
  const auto before = static_cast<std::ptrdiff_t>((p.depth - 1) / 2);
  const double scale = p.alpha / static_cast<double>(p.depth);
  Tensor out(input.dims());
  const auto in = input.data();
  auto dst = out.data();

  for (std::size_t c = 0; c < channels; ++c) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(c) - before);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(channels) - 1,
                                                       static_cast<std::ptrdiff_t>(c) - before +
                                                           static_cast<std::ptrdiff_t>(p.depth) - 1);
    for (std::size_t i = 0; i < plane; ++i) {
      double sum = 0.0;
      for (std::ptrdiff_t n = lo; n <= hi; ++n) {
        const double a = in[static_cast<std::size_t>(n) * plane + i];
        sum += a * a;
      }
      dst[c * plane + i] = static_cast<float>(in[c * plane + i] / std::pow(p.k + scale * sum, p.beta));
    }
  }
  return out;
}

Tensor maxpool2d(const Tensor& input, std::size_t kernel, std::size_t stride) {
  require_rank(input, 3, "maxpool2d", "input");
  if (kernel < 1 || stride < 1) throw ShapeError("maxpool2d: kernel and stride must be >= 1");
  const std::size_t channels = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (kernel > h || kernel > w) {
    throw ShapeError("maxpool2d: kernel " + std::to_string(kernel) + " larger than input " +
                     to_string(input.dims()));
  }
  const std::size_t oh = (h - kernel) / stride + 1, ow = (w - kernel) / stride + 1;
  Tensor out({channels, oh, ow});
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        float best = -std::numeric_limits<float>::infinity();
        for (std::size_t ky = 0; ky < kernel; ++ky) {
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            best = std::max(best, input(c, oy * stride + ky, ox * stride + kx));
          }
        }
        out(c, oy, ox) = best;
      }
    }
  }
  return out;
}

Tensor fully_connected(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  require_rank(weights, 2, "fully_connected", "weights");
  const std::size_t m = weights.dim(0), n = weights.dim(1);
  if (input.size() != n) {
    throw ShapeError("fully_connected: weights " + to_string(weights.dims()) + " expect input length " +
                     std::to_string(n) + ", got " + to_string(input.dims()));
  }
  if (bias.size() != m) {
    throw ShapeError("fully_connected: bias " + to_string(bias.dims()) + " does not match " + std::to_string(m) +
                     " outputs");
  }
  using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajorF> mat(weights.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd x = input.vector().cast<double>();
  Tensor out({m});
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) {
    out[static_cast<std::size_t>(i)] =
        static_cast<float>(mat.row(i).cast<double>().dot(x.transpose()) + bias[static_cast<std::size_t>(i)]);
  }
  return out;
}

Tensor bilinear_resize(const Tensor& input, std::size_t out_height, std::size_t out_width) {
  require_rank(input, 3, "bilinear_resize", "input");
  const std::size_t channels = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (h < 1 || w < 1 || out_height < 1 || out_width < 1) {
    throw ShapeError("bilinear_resize: empty image " + to_string(input.dims()));
  }
  if (h == out_height && w == out_width) return input;

  struct Tap {
    std::size_t lo, hi;
    double frac;
  };
  auto taps = [](std::size_t in, std::size_t out) {
    std::vector<Tap> result(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
      double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const auto lo = static_cast<std::size_t>(std::floor(src));
      result[i] = {lo, std::min(lo + 1, in - 1), src - static_cast<double>(lo)};
    }
    return result;
  };
  const auto ys = taps(h, out_height);
  const auto xs = taps(w, out_width);

  Tensor out({channels, out_height, out_width});
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t oy = 0; oy < out_height; ++oy) {
      const Tap& ty = ys[oy];
      for (std::size_t ox = 0; ox < out_width; ++ox) {
        const Tap& tx = xs[ox];
        const double top = (1.0 - tx.frac) * input(c, ty.lo, tx.lo) + tx.frac * input(c, ty.lo, tx.hi);
        const double bottom = (1.0 - tx.frac) * input(c, ty.hi, tx.lo) + tx.frac * input(c, ty.hi, tx.hi);
        out(c, oy, ox) = static_cast<float>((1.0 - ty.frac) * top + ty.frac * bottom);
      }
    }
  }
  return out;
}

Tensor convert_channels(const Tensor& input, std::size_t channels) {
  require_rank(input, 3, "convert_channels", "input");
  const std::size_t from = input.dim(0), plane = input.dim(1) * input.dim(2);
  if (from == channels) return input;
  Tensor out({channels, input.dim(1), input.dim(2)});
  if (channels == 1) {
    for (std::size_t i = 0; i < plane; ++i) {
      double sum = 0.0;
      for (std::size_t c = 0; c < from; ++c) sum += input[c * plane + i];
      out[i] = static_cast<float>(sum / static_cast<double>(from));
    }
  } else if (from == 1) {
    for (std::size_t c = 0; c < channels; ++c) {
      std::copy_n(input.data().begin(), plane, out.data().begin() + static_cast<std::ptrdiff_t>(c * plane));
    }
  } else {
    throw ShapeError("convert_channels: cannot map " + std::to_string(from) + " channels to " +
                     std::to_string(channels));
  }
  return out;
}

}  // namespace tcof
