#include "tcof/pooling.hpp"

#include <algorithm>

namespace tcof {

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::spatial: return "spatial";
    case Variant::temporal: return "temporal";
    case Variant::combined: return "combined";
  }
  return "spatial";
}

Variant parse_variant(std::string_view text) {
  if (text == "spatial") return Variant::spatial;
  if (text == "temporal") return Variant::temporal;
  if (text == "combined") return Variant::combined;
  throw ConfigError("unknown variant '" + std::string(text) + "' (expected spatial, temporal, combined)");
}

TcofVector tcof_from_stats(const StatsAccumulator<double>& stats, Variant variant) {
  if (variant == Variant::combined) throw ConfigError("combined vectors are built with combine()");
  auto [u, v] = stats.finalize();
  Eigen::VectorXd f(u.size() + v.size());
  f << u, v;
  return {variant, std::move(u), std::move(v), l2_normalize(f)};
}

TcofVector make_tcof(std::span<const Eigen::VectorXd> features, Variant variant) {
  if (features.empty()) throw NumericError("make_tcof: empty feature sequence");
  StatsAccumulator<double> stats(features.front().size());
  for (const auto& x : features) stats.accumulate(x);
  return tcof_from_stats(stats, variant);
}

TcofVector make_tcof(std::span<const Tensor> features, Variant variant) {
  if (features.empty()) throw NumericError("make_tcof: empty feature sequence");
  StatsAccumulator<double> stats(static_cast<Eigen::Index>(features.front().size()));
  for (const auto& x : features) stats.accumulate(x.vector());
  return tcof_from_stats(stats, variant);
}

TcofVector make_tcof_sharded(std::span<const Eigen::VectorXd> features, Variant variant, std::size_t shards) {
  if (features.empty()) throw NumericError("make_tcof: empty feature sequence");
  shards = std::clamp<std::size_t>(shards, 1, features.size());
  std::vector<StatsAccumulator<double>> parts;
  parts.reserve(shards);
  for (std::size_t s = 0; s < shards; ++s) {
    StatsAccumulator<double> part(features.front().size());
    const std::size_t begin = s * features.size() / shards, end = (s + 1) * features.size() / shards;
    for (std::size_t i = begin; i < end; ++i) part.accumulate(features[i]);
    parts.push_back(std::move(part));
  }
  return tcof_from_stats(merge_pairwise(std::move(parts)), variant);
}

TcofVector combine(const TcofVector& spatial, const TcofVector& temporal) {
  if (spatial.variant != Variant::spatial || temporal.variant != Variant::temporal) {
    throw ConfigError("combine: expected (spatial, temporal), got (" + to_string(spatial.variant) + ", " +
                      to_string(temporal.variant) + ")");
  }
  if (spatial.f.size() != temporal.f.size()) throw ShapeError("combine: feature lengths differ");
  TcofVector out;
  out.variant = Variant::combined;
  out.u.resize(spatial.u.size() + temporal.u.size());
  out.u << spatial.u, temporal.u;
  out.v.resize(spatial.v.size() + temporal.v.size());
  out.v << spatial.v, temporal.v;
  out.f.resize(spatial.f.size() + temporal.f.size());
  out.f << spatial.f, temporal.f;
  return out;
}

Tensor encode_key(std::uint64_t key) {
  Tensor t({4});
  for (std::size_t i = 0; i < 4; ++i) t[i] = static_cast<float>((key >> (16 * i)) & 0xFFFF);
  return t;
}

std::uint64_t decode_key(const Tensor& tensor) {
  if (tensor.size() != 4) throw FormatError("cache key must have 4 limbs");
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < 4; ++i) key |= static_cast<std::uint64_t>(tensor[i]) << (16 * i);
  return key;
}

void write_feature_cache(const std::filesystem::path& path, const TcofVector& tcof, const CacheMeta& meta,
                         std::uint64_t key) {
  TensorContainer c;
  c.add("u", from_vector(tcof.u));
  c.add("v", from_vector(tcof.v));
  c.add("f", from_vector(tcof.f));
  c.add("meta", Tensor({3}, {static_cast<float>(meta.frames), static_cast<float>(meta.dim),
                             static_cast<float>(meta.tau)}));
  c.add("key", encode_key(key));
  save_container(path, c);
}

CachedFeature read_feature_cache(const std::filesystem::path& path, Variant variant) {
  const TensorContainer c = load_container(path);
  auto vec = [&](const char* name) { return Eigen::VectorXd(c.at(name).vector().cast<double>()); };
  CachedFeature out;
  out.tcof = {variant, vec("u"), vec("v"), vec("f")};
  const Tensor& meta = c.at("meta");
  if (meta.size() != 3) throw FormatError(path.string() + ": meta must hold [N, d, tau]");
  out.meta = {static_cast<std::size_t>(meta[0]), static_cast<std::size_t>(meta[1]), static_cast<std::size_t>(meta[2])};
  if (const Tensor* key = c.find("key")) out.key = decode_key(*key);
  return out;
}

}  // namespace tcof
