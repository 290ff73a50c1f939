#pragma once

#include "tcof/container.hpp"
#include "tcof/error.hpp"
#include "tcof/tensor.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tcof {

// Streaming per-dimension mean and sum of squared deviations (Welford).
template <typename Scalar = double>
class StatsAccumulator {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit StatsAccumulator(Eigen::Index dim) : mean_(Vector::Zero(dim)), m2_(Vector::Zero(dim)) {}

  template <typename Derived>
  StatsAccumulator& accumulate(const Eigen::MatrixBase<Derived>& x) {
    if (x.size() != mean_.size()) {
      throw ShapeError("accumulate: feature length " + std::to_string(x.size()) + " does not match " +
                       std::to_string(mean_.size()));
    }
    ++count_;
    const Vector sample = x.template cast<Scalar>();
    const Vector delta = sample - mean_;
    mean_ += delta / static_cast<Scalar>(count_);
    m2_ += delta.cwiseProduct(sample - mean_);
    return *this;
  }

  // Chan et al. pairwise combination of two partial accumulators.
  StatsAccumulator& merge(const StatsAccumulator& other) {
    if (other.dim() != dim()) throw ShapeError("merge: accumulator dims differ");
    if (other.count_ == 0) return *this;
    if (count_ == 0) return *this = other;
    const auto na = static_cast<Scalar>(count_), nb = static_cast<Scalar>(other.count_);
    const Scalar n = na + nb;
    const Vector delta = other.mean_ - mean_;
    mean_ += delta * (nb / n);
    m2_ += other.m2_ + delta.cwiseAbs2() * (na * nb / n);
    count_ += other.count_;
    return *this;
  }

  Eigen::Index dim() const noexcept { return mean_.size(); }
  std::size_t count() const noexcept { return count_; }
  const Vector& mean() const noexcept { return mean_; }
  const Vector& m2() const noexcept { return m2_; }

  // (u, v): the mean and the population variance m2 / count.
  std::pair<Vector, Vector> finalize() const {
    if (count_ == 0) throw NumericError("finalize: empty feature sequence");
    return {mean_, (m2_ / static_cast<Scalar>(count_)).cwiseMax(Scalar(0))};
  }

 private:
  std::size_t count_ = 0;
  Vector mean_;
  Vector m2_;
};

// Deterministic balanced pairwise reduction of partial accumulators.
template <typename Scalar>
StatsAccumulator<Scalar> merge_pairwise(std::vector<StatsAccumulator<Scalar>> parts) {
  if (parts.empty()) throw NumericError("merge_pairwise: no accumulators");
  while (parts.size() > 1) {
    std::vector<StatsAccumulator<Scalar>> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(parts[i].merge(parts[i + 1]));
    if (parts.size() % 2) next.push_back(parts.back());
    parts = std::move(next);
  }
  return parts.front();
}

inline constexpr double kNormEpsilon = 1e-12;

// x / ||x||_2, or x unchanged when the norm is at most kNormEpsilon.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> l2_normalize(const Eigen::MatrixBase<Derived>& x) {
  const auto norm = x.norm();
  if (!(static_cast<double>(norm) > kNormEpsilon)) return x;
  return x / norm;
}

enum class Variant { spatial, temporal, combined };

std::string to_string(Variant variant);
Variant parse_variant(std::string_view text);

struct TcofVector {
  Variant variant = Variant::spatial;
  Eigen::VectorXd u;  // mean of frame features
  Eigen::VectorXd v;  // per-dimension variance
  Eigen::VectorXd f;  // normalized [u; v] (combined: [s.f; t.f])
};

// Normalized [u; v] from already accumulated statistics.
TcofVector tcof_from_stats(const StatsAccumulator<double>& stats, Variant variant);

TcofVector make_tcof(std::span<const Eigen::VectorXd> features, Variant variant);
TcofVector make_tcof(std::span<const Tensor> features, Variant variant);

// Same result as make_tcof, computed over `shards` contiguous slices that are
// merged pairwise.
TcofVector make_tcof_sharded(std::span<const Eigen::VectorXd> features, Variant variant, std::size_t shards);

// Concatenates a spatial and a temporal vector; no renormalization.
TcofVector combine(const TcofVector& spatial, const TcofVector& temporal);

// Feature cache file: entries "u", "v", "f", "meta" = [N, d, tau] and an
// optional "key" of four 16-bit limbs of the 64-bit content hash.
struct CacheMeta {
  std::size_t frames = 0;
  std::size_t dim = 0;
  std::size_t tau = 0;
};

Tensor encode_key(std::uint64_t key);
std::uint64_t decode_key(const Tensor& tensor);

void write_feature_cache(const std::filesystem::path& path, const TcofVector& tcof, const CacheMeta& meta,
                         std::uint64_t key);

struct CachedFeature {
  TcofVector tcof;
  CacheMeta meta;
  std::uint64_t key = 0;
};
CachedFeature read_feature_cache(const std::filesystem::path& path, Variant variant);

}  // namespace tcof
