#include "deepchess/inference.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "deepchess/encoding.hpp"

namespace deepchess {

Features sparse_affine(const nn::DenseLayer<float>& layer, std::span<const std::uint16_t> active) {
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i] >= layer.in_dim())
      throw IndexOutOfRange("input index " + std::to_string(active[i]) + " outside layer input");
    if (i > 0 && active[i] <= active[i - 1]) throw IndexOutOfRange("input indices must be sorted and unique");
  }
  Features out = layer.bias;
  for (std::uint16_t idx : active) out += layer.weights.col(idx);
  return out;
}

Features extract_features(const nn::FeatureExtractor<float>& fe, const BitVector773& input) {
  std::array<std::uint16_t, BitVector773::kSize> buf{};
  const std::size_t n = input.active_indices(buf);
  Features a = sparse_affine(fe.layers.front(), std::span(buf.data(), n));
  nn::Matrix<float> z = a;
  nn::apply_activation(fe.layers.front().activation, z);
  for (std::size_t k = 1; k < fe.layers.size(); ++k) {
    const auto& layer = fe.layers[k];
    nn::Matrix<float> next = layer.weights * z;
    next.colwise() += layer.bias;
    nn::apply_activation(layer.activation, next);
    z = std::move(next);
  }
  return z.col(0);
}

FeatureCache::FeatureCache(std::size_t capacity, int feature_dim)
    : dim_(feature_dim),
      keys_(std::max<std::size_t>(capacity, 1), 0),
      used_(keys_.size(), 0),
      values_(keys_.size() * static_cast<std::size_t>(feature_dim), 0.0F),
      locks_(std::make_unique<std::mutex[]>(kShards)) {
  if (feature_dim <= 0) throw std::invalid_argument("feature cache needs a positive feature width");
}

std::size_t FeatureCache::entries_for_megabytes(std::size_t megabytes, int feature_dim) {
  const std::size_t entry = sizeof(std::uint64_t) + 1 + sizeof(float) * static_cast<std::size_t>(feature_dim);
  return std::max<std::size_t>(1, megabytes * 1024 * 1024 / entry);
}

std::size_t FeatureCache::size() const {
  std::size_t n = 0;
  for (std::size_t s = 0; s < used_.size(); ++s) {
    std::lock_guard lock(shard(s));
    n += used_[s];
  }
  return n;
}

bool FeatureCache::lookup(std::uint64_t key, Features& out) const {
  const std::size_t slot = key % keys_.size();
  std::lock_guard lock(shard(slot));
  if (!used_[slot] || keys_[slot] != key) {
    misses_.fetch_add(1, std::memory_order_relaxed);
    return false;
  }
  out = Eigen::Map<const Features>(values_.data() + slot * static_cast<std::size_t>(dim_), dim_);
  hits_.fetch_add(1, std::memory_order_relaxed);
  return true;
}

void FeatureCache::insert(std::uint64_t key, const Features& value) {
  if (value.size() != dim_) throw std::invalid_argument("feature width does not match cache");
  const std::size_t slot = key % keys_.size();
  std::lock_guard lock(shard(slot));
  if (used_[slot] && keys_[slot] != key) evictions_.fetch_add(1, std::memory_order_relaxed);
  keys_[slot] = key;
  used_[slot] = 1;
  std::copy(value.data(), value.data() + dim_, values_.begin() + static_cast<std::ptrdiff_t>(slot * dim_));
}

void FeatureCache::clear() {
  for (std::size_t s = 0; s < used_.size(); ++s) {
    std::lock_guard lock(shard(s));
    used_[s] = 0;
  }
}

CacheStats FeatureCache::stats() const {
  return {hits_.load(), misses_.load(), evictions_.load()};
}

void FeatureCache::reset_stats() {
  hits_ = 0;
  misses_ = 0;
  evictions_ = 0;
}

Features features_of(const Position& p, const nn::FeatureExtractor<float>& fe, FeatureCache* cache) {
  Features f;
  if (cache && cache->lookup(p.key(), f)) return f;
  f = extract_features(fe, encode(p));
  if (cache) cache->insert(p.key(), f);
  return f;
}

Comparison compare(const std::vector<nn::DenseLayer<float>>& head, const Features& fa, const Features& fb) {
  nn::Matrix<float> x(fa.size() + fb.size(), 1);
  x.col(0) << fa, fb;
  const nn::Matrix<float> probs = nn::forward_stack(head, nn::BatchInput<float>{&x, nullptr});
  const float p0 = probs(0, 0);
  const float p1 = probs(1, 0);
  if (p0 > p1) return {Ordering::FirstBetter, p0};
  return {Ordering::SecondBetter, p1};
}

Comparison compare_white_perspective(const nn::SiameseNetwork<float>& net, const Position& a, const Position& b,
                                     FeatureCache* cache) {
  const Features fa = features_of(a, net.extractor, cache);
  const Features fb = features_of(b, net.extractor, cache);
  return compare(net.head, fa, fb);
}

}  // namespace deepchess
