#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "deepchess/network.hpp"
#include "deepchess/position.hpp"

namespace deepchess {

class IndexOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

using Features = nn::Vector<float>;

/// First-layer pre-activation for a 0/1 input given by its active indices (sorted, unique, < 773).
Features sparse_affine(const nn::DenseLayer<float>& layer, std::span<const std::uint16_t> active);

/// Extractor output for one encoded position. Every caller goes through this single code path, so a
/// position's features do not depend on which comparison slot requested them.
Features extract_features(const nn::FeatureExtractor<float>& fe, const BitVector773& input);

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
};

/// Fixed-size direct-mapped table from position key to feature vector. A key maps to slot
/// key % capacity; insertion always replaces. Sharded locks allow concurrent readers and writers.
class FeatureCache {
 public:
  FeatureCache(std::size_t capacity, int feature_dim);

  /// Number of entries that fit in `megabytes` of storage for the given feature width (at least 1).
  static std::size_t entries_for_megabytes(std::size_t megabytes, int feature_dim);

  std::size_t capacity() const { return keys_.size(); }
  int feature_dim() const { return dim_; }
  std::size_t size() const;

  bool lookup(std::uint64_t key, Features& out) const;
  void insert(std::uint64_t key, const Features& value);
  void clear();

  CacheStats stats() const;
  void reset_stats();

 private:
  static constexpr std::size_t kShards = 64;

  std::mutex& shard(std::size_t slot) const { return locks_[slot % kShards]; }

  int dim_;
  std::vector<std::uint64_t> keys_;
  std::vector<std::uint8_t> used_;
  std::vector<float> values_;
  mutable std::unique_ptr<std::mutex[]> locks_;
  mutable std::atomic<std::uint64_t> hits_{0};
  mutable std::atomic<std::uint64_t> misses_{0};
  std::atomic<std::uint64_t> evictions_{0};
};

/// Features for `p`, served from `cache` when present (nullptr disables caching).
Features features_of(const Position& p, const nn::FeatureExtractor<float>& fe, FeatureCache* cache);

enum class Ordering { FirstBetter, SecondBetter };

constexpr Ordering invert(Ordering o) {
  return o == Ordering::FirstBetter ? Ordering::SecondBetter : Ordering::FirstBetter;
}

struct Comparison {
  Ordering ordering = Ordering::SecondBetter;
  float confidence = 0.5F;
};

/// Runs the head on [fa; fb]. FirstBetter only when component 0 strictly exceeds component 1, so an
/// exact 0.5 tie resolves to SecondBetter.
Comparison compare(const std::vector<nn::DenseLayer<float>>& head, const Features& fa, const Features& fb);

/// Which of two positions is better for White. Callers moving for Black invert the result.
Comparison compare_white_perspective(const nn::SiameseNetwork<float>& net, const Position& a, const Position& b,
                                     FeatureCache* cache);

}  // namespace deepchess
