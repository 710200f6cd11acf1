#pragma once

#include <cstdint>
#include <memory>
#include <string_view>

#include "deepchess/inference.hpp"
#include "deepchess/position.hpp"

namespace deepchess {

/// Decides which of two positions is better for White.
class PositionComparator {
 public:
  virtual ~PositionComparator() = default;

  virtual Ordering compare(const Position& a, const Position& b) = 0;
  /// Feature-cache hits so far, for comparators that cache.
  virtual std::uint64_t cache_hits() const { return 0; }
  virtual std::string_view name() const = 0;
};

/// White material minus Black material with pawn 1, knight 3, bishop 3, rook 5, queen 9.
int material_balance(const Position& p);

/// FirstBetter iff `a` has strictly higher material balance.
class MaterialComparator final : public PositionComparator {
 public:
  Ordering compare(const Position& a, const Position& b) override;
  std::string_view name() const override { return "material"; }
};

/// Orders positions by a seeded hash of their key: arbitrary but transitive and repeatable.
class RandomComparator final : public PositionComparator {
 public:
  explicit RandomComparator(std::uint64_t seed) : seed_(seed) {}

  Ordering compare(const Position& a, const Position& b) override;
  std::string_view name() const override { return "random"; }
  std::uint64_t score(const Position& p) const;

 private:
  std::uint64_t seed_;
};

/// Network comparator; the cache may be shared or null.
class LearnedComparator final : public PositionComparator {
 public:
  LearnedComparator(std::shared_ptr<const nn::SiameseNetwork<float>> net, std::shared_ptr<FeatureCache> cache);

  Ordering compare(const Position& a, const Position& b) override;
  std::uint64_t cache_hits() const override { return cache_ ? cache_->stats().hits : 0; }
  std::string_view name() const override { return "learned"; }

  const nn::SiameseNetwork<float>& network() const { return *net_; }
  FeatureCache* cache() const { return cache_.get(); }

 private:
  std::shared_ptr<const nn::SiameseNetwork<float>> net_;
  std::shared_ptr<FeatureCache> cache_;
};

}  // namespace deepchess
