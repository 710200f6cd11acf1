#include "deepchess/comparator.hpp"

#include <array>
#include <bit>
#include <stdexcept>

namespace deepchess {

namespace {

constexpr std::array<int, kPieceTypeCount> kPieceValue{1, 3, 3, 5, 9, 0};

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

int material_balance(const Position& p) {
  int total = 0;
  for (int t = 0; t < kPieceTypeCount; ++t) {
    const auto type = static_cast<PieceType>(t);
    total += kPieceValue[t] * (std::popcount(p.pieces(Color::White, type)) - std::popcount(p.pieces(Color::Black, type)));
  }
  return total;
}

Ordering MaterialComparator::compare(const Position& a, const Position& b) {
  return material_balance(a) > material_balance(b) ? Ordering::FirstBetter : Ordering::SecondBetter;
}

std::uint64_t RandomComparator::score(const Position& p) const { return mix(p.key() ^ mix(seed_)); }

Ordering RandomComparator::compare(const Position& a, const Position& b) {
  return score(a) > score(b) ? Ordering::FirstBetter : Ordering::SecondBetter;
}

LearnedComparator::LearnedComparator(std::shared_ptr<const nn::SiameseNetwork<float>> net,
                                     std::shared_ptr<FeatureCache> cache)
    : net_(std::move(net)), cache_(std::move(cache)) {
  if (!net_) throw std::invalid_argument("learned comparator needs a network");
  net_->validate();
  if (cache_ && cache_->feature_dim() != net_->extractor.output_dim())
    throw std::invalid_argument("cache width does not match the network's feature width");
}

Ordering LearnedComparator::compare(const Position& a, const Position& b) {
  return compare_white_perspective(*net_, a, b, cache_.get()).ordering;
}

}  // namespace deepchess
