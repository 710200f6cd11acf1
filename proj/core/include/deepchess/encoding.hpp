#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "deepchess/position.hpp"

namespace deepchess {

/// 773-bit network input: twelve 64-square piece planes followed by five state bits.
///
/// Bit index = plane * 64 + square with planes ordered
/// (White, Black) x (pawn, knight, bishop, rook, queen, king). Bits 768..772 hold
/// side-to-move (1 = White), then White kingside, White queenside, Black kingside and
/// Black queenside castling rights. En passant and move counters are not represented.
class BitVector773 {
 public:
  static constexpr std::size_t kSize = 773;
  static constexpr std::size_t kPieceBits = 768;
  static constexpr std::size_t kSideToMoveBit = 768;
  static constexpr std::size_t kCastlingBit = 769;
  static constexpr std::size_t kPackedBytes = 97;
  static constexpr std::size_t kMaxActive = 37;

  static constexpr std::size_t size() { return kSize; }

  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i, bool value = true) {
    if (value) words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    else words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  /// Sorted indices of set bits.
  std::vector<std::uint16_t> active_indices() const;
  /// Writes sorted set-bit indices into `out` and returns how many were written.
  std::size_t active_indices(std::span<std::uint16_t> out) const;

  /// Bit i is stored in byte i / 8 at bit position i % 8 (LSB first); the three pad bits are zero.
  std::array<std::uint8_t, kPackedBytes> pack() const;
  static BitVector773 unpack(std::span<const std::uint8_t, kPackedBytes> bytes);

  std::uint64_t hash() const;

  friend bool operator==(const BitVector773&, const BitVector773&) = default;

 private:
  std::array<std::uint64_t, 13> words_{};
};

constexpr std::size_t plane_index(Piece p) {
  return static_cast<std::size_t>(index_of(p.color) * kPieceTypeCount + index_of(p.type));
}

BitVector773 encode(const Position& p);

class InconsistentVector : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// What the 773-bit encoding can recover of a position.
struct PositionFragment {
  std::array<std::optional<Piece>, kSquareCount> placement{};
  Color side_to_move = Color::Black;
  std::uint8_t castling = 0;
  /// True when the fragment satisfies every legal-position invariant.
  bool reachable = false;
};

/// Throws InconsistentVector when two planes claim the same square.
PositionFragment decode(const BitVector773& v);

}  // namespace deepchess
