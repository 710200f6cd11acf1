#include "deepchess/encoding.hpp"

#include <string>

namespace deepchess {

std::vector<std::uint16_t> BitVector773::active_indices() const {
  std::vector<std::uint16_t> out;
  out.reserve(kMaxActive);
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits) {
      out.push_back(static_cast<std::uint16_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
      bits &= bits - 1;
    }
  }
  return out;
}

std::size_t BitVector773::active_indices(std::span<std::uint16_t> out) const {
  std::size_t n = 0;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits && n < out.size()) {
      out[n++] = static_cast<std::uint16_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
      bits &= bits - 1;
    }
  }
  return n;
}

std::array<std::uint8_t, BitVector773::kPackedBytes> BitVector773::pack() const {
  std::array<std::uint8_t, kPackedBytes> bytes{};
  for (std::size_t i = 0; i < kPackedBytes; ++i)
    bytes[i] = static_cast<std::uint8_t>(words_[i / 8] >> ((i % 8) * 8));
  return bytes;
}

BitVector773 BitVector773::unpack(std::span<const std::uint8_t, kPackedBytes> bytes) {
  BitVector773 v;
  for (std::size_t i = 0; i < kPackedBytes; ++i)
    v.words_[i / 8] |= static_cast<std::uint64_t>(bytes[i]) << ((i % 8) * 8);
  // Pad bits beyond 773 are dropped.
  v.words_[12] &= (std::uint64_t{1} << (kSize - 12 * 64)) - 1;
  return v;
}

std::uint64_t BitVector773::hash() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (auto w : words_) {
    h ^= w;
    h *= 0x100000001B3ULL;
    h ^= h >> 29;
  }
  return h;
}

BitVector773 encode(const Position& p) {
  BitVector773 v;
  for (Color c : {Color::White, Color::Black}) {
    for (int t = 0; t < kPieceTypeCount; ++t) {
      const Piece piece{c, static_cast<PieceType>(t)};
      Bitboard bb = p.pieces(c, piece.type);
      while (bb) v.set(plane_index(piece) * 64 + pop_lsb(bb));
    }
  }
  v.set(BitVector773::kSideToMoveBit, p.side_to_move() == Color::White);
  v.set(BitVector773::kCastlingBit + 0, p.can_castle(kWhiteKingside));
  v.set(BitVector773::kCastlingBit + 1, p.can_castle(kWhiteQueenside));
  v.set(BitVector773::kCastlingBit + 2, p.can_castle(kBlackKingside));
  v.set(BitVector773::kCastlingBit + 3, p.can_castle(kBlackQueenside));
  return v;
}

PositionFragment decode(const BitVector773& v) {
  PositionFragment f;
  for (std::size_t plane = 0; plane < 12; ++plane) {
    for (int sq = 0; sq < 64; ++sq) {
      if (!v.test(plane * 64 + static_cast<std::size_t>(sq))) continue;
      if (f.placement[sq])
        throw InconsistentVector("two planes claim square " + square_name(static_cast<Square>(sq)));
      f.placement[sq] = Piece{static_cast<Color>(plane / 6), static_cast<PieceType>(plane % 6)};
    }
  }
  f.side_to_move = v.test(BitVector773::kSideToMoveBit) ? Color::White : Color::Black;
  for (int b = 0; b < 4; ++b)
    if (v.test(BitVector773::kCastlingBit + static_cast<std::size_t>(b))) f.castling |= static_cast<std::uint8_t>(1 << b);

  PositionSetup setup;
  setup.placement = f.placement;
  setup.side_to_move = f.side_to_move;
  setup.castling = f.castling;
  try {
    (void)Position::from_setup(setup);
    f.reachable = true;
  } catch (const InvalidPosition&) {
    f.reachable = false;
  }
  return f;
}

}  // namespace deepchess
