#pragma once

#include <bit>
#include <cstdint>

#include "deepchess/types.hpp"

namespace deepchess {

using Bitboard = std::uint64_t;

constexpr Bitboard square_bb(Square s) { return Bitboard{1} << s; }
constexpr Square lsb(Bitboard b) { return static_cast<Square>(std::countr_zero(b)); }
constexpr Square pop_lsb(Bitboard& b) {
  const Square s = lsb(b);
  b &= b - 1;
  return s;
}

constexpr Bitboard kRank1 = 0xFFULL;
constexpr Bitboard kRank8 = kRank1 << 56;
constexpr Bitboard kFileA = 0x0101010101010101ULL;
constexpr Bitboard kFileH = kFileA << 7;

namespace attacks {

Bitboard knight(Square s);
Bitboard king(Square s);
Bitboard pawn(Color c, Square s);
Bitboard bishop(Square s, Bitboard occupied);
Bitboard rook(Square s, Bitboard occupied);
inline Bitboard queen(Square s, Bitboard occupied) { return bishop(s, occupied) | rook(s, occupied); }

}  // namespace attacks

}  // namespace deepchess
