#include "deepchess/bitboard.hpp"

#include <array>

namespace deepchess {

namespace {

struct Offset {
  int df;
  int dr;
};

constexpr Bitboard step_targets(Square s, const Offset* offsets, int n) {
  Bitboard b = 0;
  for (int i = 0; i < n; ++i) {
    const int f = file_of(s) + offsets[i].df;
    const int r = rank_of(s) + offsets[i].dr;
    if (f >= 0 && f < 8 && r >= 0 && r < 8) b |= square_bb(make_square(f, r));
  }
  return b;
}

constexpr Offset kKnightOffsets[] = {{1, 2}, {2, 1}, {2, -1}, {1, -2}, {-1, -2}, {-2, -1}, {-2, 1}, {-1, 2}};
constexpr Offset kKingOffsets[] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};

// Ray directions; the first four increase the square index, the last four decrease it.
constexpr Offset kRayDirections[8] = {{0, 1}, {1, 1}, {1, 0}, {-1, 1}, {0, -1}, {-1, -1}, {-1, 0}, {1, -1}};

struct Tables {
  std::array<Bitboard, 64> knight{};
  std::array<Bitboard, 64> king{};
  std::array<std::array<Bitboard, 64>, 2> pawn{};
  std::array<std::array<Bitboard, 64>, 8> ray{};
};

constexpr Tables build_tables() {
  Tables t{};
  for (int s = 0; s < 64; ++s) {
    const auto sq = static_cast<Square>(s);
    t.knight[s] = step_targets(sq, kKnightOffsets, 8);
    t.king[s] = step_targets(sq, kKingOffsets, 8);
    const Offset white_pawn[] = {{-1, 1}, {1, 1}};
    const Offset black_pawn[] = {{-1, -1}, {1, -1}};
    t.pawn[0][s] = step_targets(sq, white_pawn, 2);
    t.pawn[1][s] = step_targets(sq, black_pawn, 2);
    for (int d = 0; d < 8; ++d) {
      Bitboard b = 0;
      int f = file_of(sq) + kRayDirections[d].df;
      int r = rank_of(sq) + kRayDirections[d].dr;
      while (f >= 0 && f < 8 && r >= 0 && r < 8) {
        b |= square_bb(make_square(f, r));
        f += kRayDirections[d].df;
        r += kRayDirections[d].dr;
      }
      t.ray[d][s] = b;
    }
  }
  return t;
}

constexpr Tables kTables = build_tables();

inline Bitboard ray_attacks(int dir, Square s, Bitboard occupied) {
  Bitboard a = kTables.ray[dir][s];
  const Bitboard blockers = a & occupied;
  if (blockers) {
    const Square b = dir < 4 ? lsb(blockers) : static_cast<Square>(63 - std::countl_zero(blockers));
    a ^= kTables.ray[dir][b];
  }
  return a;
}

}  // namespace

namespace attacks {

Bitboard knight(Square s) { return kTables.knight[s]; }
Bitboard king(Square s) { return kTables.king[s]; }
Bitboard pawn(Color c, Square s) { return kTables.pawn[index_of(c)][s]; }

Bitboard bishop(Square s, Bitboard occupied) {
  return ray_attacks(1, s, occupied) | ray_attacks(3, s, occupied) | ray_attacks(5, s, occupied) |
         ray_attacks(7, s, occupied);
}

Bitboard rook(Square s, Bitboard occupied) {
  return ray_attacks(0, s, occupied) | ray_attacks(2, s, occupied) | ray_attacks(4, s, occupied) |
         ray_attacks(6, s, occupied);
}

}  // namespace attacks

}  // namespace deepchess
