#pragma once

#include <array>
#include <cstdint>

#include "deepchess/types.hpp"

namespace deepchess {

class Position;

namespace zobrist {

/// Published seed; keys are reproducible across builds.
inline constexpr std::uint64_t kSeed = 0x9E3779B97F4A7C15ULL;

struct Codes {
  std::array<std::array<std::uint64_t, kSquareCount>, 12> piece{};
  std::uint64_t black_to_move = 0;
  std::array<std::uint64_t, 16> castling{};
};

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr Codes make_codes() {
  Codes c{};
  std::uint64_t state = kSeed;
  for (auto& plane : c.piece)
    for (auto& code : plane) code = splitmix64(state);
  c.black_to_move = splitmix64(state);
  // Per-right codes; the mask code is the XOR of its set rights so single-right updates compose.
  std::array<std::uint64_t, 4> right{};
  for (auto& r : right) r = splitmix64(state);
  for (int mask = 0; mask < 16; ++mask)
    for (int b = 0; b < 4; ++b)
      if (mask & (1 << b)) c.castling[mask] ^= right[b];
  return c;
}

inline constexpr Codes kCodes = make_codes();

constexpr int plane(Piece p) { return index_of(p.color) * kPieceTypeCount + index_of(p.type); }

constexpr std::uint64_t piece_code(Piece p, Square s) { return kCodes.piece[plane(p)][s]; }

/// Full recomputation; equals Position::key() for every reachable position.
std::uint64_t compute_key(const Position& p);

}  // namespace zobrist

}  // namespace deepchess
